#include "kangle/catalog.hpp"

#include "kangle/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>

namespace kangle {

namespace {

std::string num(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string header(int n, const AmbientSpec& a, bool periodic) {
    std::string s = "n = " + std::to_string(n) + ";\nambient = ";
    s += a.is_flat() ? "flat" : "space_form(" + num(a.rho) + ")";
    s += ";\n";
    if (periodic) s += "periodic;\n";
    return s;
}

std::string map_text(const std::vector<std::string>& comps) {
    std::string s = "map = [\n";
    for (std::size_t i = 0; i < comps.size(); ++i) s += "  " + comps[i] + (i + 1 < comps.size() ? ",\n" : "\n");
    return s + "]\n";
}

std::string u(int k) { return "u" + std::to_string(k); }

// c * expr with the sign pulled out of the literal.
std::string scaled(double c, const std::string& expr) {
    if (c == 1.0) return expr;
    if (c == -1.0) return "-" + expr;
    if (c < 0) return "-" + num(-c) + "*" + expr;
    return num(c) + "*" + expr;
}

// Uniform double in [0, 1) from the raw engine output; avoids the
// implementation-defined distributions of <random>.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Builder {
    std::vector<CatalogEntry> out;

    CatalogEntry& add(std::string name, std::string description, int n, const AmbientSpec& amb, bool periodic,
                      const std::vector<std::string>& comps, double lo, double hi) {
        CatalogEntry e;
        e.name = std::move(name);
        e.description = std::move(description);
        e.text = header(n, amb, periodic) + map_text(comps);
        e.spec = parse_immersion(e.text, e.name);
        e.lo.assign(2 * n, lo);
        e.hi.assign(2 * n, hi);
        out.push_back(std::move(e));
        return out.back();
    }
};

// X -> (X, a J0 X) with J0 the standard complex structure on each pair
// (u_{2j-1}, u_{2j}), interleaved as z_k = X_k + i (a J0 X)_k.
std::vector<std::string> linear_components(int n, double a) {
    std::vector<std::string> c;
    for (int j = 0; j < n; ++j) {
        const std::string p = u(2 * j + 1), q = u(2 * j + 2);
        c.push_back(p);
        c.push_back(a == 0.0 ? "0" : scaled(-a, q));
        c.push_back(q);
        c.push_back(a == 0.0 ? "0" : scaled(a, p));
    }
    return c;
}

// Lagrangian torus of 2n circles of radius r.
std::vector<std::string> torus_components(int n, double r) {
    std::vector<std::string> c;
    for (int k = 1; k <= 2 * n; ++k) {
        c.push_back(scaled(r, "cos(" + u(k) + ")"));
        c.push_back(scaled(r, "sin(" + u(k) + ")"));
    }
    return c;
}

// Lagrangian torus of radius r plus small random trigonometric modes.
std::vector<std::string> random_trig_components(int n, double r, double amp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> c = torus_components(n, r);
    for (auto& comp : c) {
        for (int mode = 0; mode < 3; ++mode) {
            std::string arg;
            for (int k = 1; k <= 2 * n; ++k) {
                const int f = static_cast<int>(rng() % 3) - 1;
                if (f == 0) continue;
                arg += (f < 0 ? "-" : (arg.empty() ? "" : "+")) + u(k);
            }
            if (arg.empty()) arg = u(1);
            const double coef = amp * (2.0 * unit(rng) - 1.0);
            const double phase = 6.283185307179586 * unit(rng);
            comp += (coef < 0 ? " - " : " + ") + num(std::abs(coef)) + "*sin(" + arg + " + " + num(phase) + ")";
        }
    }
    return c;
}

double ds_q(std::span<const double> p) {
    const double c = std::cos(p[0] + p[2]), s = std::sinh(p[1] + p[3]);
    return c * c + s * s;
}

void build_linear(Builder& b) {
    for (int n = 1; n <= 3; ++n)
        for (double a : {0.0, 0.25, 0.5, 1.0, 2.0}) {
            std::ostringstream name;
            name << "linear_n" << n << "_a" << a;
            auto& e = b.add(name.str(), "linear graph X -> (X, a J X), constant equal angle", n, AmbientSpec::flat(2 * n),
                            false, linear_components(n, a), -1.0, 1.0);
            const double c = 2.0 * std::abs(a) / (1.0 + a * a);
            e.expect.minimal = true;
            e.expect.totally_geodesic = true;
            e.expect.equal_angles = true;
            e.expect.constant_angle = true;
            e.expect.cos_theta = [c](std::span<const double>) { return c; };
            e.expect.classification = a == 0.0 ? PointClass::lagrangian
                                      : c == 1.0 ? PointClass::complex
                                                 : PointClass::generic;
            e.expect.parallel_mean_curvature = true;
        }
}

void build_ds(Builder& b) {
    const std::string U = "sin(u1 + u3)*cosh(u2 + u4)";
    const std::string V = "cos(u1 + u3)*sinh(u2 + u4)";
    auto& e = b.add("ds_graph", "graph of the anti-holomorphic map f = (u, v, -u, -v) in C^4, minimal", 2,
                    AmbientSpec::flat(4), false, {"u1", U, "u2", "-" + V, "u3", "-" + U, "u4", V}, -1.0, 1.0);
    e.expect.minimal = true;
    e.expect.equal_angles = true;
    e.expect.cos_theta = ds_realized_cos;
    e.expect.parallel_mean_curvature = true;
}

void build_tori(Builder& b) {
    auto& t2 = b.add("lagrangian_torus_2", "product of two unit circles in C^2", 1, AmbientSpec::flat(2), true,
                     torus_components(1, 1.0), 0.0, 6.283185307179586);
    t2.expect.classification = PointClass::lagrangian;
    t2.expect.mean_curvature_norm = std::sqrt(0.5);
    t2.expect.constant_angle = true;
    t2.expect.parallel_mean_curvature = true;
    auto& t4 = b.add("lagrangian_torus_4", "product of four circles of radius 1/sqrt(2) in C^4", 2, AmbientSpec::flat(4),
                     true, torus_components(2, std::sqrt(0.5)), 0.0, 6.283185307179586);
    t4.expect.classification = PointClass::lagrangian;
    t4.expect.mean_curvature_norm = std::sqrt(0.5);
    t4.expect.constant_angle = true;
    t4.expect.parallel_mean_curvature = true;
}

void build_holomorphic(Builder& b) {
    // z2 = 0.3 z1^2
    auto& h2 = b.add("holomorphic_graph_2", "graph of z -> 0.3 z^2, a complex curve in C^2", 1, AmbientSpec::flat(2),
                     false, {"u1", "u2", "0.3*(u1^2 - u2^2)", "0.6*u1*u2"}, -1.0, 1.0);
    h2.expect.classification = PointClass::complex;
    h2.expect.minimal = true;
    h2.expect.equal_angles = true;
    h2.expect.cos_theta = [](std::span<const double>) { return 1.0; };
    // z3 = 0.5 sin(z1 + z2), z4 = 0.3 z1 z2
    auto& h4 = b.add("holomorphic_graph_4", "graph of a holomorphic map C^2 -> C^2", 2, AmbientSpec::flat(4), false,
                     {"u1", "u2", "u3", "u4", "0.5*sin(u1 + u3)*cosh(u2 + u4)", "0.5*cos(u1 + u3)*sinh(u2 + u4)",
                      "0.3*(u1*u3 - u2*u4)", "0.3*(u1*u4 + u2*u3)"},
                     -1.0, 1.0);
    h4.expect.classification = PointClass::complex;
    h4.expect.minimal = true;
    h4.expect.equal_angles = true;
    h4.expect.cos_theta = [](std::span<const double>) { return 1.0; };
}

void build_random(Builder& b) {
    struct Amb {
        const char* tag;
        AmbientSpec spec;
    };
    const Amb ambients[] = {{"flat", AmbientSpec::flat(2)},
                            {"sf_pos", AmbientSpec::space_form(1.0, 2)},
                            {"sf_neg", AmbientSpec::space_form(-1.0, 2)}};
    std::uint64_t seed = 1001;
    for (const auto& a : ambients) {
        auto& e = b.add(std::string("random_surface_") + a.tag, "random trigonometric torus (n = 1)", 1, a.spec, true,
                        random_trig_components(1, 0.5, 0.06, seed++), 0.0, 6.283185307179586);
        e.expect.equal_angles = true;
        if (a.spec.kind == AmbientKind::space_form && a.spec.rho > 0) e.calibration = true;
    }
    const Amb ambients4[] = {{"flat", AmbientSpec::flat(4)},
                             {"sf_pos", AmbientSpec::space_form(1.0, 4)},
                             {"sf_neg", AmbientSpec::space_form(-1.0, 4)}};
    for (const auto& a : ambients4) {
        b.add(std::string("random_fourfold_") + a.tag, "random trigonometric 4-torus (n = 2), distinct angles", 2,
              a.spec, true, random_trig_components(2, 0.35, 0.01, seed++), 0.0, 6.283185307179586);
    }
}

void build_quaternionic(Builder& b) {
    // Complex for the structure J(z1, z2, z3, z4) = (-conj z2, conj z1, -conj z4, conj z3),
    // which anticommutes with the ambient one. Its holomorphic coordinates are
    // zeta1 = x1 + i x2, zeta2 = y1 - i y2, zeta3 = x3 + i x4, zeta4 = y3 - i y4;
    // the graph zeta3 = 0.5 sin(zeta1 + zeta2), zeta4 = 0.3 zeta1 zeta2 is written
    // with zeta1 = u1 + i u2 and zeta2 = u3 + i u4.
    auto& e = b.add("quaternionic_graph", "J-complex graph for a complex structure anticommuting with i", 2,
                    AmbientSpec::flat(4), false,
                    {"u1", "u3", "u2", "-u4", "0.5*sin(u1 + u3)*cosh(u2 + u4)", "0.3*(u1*u3 - u2*u4)",
                     "0.5*cos(u1 + u3)*sinh(u2 + u4)", "-0.3*(u1*u4 + u2*u3)"},
                    -1.0, 1.0);
    e.expect.minimal = true;
    e.expect.equal_angle_candidate = true;
    e.expect.parallel_mean_curvature = true;
}

void build_helix(Builder& b) {
    // (s + i t, r e^{i k s}) with r = 0.5, k = 2: cos(theta) = 1 / sqrt(1 + r^2 k^2)
    const double c = 1.0 / std::sqrt(2.0);
    auto& h = b.add("helix_surface", "helicoidal cylinder (s + i t, 0.5 e^{2 i s}), constant angle, not minimal", 1,
                    AmbientSpec::flat(2), false, {"u1", "u2", "0.5*cos(2*u1)", "0.5*sin(2*u1)"}, -2.0, 2.0);
    h.expect.equal_angles = true;
    h.expect.constant_angle = true;
    h.expect.minimal = false;
    h.expect.cos_theta = [c](std::span<const double>) { return c; };
    h.expect.mean_curvature_norm = 0.5 * 0.5 * 4.0 / (1.0 + 0.25 * 4.0); // (1/2) r k^2 / (1 + r^2 k^2)
    auto& p = b.add("helix_product", "product of two helicoidal cylinders with the same constant angle", 2,
                    AmbientSpec::flat(4), false,
                    {"u1", "u2", "0.5*cos(2*u1)", "0.5*sin(2*u1)", "u3", "u4", "0.5*cos(2*u3)", "0.5*sin(2*u3)"}, -2.0,
                    2.0);
    p.expect.equal_angles = true;
    p.expect.constant_angle = true;
    p.expect.minimal = false;
    p.expect.cos_theta = [c](std::span<const double>) { return c; };
}

std::vector<CatalogEntry> build() {
    Builder b;
    build_linear(b);
    build_ds(b);
    build_tori(b);
    build_holomorphic(b);
    build_random(b);
    build_quaternionic(b);
    build_helix(b);
    return std::move(b.out);
}

} // namespace

double ds_printed_cos(std::span<const double> p) {
    const double q = ds_q(p);
    return 2.0 * std::sqrt(q) / (1.0 + 4.0 * q);
}

double ds_realized_cos(std::span<const double> p) {
    const double q = ds_q(p);
    return 2.0 * std::sqrt(q) / std::sqrt(1.0 + 4.0 * q);
}

const std::vector<CatalogEntry>& builtin_catalog() {
    static const std::vector<CatalogEntry> catalog = build();
    return catalog;
}

const CatalogEntry& catalog_entry(std::string_view name) {
    for (const auto& e : builtin_catalog())
        if (e.name == name) return e;
    throw UsageError("unknown catalog entry '" + std::string(name) + "'");
}

ImmersionSpec with_ambient(const ImmersionSpec& spec, const AmbientSpec& ambient) {
    if (ambient.complex_dim != spec.ambient.complex_dim)
        throw UsageError("ambient override must keep the complex dimension");
    ImmersionSpec out = spec;
    out.ambient = ambient;
    return out;
}

std::vector<SelfCheck> check_expectations(const CatalogEntry& e, const Snapshot& s) {
    std::vector<SelfCheck> out;
    auto add = [&](std::string what, bool ok, double dev) { out.push_back({std::move(what), ok, dev}); };
    const double hnorm = std::sqrt(s.Hp.dot(s.Gp * s.Hp));
    const auto& x = e.expect;
    if (x.minimal) add("minimal", (*x.minimal) == (hnorm <= 1e-9), hnorm);
    if (x.totally_geodesic) {
        double b = 0.0;
        for (const auto& v : s.Bp) b = std::max(b, v.cwiseAbs().maxCoeff());
        add("totally_geodesic", (*x.totally_geodesic) == (b <= 1e-10), b);
    }
    if (x.equal_angles) add("equal_angles", (*x.equal_angles) == s.equal_angles, s.angle_spread);
    if (x.constant_angle) {
        double g = 0.0;
        for (int i = 0; i < s.m; ++i) g = std::max(g, std::abs(s.cos2.d(i)));
        add("constant_angle", (*x.constant_angle) == (g <= 1e-9), g);
    }
    if (x.classification) add(std::string("classification=") + to_string(*x.classification), s.cls == *x.classification, 0.0);
    if (x.mean_curvature_norm) {
        const double dev = std::abs(hnorm - *x.mean_curvature_norm);
        add("mean_curvature_norm", dev <= 1e-9, dev);
    }
    if (x.cos_theta) {
        const double want = x.cos_theta(s.point);
        double dev = 0.0;
        for (double c : s.cos_angles) dev = std::max(dev, std::abs(c - want));
        add("cos_theta", dev <= 1e-9, dev);
    }
    return out;
}

} // namespace kangle
