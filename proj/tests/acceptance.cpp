// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 iff all pass.

#include "support/fd_oracle.hpp"
#include "support/random_expr.hpp"

#include "kangle/ambient.hpp"
#include "kangle/catalog.hpp"
#include "kangle/harness.hpp"
#include "kangle/report.hpp"
#include "kangle/riemann.hpp"

#include <boost/rational.hpp>

#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace kangle;

namespace {

// Tolerances, pinned.
constexpr double kDsAngleAbs = 1e-9;
constexpr double kDsSeconds = 5.0;
constexpr double kLagrangianCos = 1e-9;
constexpr double kLinearCos = 1e-12;
constexpr double kLinearBending = 1e-10;
constexpr double kIdentityRel = 1e-5;
constexpr double kIdentityAbs = 1e-7;
constexpr int kIdentityMinPoints = 100;
constexpr double kSuiteSeconds = 60.0;
constexpr double kEinsteinDefect = 1e-7;
constexpr double kCurvatureRel = 1e-6;
constexpr double kGaussRel = 1e-6;
constexpr double kStokesAbs = 1e-8;
constexpr double kQuadratureRel = 1e-6;
constexpr double kTorusH = 1e-9;
constexpr double kTorusClosed = 1e-9;
constexpr double kTorusParallel = 1e-8;
constexpr double kJetRel = 1e-6;
constexpr int kJetChecks = 1000;
constexpr int kFuzzInputs = 100000;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ----- 1 -----
Outcome ds_angle_formula() {
    const auto t0 = Clock::now();
    const auto& e = catalog_entry("ds_graph");
    const std::vector<double> lo(4, -1.0), hi(4, 1.0);
    double printed = 0.0, realized = 0.0, spread = 0.0, hnorm = 0.0;
    for (const auto& p : halton_points(lo, hi, 256, 0)) {
        const Snapshot s = compute_snapshot(e.spec, p);
        printed = std::max(printed, std::abs(s.cos_theta() - ds_printed_cos(p)));
        realized = std::max(realized, std::abs(s.cos_theta() - ds_realized_cos(p)));
        spread = std::max(spread, s.angle_spread);
        hnorm = std::max(hnorm, std::sqrt(s.Hp.dot(s.Gp * s.Hp)));
    }
    const double secs = since(t0);
    const bool ok = printed <= kDsAngleAbs && spread <= kDsAngleAbs && hnorm <= kDsAngleAbs && secs <= kDsSeconds;
    return {ok, fmt("max|cos - printed formula| = %.3e, max|cos - 2sqrt(q)/sqrt(1+4q)| = %.3e, spread %.1e, "
                    "|H| %.1e, %.2f s",
                    printed, realized, spread, hnorm, secs)};
}

// ----- 2 -----
Outcome ds_lagrangian_locus() {
    const auto& e = catalog_entry("ds_graph");
    const double h = std::numbers::pi / 2;
    double worst = 0.0;
    bool all_lagrangian = true;
    for (const std::vector<double>& p : {std::vector<double>{0, 0, h, 0}, std::vector<double>{1, 0, h - 1, 0}}) {
        const Snapshot s = compute_snapshot(e.spec, p);
        worst = std::max(worst, s.cos_theta());
        all_lagrangian = all_lagrangian && s.cls == PointClass::lagrangian;
    }
    return {worst <= kLagrangianCos && all_lagrangian,
            fmt("max cos = %.1e, classification %s", worst, all_lagrangian ? "Lagrangian" : "NOT Lagrangian")};
}

// ----- 3 -----
Outcome linear_family() {
    double cos_err = 0.0, bending = 0.0;
    int entries = 0;
    for (int n = 1; n <= 3; ++n)
        for (double a : {0.0, 0.25, 0.5, 1.0, 2.0}) {
            std::ostringstream name;
            name << "linear_n" << n << "_a" << a;
            const auto& e = catalog_entry(name.str());
            ++entries;
            for (const auto& p : halton_points(e.lo, e.hi, 16, 3)) {
                const Snapshot s = compute_snapshot(e.spec, p);
                const double want = 2 * std::abs(a) / (1 + a * a);
                for (double c : s.cos_angles) cos_err = std::max(cos_err, std::abs(c - want));
                for (const auto& b : s.Bp) bending = std::max(bending, b.cwiseAbs().maxCoeff());
            }
        }
    return {entries == 15 && cos_err <= kLinearCos && bending <= kLinearBending,
            fmt("%d entries, max|cos - 2|a|/(1+a^2)| = %.1e, max|nabla dF| = %.1e", entries, cos_err, bending)};
}

// ----- 4, 6, 11 share the suite runs -----
const std::vector<std::string> kListedIdentities = {
    "prop3.1.a_norm",     "prop3.1.b_nabla_form", "prop3.1.c_delta_form",   "prop3.1.d_delta_norm",
    "prop3.1.e_delta_J",  "prop3.1.f_grad_sin2",  "lemma3.1.i",             "lemma3.1.ii",
    "lemma3.1.iii",       "lemma3.1.iv",          "delta_kappa.prop3.2",    "delta_kappa.prop3.3",
    "delta_kappa.cor3.2", "prop3.4.full",         "prop3.4.eq3.3",          "prop3.4.eq3.4",
    "eq2.2.weitzenboeck", "eq2.2.S_isotropic",    "section4.eq4.1",         "section4.cor1.1",
    "prop3.6.constant_angle", "prop3.6.d_sigma",  "prop3.6.parallel_sigma", "prop3.6.sigma_reduced",
    "prop3.6.sigma_trace", "cor2.1.closed",
};

struct Tally {
    int applicable = 0, failed = 0;
    double worst_rel = 0.0;
};

std::map<std::string, Tally> tally(const RunReport& r) {
    std::map<std::string, Tally> t;
    for (const auto& e : r.entries)
        for (const auto& row : e.records) {
            if (row.residual.diagnostic) continue;
            auto& x = t[row.residual.id];
            ++x.applicable;
            if (!row.residual.pass) ++x.failed;
            if (std::isfinite(row.residual.rel_residual)) x.worst_rel = std::max(x.worst_rel, row.residual.rel_residual);
        }
    return t;
}

struct SuiteRuns {
    std::vector<std::pair<std::string, RunReport>> runs;  // label, report
    double seconds = 0.0;
};

SuiteRuns run_all() {
    SuiteRuns s;
    const auto t0 = Clock::now();
    for (const char* amb : {"", "space_form(1)", "space_form(-1)"}) {
        RunOptions o;
        o.tolerance = {kIdentityAbs, kIdentityRel};
        if (*amb) o.ambient = amb;
        s.runs.emplace_back(*amb ? amb : "native", run_suite(o));
    }
    s.seconds = since(t0);
    return s;
}

// The point threshold is pooled over the three ambient runs: some listed
// identities (parallel sigma needs R = 0) have no applicable points in a
// curved ambient by hypothesis. Every run must be free of failures.
Outcome identity_suites(const SuiteRuns& s) {
    std::map<std::string, int> pooled;
    std::ostringstream detail;
    int failing = 0;
    for (const auto& [label, rep] : s.runs) {
        const auto t = tally(rep);
        int run_failing = 0, gated = 0;
        for (const auto& id : kListedIdentities) {
            const auto it = t.find(id);
            const Tally x = it == t.end() ? Tally{} : it->second;
            pooled[id] += x.applicable;
            run_failing += x.failed;
            if (x.applicable == 0) ++gated;
        }
        failing += run_failing;
        detail << label << ": " << run_failing << " failing";
        if (gated) detail << ", " << gated << " ids gated off";
        detail << "; ";
    }
    std::string thinnest;
    int least = INT_MAX;
    for (const auto& [id, n] : pooled)
        if (n < least) {
            least = n;
            thinnest = id;
        }
    detail << "fewest points " << least << " (" << thinnest << "); " << fmt("%.1f s", s.seconds);
    return {failing == 0 && least >= kIdentityMinPoints && s.seconds <= kSuiteSeconds, detail.str()};
}

Outcome gauss(const SuiteRuns& s) {
    const RunReport& native = s.runs.front().second;
    double worst = 0.0;
    int covered = 0;
    std::string missing;
    for (const auto& e : native.entries) {
        int count = 0;
        for (const auto& row : e.records)
            if (row.residual.id == "gauss.equation") {
                ++count;
                worst = std::max(worst, row.residual.rel_residual);
            }
        if (count > 0)
            ++covered;
        else if (missing.empty())
            missing = e.name;
    }
    const int total = static_cast<int>(native.entries.size());
    return {covered == total && worst <= kGaussRel,
            fmt("%d/%d entries, worst relative residual %.1e%s", covered, total, worst,
                missing.empty() ? "" : (", missing " + missing).c_str())};
}

// ----- 5 -----
std::vector<Jet> seeded(std::span<const double> z, int order) {
    std::vector<Jet> out;
    for (std::size_t i = 0; i < z.size(); ++i)
        out.push_back(Jet::seed(static_cast<int>(z.size()), order, z, static_cast<int>(i)));
    return out;
}

Outcome ambient_validation() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double einstein = 0.0, curvature = 0.0, r6 = 0.0;
    for (int cdim : {2, 4})
        for (double rho : {1.0, -1.0, 0.5, -0.5}) {
            const AmbientSpec spec = AmbientSpec::space_form(rho, cdim);
            const int d = spec.real_dim();
            for (int t = 0; t < 20; ++t) {
                std::vector<double> z(d);
                for (auto& x : z) x = u(rng);
                const Eigen::MatrixXd g = ambient_metric(spec, z);
                const auto jet_R = riemann_from_christoffel(christoffel_from_metric(ambient_metric(spec, seeded(z, 2)), d), g, d);
                double scale = 0.0, diff = 0.0;
                const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        for (int k = 0; k < d; ++k)
                            for (int l = 0; l < d; ++l) {
                                const double a = jet_R[((i * d + j) * d + k) * d + l];
                                const double b = ambient_curvature(spec, z, I.col(i), I.col(j), I.col(k), I.col(l));
                                scale = std::max(scale, std::abs(a));
                                diff = std::max(diff, std::abs(a - b));
                            }
                curvature = std::max(curvature, diff / scale);

                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
                const Eigen::MatrixXd E = es.operatorInverseSqrt();
                Eigen::MatrixXd ric(d, d);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        double s = 0.0;
                        for (int a = 0; a < d; ++a) s += ambient_curvature(spec, z, E.col(a), E.col(i), E.col(j), E.col(a));
                        ric(i, j) = s;
                    }
                einstein = std::max(einstein, (ric - einstein_constant(spec) * I).cwiseAbs().maxCoeff());
                if (cdim == 2) r6 = std::max(r6, std::abs(ric.trace() / d - 6 * rho));
            }
        }
    return {einstein <= kEinsteinDefect && curvature <= kCurvatureRel && r6 <= kEinsteinDefect,
            fmt("Einstein defect %.1e, closed form vs jets %.1e rel, n=1 |Ric/g - 6rho| %.1e", einstein, curvature, r6)};
}

// ----- 7 -----
Outcome torus_integrals_check() {
    const auto t0 = Clock::now();
    std::ostringstream detail;
    bool ok = true;
    int entries = 0;
    double worst_stokes = 0.0, worst_hodge = 0.0;
    std::set<int> grids;
    for (const auto& e : builtin_catalog()) {
        if (!e.periodic()) continue;
        ++entries;
        const int N = default_quadrature_grid(e.spec.n);
        grids.insert(N);
        const IntegralCheckKind kinds[] = {IntegralCheckKind::stokes, IntegralCheckKind::eq2_3};
        const auto checks = integral_checks(e.spec, kinds, N, 1, kStokesAbs, kQuadratureRel);
        const auto& st = checks[0];
        const auto& hd = checks[1];
        worst_stokes = std::max(worst_stokes, st.rel_residual);
        worst_hodge = std::max(worst_hodge, hd.rel_residual);
        const bool good = st.pass && st.converged && hd.pass && hd.converged;
        if (!good) detail << e.name << " failed; ";
        ok = ok && good;
    }
    detail << entries << " periodic entries, grids";
    for (int g : grids) detail << ' ' << g << " (coarse " << g / 2 << ")";
    detail << fmt(", worst Stokes rel %.1e, worst Hodge rel %.1e, %.1f s", worst_stokes, worst_hodge, since(t0));
    return {ok, detail.str()};
}

// ----- 8 -----
Outcome lagrangian_t4() {
    const auto& e = catalog_entry("lagrangian_torus_4");
    double hdev = 0.0, closed = 0.0, parallel = 0.0, sigma_min = INFINITY;
    int closed_n = 0, parallel_n = 0;
    GeometryOptions opts;
    opts.conventions = calibrate_header().conventions;
    for (const auto& p : halton_points(e.lo, e.hi, 32, 8)) {
        const Snapshot s = compute_snapshot(e.spec, p, opts);
        hdev = std::max(hdev, std::abs(std::sqrt(s.Hp.dot(s.Gp * s.Hp)) - std::sqrt(0.5)));
        for (const auto& r : verify_prop3_6(s)) {
            if (!r.applicable) continue;
            if (r.id == "cor2.1.closed") {
                closed = std::max(closed, r.abs_residual);
                ++closed_n;
            } else if (r.id == "prop3.6.parallel_sigma") {
                parallel = std::max(parallel, r.abs_residual);
                sigma_min = std::min(sigma_min, r.scale);
                ++parallel_n;
            }
        }
    }
    const bool ok = hdev <= kTorusH && closed_n == 32 && closed <= kTorusClosed && parallel_n == 32 &&
                    parallel <= kTorusParallel && sigma_min > 1e-3;
    return {ok, fmt("||H|| - sqrt(2)/2: %.1e; |d(JH)^T| %.1e at %d pts; |nabla sigma| %.1e at %d pts, min ||sigma|| %.3f",
                    hdev, closed, closed_n, parallel, parallel_n, sigma_min)};
}

// ----- 9 -----
Outcome kz_arithmetic() {
    using Q = boost::rational<long long>;
    const Q sin2(8, 9);
    int cases = 0, mismatches = 0;
    for (int hn = 0; hn <= 12; ++hn)
        for (int hd : {1, 2, 3, 7}) {
            const Q H2(hn, hd);
            for (int rn = -24; rn <= 24; ++rn)
                for (int rd : {1, 2, 4, 9, 28}) {
                    const Q rho(rn, rd);
                    const Q defect = mean_curvature_defect(1, sin2, Q(6) * rho, H2);
                    const bool vanishes = defect == Q(0);
                    const bool predicted = rho == Q(-3, 4) * H2;
                    ++cases;
                    if (vanishes != predicted) ++mismatches;
                }
        }
    return {mismatches == 0, fmt("%d exact rational cases, %d mismatches", cases, mismatches)};
}

// ----- 10 -----
Outcome jet_engine() {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> pt(-1.0, 1.0);
    int bad = 0;
    long long derivatives = 0;
    double worst = 0.0;
    for (int t = 0; t < kJetChecks; ++t) {
        const int vars = 1 + t % 3;
        const auto e = support::random_expr(rng, vars, 5);
        std::vector<double> x(vars);
        for (auto& v : x) v = pt(rng);
        std::vector<Jet> seeds;
        for (int v = 0; v < vars; ++v) seeds.push_back(Jet::seed(vars, 3, x, v));
        const Jet j = evaluate(*e, seeds);
        fd::Fn f = [&](const std::vector<double>& u) { return evaluate(*e, std::span<const double>(u)); };
        bool ok = true;
        for (int i = 0; i < j.size(); ++i) {
            const auto& ex = j.layout().exponents[i];
            const double oracle = fd::partial_adaptive(f, x, std::vector<int>(ex.begin(), ex.begin() + vars));
            const double rel = std::abs(j.coeffs()[i] * j.layout().factorials[i] - oracle) / std::max(1.0, std::abs(oracle));
            worst = std::max(worst, rel);
            ok = ok && rel <= kJetRel;
            ++derivatives;
        }
        if (!ok) ++bad;
    }

    const std::string valid = catalog_entry("ds_graph").text;
    int crashes = 0, unpositioned = 0, rejected = 0;
    for (int i = 0; i < kFuzzInputs; ++i) {
        const std::string input = support::random_input(rng, valid);
        try {
            parse_immersion(input);
        } catch (const ParseError& e) {
            ++rejected;
            if (e.line() < 1 || e.column() < 1) ++unpositioned;
        } catch (...) {
            ++crashes;
        }
    }
    return {bad == 0 && crashes == 0 && unpositioned == 0,
            fmt("%d expression/point checks (%lld derivatives), %d over tolerance, worst rel %.1e; "
                "fuzz %d inputs, %d rejected, %d crashes, %d unpositioned",
                kJetChecks, derivatives, bad, worst, kFuzzInputs, rejected, crashes, unpositioned)};
}

// ----- 11 -----
Outcome calibration(const SuiteRuns& s) {
    const ConventionHeader h = calibrate_header();
    int closing = 0;
    for (const auto& [c, worst] : h.tried)
        if (worst <= kIdentityRel) ++closing;
    bool in_headers = true;
    for (const auto& [label, rep] : s.runs) {
        const Json j = to_json(rep);
        in_headers = in_headers && j["conventions"]["s_laplacian"] == h.conventions.laplacian &&
                     j["conventions"]["s_codifferential"] == h.conventions.codifferential &&
                     j["conventions"]["calibrated"] == true;
    }
    return {h.calibrated && closing == 1 && h.tried.size() == 4 && in_headers,
            fmt("%d of %zu assignments close on %s; chosen (s_laplacian, s_codifferential) = (%+d, %+d); %s", closing,
                h.tried.size(), h.calibration_entry.c_str(), h.conventions.laplacian, h.conventions.codifferential,
                in_headers ? "recorded in every report header" : "MISSING from a report header")};
}

} // namespace

int main() {
    struct Criterion {
        int number;
        const char* title;
        std::function<Outcome()> run;
    };
    SuiteRuns suites;
    bool have_suites = false;
    auto with_suites = [&](Outcome (*f)(const SuiteRuns&)) {
        return [&, f] {
            if (!have_suites) {
                suites = run_all();
                have_suites = true;
            }
            return f(suites);
        };
    };
    const std::vector<Criterion> criteria = {
        {1, "D-S angle formula", ds_angle_formula},
        {2, "D-S Lagrangian locus", ds_lagrangian_locus},
        {3, "linear family angles", linear_family},
        {4, "identity suites, flat and space_form(+-1)", with_suites(identity_suites)},
        {5, "ambient validation", ambient_validation},
        {6, "Gauss equation cross-check", with_suites(gauss)},
        {7, "torus integral identities", torus_integrals_check},
        {8, "Lagrangian torus T4", lagrangian_t4},
        {9, "K-Z arithmetic", kz_arithmetic},
        {10, "jet engine and parser fuzz", jet_engine},
        {11, "convention calibration", with_suites(calibration)},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s  %2d  %-42s %s\n", o.pass ? "PASS" : "FAIL", c.number, c.title, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
