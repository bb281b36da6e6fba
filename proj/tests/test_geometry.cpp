#include "doctest.h"

#include "kangle/ambient.hpp"
#include "kangle/catalog.hpp"
#include "kangle/errors.hpp"
#include "kangle/geometry.hpp"
#include "support/fd_oracle.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace kangle;

namespace {

std::vector<double> random_point(std::mt19937_64& rng, const CatalogEntry& e) {
    std::vector<double> p(e.lo.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::uniform_real_distribution<double>(e.lo[i], e.hi[i])(rng);
    return p;
}

double h_norm2(const Snapshot& s) { return s.Hp.dot(s.Gp * s.Hp); }

double sff_norm2(const Snapshot& s) {
    double out = 0.0;
    for (int i = 0; i < s.m; ++i)
        for (int j = 0; j < s.m; ++j)
            for (int k = 0; k < s.m; ++k)
                for (int l = 0; l < s.m; ++l)
                    out += s.ginvp(i, k) * s.ginvp(j, l) * s.Bp[i * s.m + j].dot(s.Gp * s.Bp[k * s.m + l]);
    return out;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Eigen::MatrixXcd random_unitary(std::mt19937_64& rng, int k) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) a(i, j) = {nd(rng), nd(rng)};
    return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

ExprPtr lit(double v) { return v < 0 ? Expr::neg(Expr::literal(-v)) : Expr::literal(v); }

// F -> U F + c for a unitary U acting on interleaved coordinates.
ImmersionSpec moved(const ImmersionSpec& spec, const Eigen::MatrixXcd& U, const Eigen::VectorXd& c) {
    const int k = spec.target_dim() / 2;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l) {
            M(2 * j, 2 * l) = U(j, l).real();
            M(2 * j, 2 * l + 1) = -U(j, l).imag();
            M(2 * j + 1, 2 * l) = U(j, l).imag();
            M(2 * j + 1, 2 * l + 1) = U(j, l).real();
        }
    ImmersionSpec out = spec;
    for (int a = 0; a < 2 * k; ++a) {
        ExprPtr e = lit(c[a]);
        for (int b = 0; b < 2 * k; ++b)
            e = Expr::binary(Expr::Kind::add, e, Expr::binary(Expr::Kind::mul, lit(M(a, b)), spec.components[b]));
        out.components[a] = e;
    }
    return out;
}

} // namespace

TEST_CASE("linear graphs: metric, angle, totally geodesic, flat") {
    for (int n : {1, 2, 3})
        for (double a : {0.0, 0.25, 0.5, 1.0, 2.0}) {
            const std::string name = "linear_n" + std::to_string(n) + "_a" + (a == 0.25 ? "0.25" : a == 0.5 ? "0.5" : std::to_string(static_cast<int>(a)));
            const auto& e = catalog_entry(name);
            const Snapshot s = compute_snapshot(e.spec, std::vector<double>(2 * n, 0.3));
            CHECK((s.gp - (1 + a * a) * Eigen::MatrixXd::Identity(2 * n, 2 * n)).norm() < 1e-12);
            for (double c : s.cos_angles) CHECK(c == doctest::Approx(2 * std::abs(a) / (1 + a * a)).epsilon(1e-12));
            CHECK(sff_norm2(s) < 1e-20);
            CHECK(h_norm2(s) < 1e-20);
            CHECK(max_abs(s.riemann) < 1e-10);
            CHECK(std::abs(weitzenboeck_S(s)) < 1e-12);
        }
}

TEST_CASE("Lagrangian product tori") {
    SUBCASE("T2: unit metric, zero form, circle curvatures") {
        const Snapshot s = compute_snapshot(catalog_entry("lagrangian_torus_2").spec, std::vector<double>{0.4, 1.9});
        CHECK((s.gp - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
        CHECK(s.omegap.norm() < 1e-12);
        CHECK(s.cls == PointClass::lagrangian);
        CHECK(sff_norm2(s) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(std::sqrt(h_norm2(s)) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
        CHECK(*s.signed_cos == doctest::Approx(0.0));
    }
    SUBCASE("T4: |H| from circles of radius 1/sqrt 2") {
        const Snapshot s = compute_snapshot(catalog_entry("lagrangian_torus_4").spec, std::vector<double>{0.1, 2.0, 3.5, 5.0});
        CHECK(std::abs(std::sqrt(h_norm2(s)) - std::sqrt(2.0) / 2) < 1e-9);
        // Lagrangian: J maps the normal space isometrically onto the tangent space.
        CHECK(std::sqrt(norm2_vector(s, s.jhp)) == doctest::Approx(std::sqrt(h_norm2(s))).epsilon(1e-12));
        CHECK(max_abs(s.riemann) < 1e-10);
    }
}

TEST_CASE("D-S graph: metric against finite differences, minimality, angles") {
    const auto& e = catalog_entry("ds_graph");
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const auto p = random_point(rng, e);
        const Snapshot s = compute_snapshot(e.spec, p);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double gij = 0.0;
                for (int a = 0; a < 8; ++a) {
                    auto comp = [&](const std::vector<double>& x) { return eval_values(e.spec, x)[a]; };
                    std::vector<int> ai(4, 0), aj(4, 0);
                    ai[i] = 1;
                    aj[j] = 1;
                    gij += fd::partial(comp, p, ai) * fd::partial(comp, p, aj);
                }
                CHECK(std::abs(s.gp(i, j) - gij) < 1e-8);
            }
        CHECK(std::sqrt(h_norm2(s)) < 1e-9);
        CHECK(s.angle_spread < 1e-9);
        CHECK(std::abs(s.cos_theta() - ds_realized_cos(p)) < 1e-9);
    }
}

TEST_CASE("D-S Lagrangian locus") {
    const auto& e = catalog_entry("ds_graph");
    for (auto p : {std::vector<double>{0, 0, M_PI / 2, 0}, std::vector<double>{1, 0, M_PI / 2 - 1, 0}}) {
        const Snapshot s = compute_snapshot(e.spec, p);
        CHECK(s.cos_theta() <= 1e-9);
        CHECK(s.cls == PointClass::lagrangian);
        CHECK(s.rank == 0);
    }
}

TEST_CASE("pullback form: real plane, complex curves, orientation") {
    const Snapshot plane = compute_snapshot(parse_immersion("n=1; ambient=flat; map=[u1, 0, u2, 0]"), std::vector<double>{0.2, 0.7});
    CHECK(plane.omegap.norm() == 0.0);
    CHECK(plane.cls == PointClass::lagrangian);

    const Snapshot hol = compute_snapshot(parse_immersion("n=1; ambient=flat; map=[u1, u2, 0.3*(u1^2-u2^2), 0.6*u1*u2]"),
                                          std::vector<double>{0.2, 0.7});
    CHECK(hol.cos_theta() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hol.cls == PointClass::complex);
    CHECK(*hol.signed_cos == doctest::Approx(1.0).epsilon(1e-12));

    const Snapshot swapped = compute_snapshot(
        parse_immersion("n=1; ambient=flat; map=[u2, u1, 0.3*(u2^2-u1^2), 0.6*u1*u2]"), std::vector<double>{0.7, 0.2});
    CHECK(*swapped.signed_cos == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK_THROWS_AS(signed_angle_n1(Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Zero(4, 4)), UsageError);
}

TEST_CASE("pullback form is closed") {
    std::mt19937_64 rng(3);
    for (const char* name : {"ds_graph", "random_fourfold_flat", "random_fourfold_sf_pos", "quaternionic_graph"}) {
        const auto& e = catalog_entry(name);
        for (int k = 0; k < 25; ++k) {
            const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
            const int m = s.m;
            double worst = 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int l = 0; l < m; ++l)
                        worst = std::max(worst, std::abs(s.omega[j * m + l].d(i) + s.omega[l * m + i].d(j) +
                                                         s.omega[i * m + j].d(l)));
            CHECK(worst < 1e-9);
        }
    }
}

TEST_CASE("snapshot invariants over the catalog") {
    std::mt19937_64 rng(5);
    for (const auto& e : builtin_catalog()) {
        for (int k = 0; k < 8; ++k) {
            const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
            CAPTURE(e.name);
            // Angles sorted and in range.
            for (std::size_t a = 0; a < s.cos_angles.size(); ++a) {
                CHECK(s.cos_angles[a] >= 0.0);
                CHECK(s.cos_angles[a] <= 1.0 + 1e-10);
                if (a > 0) CHECK(s.cos_angles[a] <= s.cos_angles[a - 1]);
            }
            // H and the second fundamental form are normal; B is symmetric.
            CHECK((s.Ep.transpose() * s.Gp * s.Hp).norm() < 1e-9);
            for (int i = 0; i < s.m; ++i)
                for (int j = 0; j < s.m; ++j) {
                    CHECK((s.Ep.transpose() * s.Gp * s.Bp[i * s.m + j]).norm() < 1e-9);
                    CHECK((s.Bp[i * s.m + j] - s.Bp[j * s.m + i]).norm() < 1e-9);
                }
            // J_omega is a g-orthogonal complex structure off its kernel.
            if (s.rank == s.m) {
                CHECK((s.J_omega * s.J_omega + Eigen::MatrixXd::Identity(s.m, s.m)).norm() < 1e-9);
                CHECK((s.J_omega.transpose() * s.gp * s.J_omega - s.gp).norm() < 1e-9);
            }
            // The frame is g-orthonormal.
            CHECK((s.frame.transpose() * s.gp * s.frame - Eigen::MatrixXd::Identity(s.m, s.m)).norm() < 1e-9);
        }
    }
}

TEST_CASE("smooth J_omega field agrees with the pointwise polar factor") {
    std::mt19937_64 rng(9);
    for (const char* name : {"ds_graph", "quaternionic_graph", "helix_product", "random_surface_sf_neg"}) {
        const auto& e = catalog_entry(name);
        int used = 0;
        for (int k = 0; k < 20; ++k) {
            const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
            if (!s.has_fields || s.near_lagrangian()) continue;
            ++used;
            const Eigen::MatrixXd Jf = values(s.J_field, s.m, s.m);
            CHECK((Jf - s.J_omega).norm() < 1e-8);
        }
        CHECK(used > 0);
    }
}

TEST_CASE("(JH)^T vanishes at a complex point with H != 0") {
    const Snapshot s = compute_snapshot(parse_immersion("n=1; ambient=flat; map=[u1, u2, 0.5*u1^2, 0]"), std::vector<double>{0, 0});
    CHECK(s.cls == PointClass::complex);
    CHECK(h_norm2(s) > 0.01);
    CHECK(s.jhp.norm() < 1e-12);
}

TEST_CASE("Gaussian curvature against a finite-difference oracle") {
    const ImmersionSpec graph = parse_immersion("n=1; ambient=flat; map=[u1, u2, 0.3*u1^2 + 0.1*u2, 0.2*u1*u2 + 0.1*u2^3]");
    const auto& torus = catalog_entry("random_surface_flat");
    std::mt19937_64 rng(17);
    for (const ImmersionSpec* spec : {&graph, &torus.spec}) {
        for (int k = 0; k < 10; ++k) {
            std::vector<double> p{std::uniform_real_distribution<double>(-1, 1)(rng), std::uniform_real_distribution<double>(-1, 1)(rng)};
            const Snapshot s = compute_snapshot(*spec, p);
            // Flat ambient: B_ij is the normal part of d_ij F.
            Eigen::MatrixXd E(4, 2);
            std::vector<Eigen::Vector4d> D(4);
            for (int a = 0; a < 4; ++a) {
                auto comp = [&](const std::vector<double>& x) { return eval_values(*spec, x)[a]; };
                E(a, 0) = fd::partial(comp, p, {1, 0});
                E(a, 1) = fd::partial(comp, p, {0, 1});
                D[0][a] = fd::partial(comp, p, {2, 0});
                D[1][a] = D[2][a] = fd::partial(comp, p, {1, 1});
                D[3][a] = fd::partial(comp, p, {0, 2});
            }
            const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(4, 4) - E * (E.transpose() * E).inverse() * E.transpose();
            const double detg = (E.transpose() * E).determinant();
            const double K = ((P * D[0]).dot(P * D[3]) - (P * D[1]).squaredNorm()) / detg;
            const double R1221 = s.riemann[((0 * 2 + 1) * 2 + 1) * 2 + 0];
            CHECK(std::abs(R1221 / s.gp.determinant() - K) < 1e-6 * std::max(1.0, std::abs(K)));
        }
    }
}

TEST_CASE("Laplacian: constants, flat quadratic, trace Hess = div grad, finite differences") {
    const Snapshot flat = compute_snapshot(parse_immersion("n=1; ambient=flat; map=[u1, 0, u2, 0]"), std::vector<double>{0.3, -0.4});
    std::vector<double> p{0.3, -0.4};
    const Jet u1 = Jet::seed(2, 3, p, 0), u2 = Jet::seed(2, 3, p, 1);
    CHECK(laplacian(flat, Jet::constant(2, 3, 2.5)) == 0.0);
    CHECK(laplacian(flat, u1 * u1 + u2 * u2) == doctest::Approx(4.0).epsilon(1e-14));

    std::mt19937_64 rng(21);
    for (const char* name : {"ds_graph", "random_surface_sf_pos", "random_fourfold_sf_neg", "quaternionic_graph"}) {
        const auto& e = catalog_entry(name);
        for (int k = 0; k < 10; ++k) {
            const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
            const double lap = laplacian(s, s.cos2);
            const double div = divergence(s, gradient(s, s.cos2)).value();
            CHECK(std::abs(lap - div) < 1e-9 * std::max(1.0, std::abs(lap)));
        }
    }

    // Delta cos^2 on D-S against second differences of the angle itself.
    const auto& ds = catalog_entry("ds_graph");
    const std::vector<double> q{0.3, 0.1, -0.2, 0.25};
    const Snapshot s = compute_snapshot(ds.spec, q);
    auto c2 = [&](const std::vector<double>& x) { return std::pow(compute_snapshot(ds.spec, x).cos_theta(), 2); };
    double fd_lap = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            std::vector<int> a(4, 0);
            a[i] += 1;
            a[j] += 1;
            double hess = fd::partial(c2, q, a);
            for (int l = 0; l < 4; ++l) {
                std::vector<int> b(4, 0);
                b[l] = 1;
                hess -= s.gamma[(l * 4 + i) * 4 + j].value() * fd::partial(c2, q, b);
            }
            fd_lap += s.ginvp(i, j) * hess;
        }
    CHECK(std::abs(laplacian(s, s.cos2) - fd_lap) < 1e-6 * std::max(1.0, std::abs(fd_lap)));
}

TEST_CASE("harmonicity of F*omega for n = 2 with equal angles") {
    std::mt19937_64 rng(23);
    for (const char* name : {"ds_graph", "quaternionic_graph", "helix_product"}) {
        const auto& e = catalog_entry(name);
        for (int k = 0; k < 10; ++k) {
            const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
            CHECK(values(codifferential_2form(s, s.omega)).norm() < 1e-8);
            CHECK(hodge_laplacian_form(s).norm() < 1e-7);
        }
    }
}

TEST_CASE("Weitzenböck operator on 1-forms is the Ricci endomorphism") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> nd;
    for (const char* name : {"random_surface_sf_pos", "random_fourfold_sf_neg", "ds_graph"}) {
        const auto& e = catalog_entry(name);
        for (int k = 0; k < 5; ++k) {
            const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
            Eigen::VectorXd alpha(s.m);
            for (int i = 0; i < s.m; ++i) alpha[i] = nd(rng);
            const Eigen::VectorXd expect = ricci_M(s) * s.ginvp * alpha;
            CHECK((weitzenboeck_S_1form(s, alpha) - expect).norm() < 1e-9 * std::max(1.0, expect.norm()));
        }
    }
}

TEST_CASE("frame independence of the isotropic curvature sum") {
    std::mt19937_64 rng(31);
    for (const char* name : {"ds_graph", "quaternionic_graph", "random_fourfold_sf_pos"}) {
        const auto& e = catalog_entry(name);
        for (int k = 0; k < 5; ++k) {
            const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
            const ComplexFrame f = complex_frame(s);
            const Eigen::MatrixXcd V = random_unitary(rng, s.n);
            ComplexFrame r;
            for (int a = 0; a < s.n; ++a) {
                CVec z = CVec::Zero(s.m);
                for (int b = 0; b < s.n; ++b) z += V(a, b) * f.Z[b];
                r.Z.push_back(z);
                r.Zb.push_back(z.conjugate());
            }
            const double base = isotropic_sum(s, f);
            CHECK(std::abs(isotropic_sum(s, r) - base) < 1e-8 * std::max(1.0, std::abs(base)));
            // Orthonormality of the complex frame: g(Z_a, Zb_b) = delta_ab / 2.
            for (int a = 0; a < s.n; ++a)
                for (int b = 0; b < s.n; ++b)
                    CHECK(std::abs(g_domain(s, f.Z[a], f.Zb[b]) - (a == b ? 0.5 : 0.0)) < 1e-9);
        }
    }
}

TEST_CASE("ambient isometries leave every intrinsic scalar unchanged") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> nd;
    for (const char* name : {"ds_graph", "random_surface_flat", "quaternionic_graph", "helix_product", "random_fourfold_flat"}) {
        const auto& e = catalog_entry(name);
        const int k = e.spec.target_dim() / 2;
        Eigen::VectorXd c(2 * k);
        for (int i = 0; i < 2 * k; ++i) c[i] = nd(rng);
        const ImmersionSpec other = moved(e.spec, random_unitary(rng, k), c);
        for (int t = 0; t < 3; ++t) {
            const auto p = random_point(rng, e);
            const Snapshot a = compute_snapshot(e.spec, p), b = compute_snapshot(other, p);
            CAPTURE(name);
            CHECK((a.gp - b.gp).norm() < 1e-9);
            CHECK((a.omegap - b.omegap).norm() < 1e-9);
            for (std::size_t i = 0; i < a.cos_angles.size(); ++i) CHECK(std::abs(a.cos_angles[i] - b.cos_angles[i]) < 1e-9);
            CHECK(std::abs(h_norm2(a) - h_norm2(b)) < 1e-9);
            CHECK(std::abs(laplacian(a, a.cos2) - laplacian(b, b.cos2)) < 1e-9);
            CHECK(std::abs(weitzenboeck_S(a) - weitzenboeck_S(b)) < 1e-9);
            CHECK(std::abs(norm2_nabla_form(a) - norm2_nabla_form(b)) < 1e-9);
            CHECK((a.jhp - b.jhp).norm() < 1e-9);
        }
    }
}

TEST_CASE("hyper-Kähler remark: cos theta = |(J X)^T| for unit tangent X") {
    const auto& e = catalog_entry("quaternionic_graph");
    std::mt19937_64 rng(41);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 20; ++k) {
        const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
        REQUIRE(s.equal_angles);
        Eigen::VectorXd X(s.m);
        for (int i = 0; i < s.m; ++i) X[i] = nd(rng);
        X /= std::sqrt(X.dot(s.gp * X));
        // Tangential part of J dF(X), expressed in domain coordinates.
        const Eigen::VectorXd JdFX = s.JN * s.Ep * X;
        const Eigen::VectorXd top = s.ginvp * s.Ep.transpose() * s.Gp * JdFX;
        CHECK(std::abs(std::sqrt(top.dot(s.gp * top)) - s.cos_theta()) < 1e-8);
    }
}

TEST_CASE("Remark 1 algebra: Phi, Xi and the normal angles") {
    std::mt19937_64 rng(43);
    for (const char* name : {"ds_graph", "random_fourfold_sf_pos", "quaternionic_graph"}) {
        const auto& e = catalog_entry(name);
        for (int k = 0; k < 5; ++k) {
            const Snapshot s = compute_snapshot(e.spec, random_point(rng, e));
            const NormalData nd = phi_xi_normal(s);
            double sum_sin2 = 0.0;
            for (double c : s.cos_angles) sum_sin2 += 1 - c * c;
            CHECK(nd.phi_norm2 == doctest::Approx(2 * sum_sin2).epsilon(1e-8));
            CHECK(nd.xi_norm2 == doctest::Approx(2 * sum_sin2).epsilon(1e-8));
            for (std::size_t a = 0; a < s.cos_angles.size(); ++a)
                CHECK(std::abs(nd.cos_normal[a] - s.cos_angles[a]) < 1e-8);
            if (s.equal_angles) {
                // g(Phi X, Phi Y) = sin^2 g(X, Y)
                const Eigen::MatrixXd gram = nd.Phi.transpose() * nd.Phi;
                CHECK((gram - (1 - s.cos_theta() * s.cos_theta()) * s.gp).norm() < 1e-8);
            }
        }
    }
}

TEST_CASE("kappa and sigma gating") {
    const Snapshot torus = compute_snapshot(catalog_entry("lagrangian_torus_4").spec, std::vector<double>(4, 0.5));
    CHECK_THROWS_AS(kappa_field(torus), DomainError);
    const Snapshot hol = compute_snapshot(catalog_entry("holomorphic_graph_2").spec, std::vector<double>{0.1, 0.2});
    CHECK_THROWS_AS(kappa_field(hol), SingularityError);
    CHECK_THROWS_AS(sigma_form(hol), SingularityError);

    // Lagrangian torus: sigma = 2n (JH)^T flat, closed and parallel, nonzero.
    const SigmaData sd = sigma_form(torus);
    CHECK((values(sd.sigma) - 2.0 * torus.n * torus.jh_flatp).norm() < 1e-12);
    CHECK(values(sd.sigma).norm() > 0.5);
    CHECK(sd.d_sigma.norm() < 1e-9);
    CHECK(sd.nabla_sigma.norm() < 1e-8);
}

TEST_CASE("error cases") {
    const auto& ds = catalog_entry("ds_graph");
    GeometryOptions o;
    o.order = 2;
    CHECK_THROWS_AS(compute_snapshot(ds.spec, std::vector<double>(4, 0.0), o), UsageError);
    o.order = 5;
    CHECK_THROWS_AS(compute_snapshot(ds.spec, std::vector<double>(4, 0.0), o), UsageError);

    const ImmersionSpec cusp = parse_immersion("n=1; ambient=flat; map=[u1^3, 0, u2, 0]");
    CHECK_THROWS_AS(compute_snapshot(cusp, std::vector<double>{0.0, 0.0}), NotAnImmersionError);

    const ImmersionSpec hyp = parse_immersion("n=1; ambient=space_form(-1); map=[u1, u2, 0, 0]");
    CHECK_THROWS_AS(compute_snapshot(hyp, std::vector<double>{2.0, 0.0}), DomainError);
    CHECK_NOTHROW(compute_snapshot(hyp, std::vector<double>{0.5, 0.0}));
}

TEST_CASE("order 4 reproduces order 3 values") {
    const auto& e = catalog_entry("random_fourfold_sf_pos");
    std::mt19937_64 rng(47);
    GeometryOptions o4;
    o4.order = 4;
    for (int k = 0; k < 5; ++k) {
        const auto p = random_point(rng, e);
        const Snapshot a = compute_snapshot(e.spec, p), b = compute_snapshot(e.spec, p, o4);
        CHECK((a.gp - b.gp).norm() < 1e-13);
        CHECK(std::abs(laplacian(a, a.cos2) - laplacian(b, b.cos2)) < 1e-11);
        CHECK(max_abs(a.riemann) == doctest::Approx(max_abs(b.riemann)).epsilon(1e-11));
    }
}
