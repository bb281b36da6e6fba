#include "doctest.h"
#include "support/fd_oracle.hpp"

#include "kangle/errors.hpp"
#include "kangle/jet.hpp"

#include <cmath>
#include <random>

using namespace kangle;

namespace {

MultiIndex mi(std::initializer_list<int> e) {
    MultiIndex a{};
    int v = 0;
    for (int x : e) a[v++] = static_cast<std::uint8_t>(x);
    return a;
}

Jet x_at(double x0, int order) {
    const double p[] = {x0};
    return Jet::seed(1, order, p, 0);
}

Jet random_jet(std::mt19937_64& rng, int dim, int order) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Jet j(dim, order);
    for (auto& c : j.coeffs()) c = u(rng);
    return j;
}

double max_diff(const Jet& a, const Jet& b) {
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
    return m;
}

} // namespace

TEST_CASE("layout sizes are binomial") {
    CHECK(jet_size(1, 0) == 1);
    CHECK(jet_size(2, 2) == 6);
    CHECK(jet_size(4, 3) == 35);
    CHECK(jet_size(8, 4) == 495);
    CHECK_THROWS_AS(jet_layout(9, 1), UsageError);
    CHECK_THROWS_AS(jet_layout(2, 5), UsageError);
}

TEST_CASE("seed") {
    const double p[] = {3.0, 5.0};
    Jet a = Jet::seed(2, 2, p, 0);
    CHECK(a.coeff(mi({0, 0})) == 3.0);
    CHECK(a.coeff(mi({1, 0})) == 1.0);
    CHECK(a.coeff(mi({0, 1})) == 0.0);
    CHECK(a.coeff(mi({2, 0})) == 0.0);
    CHECK(a.coeff(mi({1, 1})) == 0.0);

    Jet b = x_at(0.0, 3);
    CHECK(b.value() == 0.0);
    CHECK(b.coeff(mi({1})) == 1.0);
    CHECK(b.coeff(mi({3})) == 0.0);

    const double q[] = {0.1, 0.2, 0.3, 0.4};
    Jet c = Jet::seed(4, 3, q, 3);
    CHECK(c.value() == 0.4);
    CHECK(c.d(3) == 1.0);
    CHECK(c.d(0) == 0.0);

    CHECK_THROWS_AS(Jet::seed(2, 2, p, 2), DomainError);
    CHECK_THROWS_AS(Jet::seed(2, 2, p, -1), DomainError);
}

TEST_CASE("arithmetic") {
    Jet x = x_at(2.0, 2);
    Jet sq = x * x;
    CHECK(sq.coeff(mi({0})) == 4.0);
    CHECK(sq.coeff(mi({1})) == 4.0);
    CHECK(sq.coeff(mi({2})) == 1.0);
    CHECK(sq.extract(mi({2})) == 2.0);

    Jet y = sin(x_at(0.3, 3)) + 2.0;
    Jet one = y / y;
    CHECK(one.value() == doctest::Approx(1.0).epsilon(1e-15));
    for (int i = 1; i < one.size(); ++i) CHECK(std::abs(one.coeffs()[i]) < 1e-15);

    CHECK_THROWS_AS(x / (x - 2.0), SingularityError);
    CHECK_THROWS_AS(x + x_at(2.0, 3), UsageError);
    const double p[] = {1.0, 1.0};
    CHECK_THROWS_AS(x * Jet::seed(2, 2, p, 0), UsageError);
}

TEST_CASE("sin*cos against finite differences") {
    const double u0 = 0.7;
    Jet s = sin(x_at(u0, 3)) * cos(x_at(u0, 3));
    fd::Fn f = [](const std::vector<double>& u) { return std::sin(u[0]) * std::cos(u[0]); };
    for (int k = 0; k <= 3; ++k) {
        const double oracle = fd::partial(f, {u0}, {k});
        CHECK(std::abs(s.extract(mi({k})) - oracle) < 1e-9);
    }
}

TEST_CASE("unary functions") {
    Jet e = exp(Jet::constant(3, 2, 0.0));
    CHECK(e.value() == 1.0);
    for (int i = 1; i < e.size(); ++i) CHECK(e.coeffs()[i] == 0.0);

    Jet sh = sinh(x_at(0.0, 3));
    CHECK(sh.coeff(mi({0})) == 0.0);
    CHECK(sh.coeff(mi({1})) == doctest::Approx(1.0));
    CHECK(sh.coeff(mi({2})) == 0.0);
    CHECK(sh.coeff(mi({3})) == doctest::Approx(1.0 / 6.0));

    const double x0 = 0.5;
    Jet x = x_at(x0, 3);
    Jet l = log(1.0 + x * x);
    fd::Fn f = [](const std::vector<double>& u) { return std::log(1 + u[0] * u[0]); };
    for (int k = 0; k <= 3; ++k) CHECK(std::abs(l.extract(mi({k})) - fd::partial(f, {x0}, {k})) < 1e-9);

    SUBCASE("every function vs FD at a generic point") {
        struct Case {
            Jet (*jet)(const Jet&);
            double (*ref)(double);
        };
        const Case cases[] = {
            {sin, [](double t) { return std::sin(t); }},   {cos, [](double t) { return std::cos(t); }},
            {sinh, [](double t) { return std::sinh(t); }}, {cosh, [](double t) { return std::cosh(t); }},
            {exp, [](double t) { return std::exp(t); }},   {log, [](double t) { return std::log(t); }},
            {sqrt, [](double t) { return std::sqrt(t); }}, {atan, [](double t) { return std::atan(t); }},
            {reciprocal, [](double t) { return 1.0 / t; }},
        };
        for (const auto& c : cases) {
            Jet r = c.jet(x_at(1.3, 4));
            fd::Fn g = [&](const std::vector<double>& u) { return c.ref(u[0]); };
            for (int k = 0; k <= 3; ++k) {
                const double o = fd::partial(g, {1.3}, {k});
                CHECK(std::abs(r.extract(mi({k})) - o) <= 1e-8 * std::max(1.0, std::abs(o)));
            }
        }
    }

    CHECK_THROWS_AS(log(x_at(0.0, 2)), SingularityError);
    CHECK_THROWS_AS(sqrt(x_at(-1.0, 2)), SingularityError);
    try {
        (void)log(x_at(-2.5, 2));
    } catch (const SingularityError& err) {
        CHECK(err.offending_value() == -2.5);
    }

    Jet p = pow(x_at(1.5, 4), 3);
    CHECK(p.extract(mi({0})) == doctest::Approx(3.375));
    CHECK(p.extract(mi({3})) == doctest::Approx(6.0));
    CHECK(p.extract(mi({4})) == 0.0);
    CHECK(pow(x_at(1.5, 2), 0).value() == 1.0);
}

TEST_CASE("extract") {
    const double p[] = {0.4, -0.9};
    Jet u1 = Jet::seed(2, 3, p, 0), u2 = Jet::seed(2, 3, p, 1);
    Jet f = u1 * u2;
    CHECK(f.extract(mi({0, 0})) == doctest::Approx(-0.36));
    CHECK(f.extract(mi({1, 1})) == 1.0);
    CHECK(f.d(0, 1) == 1.0);
    CHECK_THROWS_AS(f.extract(mi({2, 2})), UsageError);
}

TEST_CASE("partial and truncation") {
    const double p[] = {0.2, 0.7, -0.3};
    Jet a = Jet::seed(3, 4, p, 0), b = Jet::seed(3, 4, p, 1), c = Jet::seed(3, 4, p, 2);
    Jet f = sin(a * b) + exp(c) * b;
    Jet fb = f.partial(1);
    CHECK(fb.order() == 3);
    Jet direct = a * cos(a * b) + exp(c);
    CHECK(max_diff(fb, direct.truncated(3)) < 1e-14);
    Jet fbc = fb.partial(2);
    CHECK(max_diff(fbc, exp(c).truncated(2)) < 1e-14);
    CHECK(f.truncated(2).extract(mi({1, 1, 0})) == doctest::Approx(f.extract(mi({1, 1, 0}))));
    CHECK_THROWS_AS(f.truncated(2).truncated(3), UsageError);
}

TEST_CASE("ring axioms on random jets") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 1 + trial % 8, order = trial % 5;
        Jet a = random_jet(rng, dim, order), b = random_jet(rng, dim, order), c = random_jet(rng, dim, order);
        CHECK(max_diff((a * b) * c, a * (b * c)) < 1e-13);
        CHECK(max_diff(a * (b + c), a * b + a * c) < 1e-13);
        CHECK(max_diff(a * b, b * a) < 1e-13);
        CHECK(max_diff(a * Jet::constant(dim, order, 1.0), a) == 0.0);
        CHECK(max_diff(a + (-a), Jet::constant(dim, order, 0.0)) == 0.0);
        Jet acc = c;
        mul_add(acc, a, b);
        CHECK(max_diff(acc, c + a * b) < 1e-13);
    }
}

TEST_CASE("chain rule consistency") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Jet a = random_jet(rng, 3, 4);
        a.coeffs()[0] = 0.5 + 0.1 * trial;
        // exp(log a) == a, sqrt(a)^2 == a, sin(atan a) == a / sqrt(1 + a^2)
        CHECK(max_diff(exp(log(a)), a) < 1e-12);
        CHECK(max_diff(pow(sqrt(a), 2), a) < 1e-12);
        CHECK(max_diff(sin(atan(a)), a / sqrt(1.0 + a * a)) < 1e-12);
        CHECK(max_diff(cosh(a) * cosh(a) - sinh(a) * sinh(a), Jet::constant(3, 4, 1.0)) < 1e-12);
        CHECK(max_diff(log(exp(a) * exp(a)), 2.0 * a) < 1e-12);
    }
}
