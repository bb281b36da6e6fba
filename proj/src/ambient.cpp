#include "kangle/ambient.hpp"

#include "kangle/errors.hpp"

#include <string>

namespace kangle {

namespace {

void check_length(const AmbientSpec& spec, std::size_t n) {
    if (static_cast<int>(n) != spec.real_dim())
        throw UsageError("ambient vector has " + std::to_string(n) + " components, expected " +
                         std::to_string(spec.real_dim()));
}

template <class T>
T norm_sq(std::span<const T> z) {
    T s = z[0] * z[0];
    for (std::size_t i = 1; i < z.size(); ++i) s += z[i] * z[i];
    return s;
}

template <class T>
std::vector<T> metric(const AmbientSpec& spec, std::span<const T> z, const T& zero) {
    const int m = spec.complex_dim, d = spec.real_dim();
    std::vector<T> g(d * d, zero);
    if (spec.is_flat()) {
        for (int i = 0; i < d; ++i) g[i * d + i] += 1.0;
        return g;
    }
    const double rho = spec.rho;
    const T s = 1.0 + rho * norm_sq(z);
    const T inv = 1.0 / s;
    const T c = -rho * inv * inv;
    for (int j = 0; j < m; ++j) {
        const T& xj = z[2 * j];
        const T& yj = z[2 * j + 1];
        for (int k = 0; k < m; ++k) {
            const T& xk = z[2 * k];
            const T& yk = z[2 * k + 1];
            T P = c * (xj * xk + yj * yk);
            if (j == k) P += inv;
            const T Q = c * (xj * yk - yj * xk);
            g[(2 * j) * d + 2 * k] = P;
            g[(2 * j + 1) * d + 2 * k + 1] = P;
            g[(2 * j) * d + 2 * k + 1] = Q;
            g[(2 * j + 1) * d + 2 * k] = -Q;
        }
    }
    return g;
}

// Gamma(xi, eta) = -(rho / s) (<zbar, xi> eta + <zbar, eta> xi), complex form.
template <class T>
std::vector<T> connection(const AmbientSpec& spec, std::span<const T> z, std::span<const T> xi,
                          std::span<const T> eta, const T& zero) {
    const int m = spec.complex_dim;
    std::vector<T> out(spec.real_dim(), zero);
    if (spec.is_flat()) return out;
    const T s = 1.0 + spec.rho * norm_sq(z);
    const T f = -spec.rho / s;
    T ar = zero, ai = zero, br = zero, bi = zero;
    for (int l = 0; l < m; ++l) {
        const T& x = z[2 * l];
        const T& y = z[2 * l + 1];
        ar += x * xi[2 * l] + y * xi[2 * l + 1];
        ai += x * xi[2 * l + 1] - y * xi[2 * l];
        br += x * eta[2 * l] + y * eta[2 * l + 1];
        bi += x * eta[2 * l + 1] - y * eta[2 * l];
    }
    ar *= f;
    ai *= f;
    br *= f;
    bi *= f;
    for (int k = 0; k < m; ++k) {
        const T& er = eta[2 * k];
        const T& ei = eta[2 * k + 1];
        const T& xr = xi[2 * k];
        const T& xim = xi[2 * k + 1];
        out[2 * k] = ar * er - ai * ei + br * xr - bi * xim;
        out[2 * k + 1] = ar * ei + ai * er + br * xim + bi * xr;
    }
    return out;
}

} // namespace

void check_chart(const AmbientSpec& spec, std::span<const double> z) {
    check_length(spec, z.size());
    if (spec.is_flat() || spec.rho > 0.0) return;
    const double t = spec.rho * norm_sq(z);
    if (t <= -1.0 + kChartMargin)
        throw DomainError("point outside the chart of space_form(" + std::to_string(spec.rho) +
                          "): rho|z|^2 = " + std::to_string(t));
}

std::vector<Jet> ambient_metric(const AmbientSpec& spec, std::span<const Jet> z) {
    check_length(spec, z.size());
    return metric(spec, z, Jet::constant(z[0].dim(), z[0].order(), 0.0));
}

Eigen::MatrixXd ambient_metric(const AmbientSpec& spec, std::span<const double> z) {
    check_length(spec, z.size());
    const int d = spec.real_dim();
    const auto g = metric(spec, z, 0.0);
    return Eigen::Map<const Eigen::MatrixXd>(g.data(), d, d).transpose();
}

Eigen::MatrixXd ambient_J(const AmbientSpec& spec) {
    const int d = spec.real_dim();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < spec.complex_dim; ++k) {
        J(2 * k + 1, 2 * k) = 1.0;
        J(2 * k, 2 * k + 1) = -1.0;
    }
    return J;
}

std::vector<Jet> apply_J(std::span<const Jet> v) {
    std::vector<Jet> out(v.size());
    for (std::size_t k = 0; k + 1 < v.size(); k += 2) {
        out[k] = -v[k + 1];
        out[k + 1] = v[k];
    }
    return out;
}

Eigen::VectorXd apply_J(const Eigen::VectorXd& v) {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index k = 0; k + 1 < v.size(); k += 2) {
        out[k] = -v[k + 1];
        out[k + 1] = v[k];
    }
    return out;
}

std::vector<Jet> ambient_connection(const AmbientSpec& spec, std::span<const Jet> z, std::span<const Jet> xi,
                                    std::span<const Jet> eta) {
    check_length(spec, z.size());
    check_length(spec, xi.size());
    check_length(spec, eta.size());
    return connection(spec, z, xi, eta, Jet::constant(z[0].dim(), z[0].order(), 0.0));
}

std::vector<double> ambient_christoffel(const AmbientSpec& spec, std::span<const double> z) {
    check_length(spec, z.size());
    const int d = spec.real_dim();
    std::vector<double> gamma(d * d * d, 0.0);
    std::vector<double> eb(d, 0.0), ec(d, 0.0);
    for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) {
            std::fill(eb.begin(), eb.end(), 0.0);
            std::fill(ec.begin(), ec.end(), 0.0);
            eb[b] = 1.0;
            ec[c] = 1.0;
            const auto v = connection<double>(spec, z, eb, ec, 0.0);
            for (int a = 0; a < d; ++a) gamma[(a * d + b) * d + c] = v[a];
        }
    return gamma;
}

double ambient_curvature(const AmbientSpec& spec, std::span<const double> z, const Eigen::VectorXd& X,
                         const Eigen::VectorXd& Y, const Eigen::VectorXd& Z, const Eigen::VectorXd& W) {
    if (spec.is_flat()) return 0.0;
    const Eigen::MatrixXd g = ambient_metric(spec, z);
    auto ip = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(g * b); };
    const Eigen::VectorXd JX = apply_J(X), JY = apply_J(Y), JZ = apply_J(Z);
    return spec.rho * (ip(Y, Z) * ip(X, W) - ip(X, Z) * ip(Y, W) + ip(JY, Z) * ip(JX, W) - ip(JX, Z) * ip(JY, W) +
                       2.0 * ip(X, JY) * ip(JZ, W));
}

double einstein_constant(const AmbientSpec& spec) {
    return spec.is_flat() ? 0.0 : 2.0 * (spec.complex_dim + 1) * spec.rho;
}

} // namespace kangle
