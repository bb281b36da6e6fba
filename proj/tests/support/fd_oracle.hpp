#pragma once

// Central finite differences with Richardson extrapolation, used as an
// independent oracle for jet derivatives.

#include <cmath>
#include <functional>
#include <vector>

namespace fd {

using Fn = std::function<double(const std::vector<double>&)>;

namespace detail {

struct Stencil {
    std::vector<int> offsets;
    std::vector<double> weights; // already divided by h^k
};

inline Stencil stencil(int k, double h) {
    switch (k) {
    case 0: return {{0}, {1.0}};
    case 1: return {{-1, 1}, {-0.5 / h, 0.5 / h}};
    case 2: return {{-1, 0, 1}, {1 / (h * h), -2 / (h * h), 1 / (h * h)}};
    case 3: {
        const double s = 1 / (2 * h * h * h);
        return {{-2, -1, 1, 2}, {-s, 2 * s, -2 * s, s}};
    }
    default: {
        const double s = 1 / (h * h * h * h);
        return {{-2, -1, 0, 1, 2}, {s, -4 * s, 6 * s, -4 * s, s}};
    }
    }
}

inline double tensor(const Fn& f, std::vector<double>& x, const std::vector<int>& alpha, std::size_t v, double h) {
    if (v == alpha.size()) return f(x);
    const Stencil st = stencil(alpha[v], h);
    const double x0 = x[v];
    double sum = 0.0;
    for (std::size_t i = 0; i < st.offsets.size(); ++i) {
        x[v] = x0 + st.offsets[i] * h;
        sum += st.weights[i] * tensor(f, x, alpha, v + 1, h);
    }
    x[v] = x0;
    return sum;
}

} // namespace detail

/// d^alpha f(x) by nested central differences, three-level Richardson.
inline double partial(const Fn& f, std::vector<double> x, const std::vector<int>& alpha, double h = 0.0) {
    int order = 0;
    for (int a : alpha) order += a;
    if (order == 0) return f(x);
    if (h == 0.0) h = order == 1 ? 1e-3 : order == 2 ? 1e-2 : 2e-2;
    const double d1 = detail::tensor(f, x, alpha, 0, h);
    const double d2 = detail::tensor(f, x, alpha, 0, h / 2);
    const double d3 = detail::tensor(f, x, alpha, 0, h / 4);
    const double r1 = (4 * d2 - d1) / 3;
    const double r2 = (4 * d3 - d2) / 3;
    return (16 * r2 - r1) / 15;
}

/// Halves the step from the default until successive estimates stop
/// converging, and returns the estimate with the smallest change. Used where
/// the default step is too coarse for rapidly varying functions.
inline double partial_adaptive(const Fn& f, const std::vector<double>& x, const std::vector<int>& alpha) {
    int order = 0;
    for (int a : alpha) order += a;
    if (order == 0) return f(x);
    double h = order == 1 ? 1e-3 : order == 2 ? 1e-2 : 2e-2;
    double prev = partial(f, x, alpha, h);
    double best = prev, best_change = INFINITY;
    for (int k = 0; k < 5; ++k) {
        h /= 2;
        const double next = partial(f, x, alpha, h);
        const double change = std::abs(next - prev);
        if (change < best_change) {
            best_change = change;
            best = next;
        } else {
            break;
        }
        prev = next;
    }
    return best;
}

} // namespace fd
