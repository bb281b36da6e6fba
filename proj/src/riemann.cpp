#include "kangle/riemann.hpp"

#include "kangle/errors.hpp"

#include <cmath>
#include <utility>

namespace kangle {

std::vector<Jet> jet_inverse(const std::vector<Jet>& m, int d) {
    if (static_cast<int>(m.size()) != d * d) throw UsageError("jet_inverse: size mismatch");
    std::vector<Jet> a = m;
    std::vector<Jet> inv(d * d, Jet::constant(m[0].dim(), m[0].order(), 0.0));
    for (int i = 0; i < d; ++i) inv[i * d + i] += 1.0;
    for (int col = 0; col < d; ++col) {
        int piv = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(a[r * d + col].value()) > std::abs(a[piv * d + col].value())) piv = r;
        if (a[piv * d + col].value() == 0.0) throw SingularityError("singular jet matrix", 0.0);
        if (piv != col) {
            for (int c = 0; c < d; ++c) {
                std::swap(a[piv * d + c], a[col * d + c]);
                std::swap(inv[piv * d + c], inv[col * d + c]);
            }
        }
        const Jet p = reciprocal(a[col * d + col]);
        for (int c = 0; c < d; ++c) {
            a[col * d + c] = a[col * d + c] * p;
            inv[col * d + c] = inv[col * d + c] * p;
        }
        for (int r = 0; r < d; ++r) {
            if (r == col) continue;
            const Jet f = a[r * d + col];
            for (int c = 0; c < d; ++c) {
                a[r * d + c] -= f * a[col * d + c];
                inv[r * d + c] -= f * inv[col * d + c];
            }
        }
    }
    return inv;
}

std::vector<Jet> christoffel_from_metric(const std::vector<Jet>& g, int d) {
    const int order = g[0].order();
    if (order < 1) throw UsageError("Christoffel symbols need metric jets of order >= 1");
    std::vector<Jet> lowered;
    std::vector<Jet> ginv;
    {
        std::vector<Jet> gt(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) gt[i] = g[i].truncated(order - 1);
        ginv = jet_inverse(gt, d);
    }
    // dg[(m * d + i) * d + j] = d_m g_ij
    std::vector<Jet> dg(d * d * d);
    for (int m = 0; m < d; ++m)
        for (int i = 0; i < d * d; ++i) dg[m * d * d + i] = g[i].partial(m);
    // Gamma_{m,ij} = 1/2 (d_i g_mj + d_j g_mi - d_m g_ij)
    lowered.resize(d * d * d);
    for (int m = 0; m < d; ++m)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                lowered[(m * d + i) * d + j] =
                    0.5 * (dg[(i * d + m) * d + j] + dg[(j * d + m) * d + i] - dg[(m * d + i) * d + j]);
    std::vector<Jet> gamma(d * d * d, Jet::constant(g[0].dim(), order - 1, 0.0));
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int m = 0; m < d; ++m) mul_add(gamma[(k * d + i) * d + j], ginv[k * d + m], lowered[(m * d + i) * d + j]);
    return gamma;
}

std::vector<double> riemann_from_christoffel(const std::vector<Jet>& gamma, const Eigen::MatrixXd& g, int d) {
    auto G = [&](int l, int i, int j) { return gamma[(l * d + i) * d + j].value(); };
    auto dG = [&](int m, int l, int i, int j) { return gamma[(l * d + i) * d + j].d(m); };
    std::vector<double> up(d * d * d * d); // R^l_{ijk} at ((i*d+j)*d+k)*d+l
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double r = dG(i, l, j, k) - dG(j, l, i, k);
                    for (int m = 0; m < d; ++m) r += G(l, i, m) * G(m, j, k) - G(l, j, m) * G(m, i, k);
                    up[((i * d + j) * d + k) * d + l] = r;
                }
    std::vector<double> R(d * d * d * d, 0.0);
    for (int ijk = 0; ijk < d * d * d; ++ijk)
        for (int w = 0; w < d; ++w) {
            double s = 0.0;
            for (int l = 0; l < d; ++l) s += g(l, w) * up[ijk * d + l];
            R[ijk * d + w] = s;
        }
    return R;
}

Eigen::MatrixXd values(const std::vector<Jet>& m, int rows, int cols) {
    Eigen::MatrixXd out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = m[i * cols + j].value();
    return out;
}

} // namespace kangle
