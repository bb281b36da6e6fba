#include "kangle/geometry.hpp"

#include "kangle/ambient.hpp"
#include "kangle/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kangle {

namespace {

Jet zero_like(const Jet& j) { return Jet::constant(j.dim(), j.order(), 0.0); }

int min_order(const JetVec& v) {
    int o = kMaxJetOrder;
    for (const auto& j : v) o = std::min(o, j.order());
    return o;
}

// dF columns with the ambient metric: returns row-major (d x m) of G E.
JetVec metric_times(const JetVec& G, const JetVec& E, int d, int m) {
    if (G.empty()) return E;
    JetVec out(d * m, zero_like(E[0]));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const Jet& gab = G[a * d + b];
            if (gab.value() == 0.0 && std::all_of(gab.coeffs().begin(), gab.coeffs().end(), [](double c) { return c == 0.0; }))
                continue;
            for (int i = 0; i < m; ++i) mul_add(out[a * m + i], gab, E[b * m + i]);
        }
    return out;
}

Eigen::MatrixXd g_orthonormal_basis(const Eigen::MatrixXd& g) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    const Eigen::MatrixXd L = llt.matrixL();
    return L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
}

// Gram-Schmidt of the coordinate vectors paired with J: X_1 = e_1, Y_1 = J X_1, ...
Eigen::MatrixXd adapted_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& J) {
    const int m = static_cast<int>(g.rows());
    Eigen::MatrixXd frame(m, 0);
    auto orthogonalize = [&](Eigen::VectorXd v) {
        for (int c = 0; c < frame.cols(); ++c) v -= frame.col(c).dot(g * v) * frame.col(c);
        return v;
    };
    for (int k = 0; k < m && frame.cols() < m; ++k) {
        Eigen::VectorXd v = orthogonalize(Eigen::VectorXd::Unit(m, k));
        const double nv = std::sqrt(v.dot(g * v));
        if (nv < 1e-6) continue;
        v /= nv;
        Eigen::VectorXd w = orthogonalize(J * v);
        w -= v.dot(g * w) * v;
        w /= std::sqrt(w.dot(g * w));
        frame.conservativeResize(m, frame.cols() + 2);
        frame.col(frame.cols() - 2) = v;
        frame.col(frame.cols() - 1) = w;
    }
    if (frame.cols() != m) throw DegeneracyError("could not build a J_omega-adapted frame");
    return frame;
}

} // namespace

const char* to_string(PointClass c) {
    switch (c) {
    case PointClass::complex: return "complex";
    case PointClass::lagrangian: return "lagrangian";
    case PointClass::generic: return "generic";
    case PointClass::mixed: return "mixed";
    }
    return "?";
}

Eigen::VectorXd values(const JetVec& v) {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
    return out;
}

JetVec truncated(const JetVec& v, int order) {
    JetVec out;
    out.reserve(v.size());
    for (const auto& j : v) out.push_back(j.order() == order ? j : j.truncated(order));
    return out;
}

JetVec induced_metric(const JetVec& E, const JetVec& G, int d, int m) {
    const JetVec GE = metric_times(G, E, d, m);
    JetVec g(m * m, zero_like(E[0]));
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            for (int a = 0; a < d; ++a) mul_add(g[i * m + j], E[a * m + i], GE[a * m + j]);
            if (j != i) g[j * m + i] = g[i * m + j];
        }
    Eigen::MatrixXd gp = values(g, m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gp);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 1e-12 * std::max(1.0, hi))) {
        std::ostringstream os;
        os << "dF is rank deficient (smallest eigenvalue of g_M = " << lo << ")";
        throw NotAnImmersionError(os.str());
    }
    return g;
}

JetVec pullback_form(const JetVec& E, const JetVec& G, int d, int m) {
    const JetVec GE = metric_times(G, E, d, m);
    JetVec w(m * m, zero_like(E[0]));
    // (J v)_{2c} = -v_{2c+1}, (J v)_{2c+1} = v_{2c}
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            Jet acc = zero_like(E[0]);
            for (int c = 0; c < d / 2; ++c) {
                acc -= E[(2 * c + 1) * m + i] * GE[(2 * c) * m + j];
                mul_add(acc, E[(2 * c) * m + i], GE[(2 * c + 1) * m + j]);
            }
            w[i * m + j] = acc;
            w[j * m + i] = -acc;
        }
    return w;
}

AngleData kahler_angles(const Eigen::MatrixXd& g, const Eigen::MatrixXd& omega, const Tolerances& tol) {
    const int m = static_cast<int>(g.rows());
    const int n = m / 2;
    const Eigen::MatrixXd P = g_orthonormal_basis(g);
    Eigen::MatrixXd S = P.transpose() * omega * P;
    S = 0.5 * (S - S.transpose());

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
    const Eigen::VectorXd sv = svd.singularValues();
    AngleData out;
    for (int a = 0; a < n; ++a) {
        const double s1 = sv[2 * a], s2 = sv[2 * a + 1];
        if (std::abs(s1 - s2) > tol.pairing * std::max(1.0, s1)) {
            std::ostringstream os;
            os << "singular values of F*omega do not pair: " << s1 << " vs " << s2;
            throw DegeneracyError(os.str());
        }
        out.cos.push_back(std::clamp(0.5 * (s1 + s2), 0.0, 1.0));
    }
    out.spread = out.cos.front() - out.cos.back();
    int lag = 0, cpx = 0;
    for (double c : out.cos) {
        if (c < tol.lagrangian) ++lag;
        if (c > 1.0 - tol.complex) ++cpx;
        if (c >= tol.lagrangian) out.rank += 2;
    }
    if (lag == n) out.cls = PointClass::lagrangian;
    else if (cpx == n) out.cls = PointClass::complex;
    else if (lag + cpx > 0) out.cls = PointClass::mixed;
    else out.cls = PointClass::generic;

    // Invariant planes from the real Schur form of the skew matrix.
    Eigen::RealSchur<Eigen::MatrixXd> schur(S);
    const Eigen::MatrixXd& T = schur.matrixT();
    const Eigen::MatrixXd& Q = schur.matrixU();
    struct Block {
        double c;
        Eigen::VectorXd x, y;
    };
    std::vector<Block> blocks;
    std::vector<Eigen::VectorXd> kernel;
    for (int i = 0; i < m;) {
        if (i + 1 < m && T(i + 1, i) != 0.0) {
            const double t = 0.5 * (T(i, i + 1) - T(i + 1, i));
            Eigen::VectorXd x = Q.col(i), y = Q.col(i + 1);
            if (t < 0) y = -y;
            blocks.push_back({std::abs(t), x, y});
            i += 2;
        } else {
            kernel.push_back(Q.col(i));
            i += 1;
        }
    }
    for (std::size_t k = 0; k + 1 < kernel.size(); k += 2) blocks.push_back({0.0, kernel[k], kernel[k + 1]});
    std::stable_sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) { return a.c > b.c; });
    if (static_cast<int>(blocks.size()) != n) throw DegeneracyError("Schur form of F*omega has an unpaired direction");

    out.frame.resize(m, m);
    out.J = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < n; ++a) {
        const Eigen::VectorXd X = P * blocks[a].x, Y = P * blocks[a].y;
        out.frame.col(2 * a) = X;
        out.frame.col(2 * a + 1) = Y;
        if (out.cos[a] >= tol.lagrangian) {
            // J X = Y, J Y = -X, as coordinate matrix: Y X^flat - X Y^flat
            out.J += Y * (g * X).transpose() - X * (g * Y).transpose();
        }
    }
    return out;
}

double signed_angle_n1(const Eigen::MatrixXd& g, const Eigen::MatrixXd& omega) {
    if (g.rows() != 2) throw UsageError("the signed angle is defined for n = 1 only");
    return omega(0, 1) / std::sqrt(g.determinant());
}

Snapshot compute_snapshot(const ImmersionSpec& spec, std::span<const double> point, const GeometryOptions& opts) {
    if (opts.order < 3 || opts.order > kMaxJetOrder) throw UsageError("snapshot order must be 3 or 4");
    Snapshot s;
    s.n = spec.n;
    s.m = spec.domain_dim();
    s.d = spec.target_dim();
    s.order = opts.order;
    s.ambient = spec.ambient;
    s.conventions = opts.conventions;
    s.tolerances = opts.tolerances;
    s.point.assign(point.begin(), point.end());
    const int m = s.m, d = s.d, n = s.n, k = s.order;

    s.F = eval_components(spec, point, k);
    s.E.resize(d * m);
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < m; ++i) s.E[a * m + i] = s.F[a].partial(i);

    const JetVec F1 = truncated(s.F, k - 1);
    const JetVec F2 = truncated(s.F, k - 2);
    if (!s.ambient.is_flat()) s.G = ambient_metric(s.ambient, F1);

    s.g = induced_metric(s.E, s.G, d, m);
    s.ginv = jet_inverse(s.g, m);
    s.omega = pullback_form(s.E, s.G, d, m);
    s.A.assign(m * m, zero_like(s.g[0]));
    for (int kk = 0; kk < m; ++kk)
        for (int i = 0; i < m; ++i)
            for (int l = 0; l < m; ++l) mul_add(s.A[kk * m + i], s.omega[i * m + l], s.ginv[l * m + kk]);

    s.gamma = christoffel_from_metric(s.g, m);

    // cos^2 = ||F*omega||^2 / n with the 1/2 normalization of 2-forms.
    s.cos2 = zero_like(s.g[0]);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            mul_add(s.cos2, s.A[j * m + i], s.A[i * m + j]);
    s.cos2 *= -0.5 / n;

    if (opts.intrinsic_only) {
        s.Fp = values(s.F);
        s.Ep = values(s.E, d, m);
        s.Gp = s.G.empty() ? Eigen::MatrixXd::Identity(d, d) : values(s.G, d, d);
        s.gp = values(s.g, m, m);
        s.ginvp = values(s.ginv, m, m);
        s.omegap = values(s.omega, m, m);
        s.Ap = values(s.A, m, m);
        return s;
    }

    // Second fundamental form and mean curvature.
    const JetVec E2 = truncated(s.E, k - 2);
    const JetVec ginv2 = truncated(s.ginv, k - 2);
    s.B.assign(d * m * m, Jet::constant(m, k - 2, 0.0));
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            JetVec gN;
            if (!s.ambient.is_flat()) {
                JetVec ei(d), ej(d);
                for (int a = 0; a < d; ++a) {
                    ei[a] = E2[a * m + i];
                    ej[a] = E2[a * m + j];
                }
                gN = ambient_connection(s.ambient, F2, ei, ej);
            }
            for (int a = 0; a < d; ++a) {
                Jet b = s.E[a * m + i].partial(j);
                if (!gN.empty()) b += gN[a];
                for (int l = 0; l < m; ++l) b -= s.gamma[(l * m + i) * m + j] * E2[a * m + l];
                s.B[(a * m + i) * m + j] = b;
                s.B[(a * m + j) * m + i] = b;
            }
        }
    s.H.assign(d, Jet::constant(m, k - 2, 0.0));
    for (int a = 0; a < d; ++a) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) mul_add(s.H[a], ginv2[i * m + j], s.B[(a * m + i) * m + j]);
        s.H[a] /= 2.0 * n;
    }
    {
        const JetVec JH = apply_J(s.H);
        const JetVec G2 = s.G.empty() ? JetVec{} : truncated(s.G, k - 2);
        const JetVec GE = metric_times(G2, E2, d, m);
        s.jh_flat.assign(m, Jet::constant(m, k - 2, 0.0));
        for (int i = 0; i < m; ++i)
            for (int a = 0; a < d; ++a) mul_add(s.jh_flat[i], JH[a], GE[a * m + i]);
        s.jh.assign(m, Jet::constant(m, k - 2, 0.0));
        for (int kk = 0; kk < m; ++kk)
            for (int i = 0; i < m; ++i) mul_add(s.jh[kk], ginv2[kk * m + i], s.jh_flat[i]);
    }

    // Pointwise values.
    s.Fp = values(s.F);
    s.Ep = values(s.E, d, m);
    s.Gp = s.G.empty() ? Eigen::MatrixXd::Identity(d, d) : values(s.G, d, d);
    s.gp = values(s.g, m, m);
    s.ginvp = values(s.ginv, m, m);
    s.omegap = values(s.omega, m, m);
    s.Ap = values(s.A, m, m);
    s.Hp = values(s.H);
    s.jhp = values(s.jh);
    s.jh_flatp = values(s.jh_flat);
    s.JN = ambient_J(s.ambient);
    s.Bp.resize(m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd v(d);
            for (int a = 0; a < d; ++a) v[a] = s.B[(a * m + i) * m + j].value();
            s.Bp[i * m + j] = v;
        }
    s.riemann = riemann_from_christoffel(s.gamma, s.gp, m);

    // Covariant derivatives of H (ambient) and of (JH)^T (domain).
    s.nablaH.resize(d, m);
    {
        std::vector<double> chris;
        if (!s.ambient.is_flat()) chris = ambient_christoffel(s.ambient, std::vector<double>(s.Fp.data(), s.Fp.data() + d));
        for (int i = 0; i < m; ++i)
            for (int a = 0; a < d; ++a) {
                double v = s.H[a].d(i);
                if (!chris.empty())
                    for (int b = 0; b < d; ++b)
                        for (int c = 0; c < d; ++c) v += chris[(a * d + b) * d + c] * s.Ep(b, i) * s.Hp[c];
                s.nablaH(a, i) = v;
            }
        const Eigen::MatrixXd tangential = s.Ep * s.ginvp * s.Ep.transpose() * s.Gp;
        s.nablaH_perp = s.nablaH - tangential * s.nablaH;
        const JetVec njh = nabla_vector(s.jh, s.gamma, m);
        s.nabla_jh.resize(m, m);
        for (int i = 0; i < m; ++i)
            for (int kk = 0; kk < m; ++kk) s.nabla_jh(kk, i) = njh[i * m + kk].value();
    }

    // Kähler angles.
    AngleData ang = kahler_angles(s.gp, s.omegap, s.tolerances);
    s.cos_angles = ang.cos;
    s.rank = ang.rank;
    s.cls = ang.cls;
    s.angle_spread = ang.spread;
    s.equal_angles = ang.spread < s.tolerances.equal;
    if (!s.equal_angles && ang.spread < 10.0 * s.tolerances.equal)
        s.warnings.push_back("Kähler angles nearly equal; J_omega-adapted frame is ambiguous");
    if (n == 1) s.signed_cos = signed_angle_n1(s.gp, s.omegap);

    if (s.equal_angles) s.sin2 = 1.0 - s.cos2;
    if (s.equal_angles && s.cos_theta() >= s.tolerances.lagrangian) {
        s.has_fields = true;
        s.cos = sqrt(s.cos2);
        s.J_field.resize(m * m);
        const Jet inv = reciprocal(s.cos);
        for (int i = 0; i < m * m; ++i) s.J_field[i] = s.A[i] * inv;
        s.J_omega = values(s.J_field, m, m);
        s.frame = adapted_frame(s.gp, s.J_omega);
    } else {
        s.J_omega = ang.J;
        s.frame = ang.frame;
    }
    return s;
}

// ----- covariant derivatives -----

JetVec nabla_vector(const JetVec& V, const JetVec& gamma, int m) {
    const int o = std::min(min_order(V) - 1, min_order(gamma));
    const JetVec Vt = truncated(V, o), Gt = truncated(gamma, o);
    JetVec out(m * m);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            Jet v = V[k].partial(i).truncated(o);
            for (int j = 0; j < m; ++j) mul_add(v, Gt[(k * m + i) * m + j], Vt[j]);
            out[i * m + k] = v;
        }
    return out;
}

JetVec nabla_covector(const JetVec& a, const JetVec& gamma, int m) {
    const int o = std::min(min_order(a) - 1, min_order(gamma));
    const JetVec at = truncated(a, o), Gt = truncated(gamma, o);
    JetVec out(m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            Jet v = a[j].partial(i).truncated(o);
            for (int k = 0; k < m; ++k) v -= Gt[(k * m + i) * m + j] * at[k];
            out[i * m + j] = v;
        }
    return out;
}

JetVec nabla_2form(const JetVec& w, const JetVec& gamma, int m) {
    const int o = std::min(min_order(w) - 1, min_order(gamma));
    const JetVec wt = truncated(w, o), Gt = truncated(gamma, o);
    JetVec out(m * m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                Jet v = w[j * m + k].partial(i).truncated(o);
                for (int l = 0; l < m; ++l) {
                    v -= Gt[(l * m + i) * m + j] * wt[l * m + k];
                    v -= Gt[(l * m + i) * m + k] * wt[j * m + l];
                }
                out[(i * m + j) * m + k] = v;
            }
    return out;
}

JetVec nabla_endo(const JetVec& T, const JetVec& gamma, int m) {
    const int o = std::min(min_order(T) - 1, min_order(gamma));
    const JetVec Tt = truncated(T, o), Gt = truncated(gamma, o);
    JetVec out(m * m * m);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j) {
                Jet v = T[k * m + j].partial(i).truncated(o);
                for (int l = 0; l < m; ++l) {
                    mul_add(v, Gt[(k * m + i) * m + l], Tt[l * m + j]);
                    v -= Gt[(l * m + i) * m + j] * Tt[k * m + l];
                }
                out[(i * m + k) * m + j] = v;
            }
    return out;
}

// ----- operators -----

double laplacian(const Snapshot& s, const Jet& f) {
    if (f.order() < 2) throw UsageError("the Laplacian needs a jet of order >= 2");
    const int m = s.m;
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double h = f.d(i, j);
            for (int k = 0; k < m; ++k) h -= s.gamma[(k * m + i) * m + j].value() * f.d(k);
            acc += s.ginvp(i, j) * h;
        }
    return s.conventions.laplacian * acc;
}

JetVec gradient(const Snapshot& s, const Jet& f) {
    const int m = s.m, o = f.order() - 1;
    const JetVec gi = truncated(s.ginv, std::min(o, s.order - 1));
    JetVec out(m, Jet::constant(m, std::min(o, s.order - 1), 0.0));
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j) mul_add(out[k], gi[k * m + j], f.partial(j).truncated(out[k].order()));
    return out;
}

JetVec codifferential_2form(const Snapshot& s, const JetVec& w) {
    const int m = s.m;
    const JetVec nw = nabla_2form(w, s.gamma, m);
    const int o = min_order(nw);
    const JetVec gi = truncated(s.ginv, o);
    JetVec out(m, Jet::constant(m, o, 0.0));
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i)
            for (int l = 0; l < m; ++l) mul_add(out[j], gi[i * m + l], nw[(i * m + l) * m + j]);
        out[j] *= -static_cast<double>(s.conventions.codifferential);
    }
    return out;
}

JetVec codifferential_endo(const Snapshot& s, const JetVec& T) {
    const int m = s.m;
    const JetVec nT = nabla_endo(T, s.gamma, m);
    const int o = min_order(nT);
    const JetVec gi = truncated(s.ginv, o);
    JetVec out(m, Jet::constant(m, o, 0.0));
    for (int k = 0; k < m; ++k) {
        for (int i = 0; i < m; ++i)
            for (int l = 0; l < m; ++l) mul_add(out[k], gi[i * m + l], nT[(i * m + k) * m + l]);
        out[k] *= -static_cast<double>(s.conventions.codifferential);
    }
    return out;
}

Jet divergence(const Snapshot& s, const JetVec& V) {
    const JetVec nV = nabla_vector(V, s.gamma, s.m);
    Jet acc = zero_like(nV[0]);
    for (int i = 0; i < s.m; ++i) acc += nV[i * s.m + i];
    return acc * static_cast<double>(s.conventions.codifferential);
}

JetVec exterior_derivative_1form(const JetVec& a, int m) {
    const int o = min_order(a) - 1;
    JetVec out(m * m, Jet::constant(m, o, 0.0));
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            out[i * m + j] = a[j].partial(i).truncated(o) - a[i].partial(j).truncated(o);
            out[j * m + i] = -out[i * m + j];
        }
    return out;
}

double norm2_vector(const Snapshot& s, const Eigen::VectorXd& v) { return v.dot(s.gp * v); }
double norm2_covector(const Snapshot& s, const Eigen::VectorXd& a) { return a.dot(s.ginvp * a); }

double inner_2form(const Snapshot& s, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return 0.5 * (s.ginvp * a * s.ginvp * b.transpose()).trace();
}
double norm2_2form(const Snapshot& s, const Eigen::MatrixXd& w) { return inner_2form(s, w, w); }

double norm2_nabla_form(const Snapshot& s) {
    const int m = s.m;
    const JetVec nw = nabla_2form(s.omega, s.gamma, m);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        Eigen::MatrixXd Ti(m, m);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) Ti(j, k) = nw[(i * m + j) * m + k].value();
        for (int p = 0; p < m; ++p) {
            if (s.ginvp(i, p) == 0.0) continue;
            Eigen::MatrixXd Tp(m, m);
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) Tp(j, k) = nw[(p * m + j) * m + k].value();
            acc += s.ginvp(i, p) * 0.5 * (s.ginvp * Ti * s.ginvp * Tp.transpose()).trace();
        }
    }
    return acc;
}

double norm2_nabla_J(const Snapshot& s) {
    if (!s.has_fields) throw DomainError("J_omega is not a smooth field at this point");
    const int m = s.m;
    const JetVec nJ = nabla_endo(s.J_field, s.gamma, m);
    auto slice = [&](int i) {
        Eigen::MatrixXd T(m, m);
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j) T(k, j) = nJ[(i * m + k) * m + j].value();
        return T;
    };
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < m; ++p) {
            const Eigen::MatrixXd Ti = slice(i), Tp = slice(p);
            // g_kl T^k_j T^l_q g^{jq}
            acc += s.ginvp(i, p) * (Ti.transpose() * s.gp * Tp * s.ginvp).trace();
        }
    return acc;
}

Eigen::MatrixXd hodge_laplacian_form(const Snapshot& s) {
    const JetVec dw = codifferential_2form(s, s.omega);
    return values(exterior_derivative_1form(dw, s.m), s.m, s.m);
}

namespace {

// Curvature and a 2-form in the g-orthonormal frame s.frame.
std::vector<double> frame_riemann(const Snapshot& s) {
    const int m = s.m;
    const Eigen::MatrixXd& P = s.frame;
    std::vector<double> cur = s.riemann, next(cur.size());
    // Contract one index at a time.
    for (int slot = 0; slot < 4; ++slot) {
        std::fill(next.begin(), next.end(), 0.0);
        int stride = 1;
        for (int t = slot + 1; t < 4; ++t) stride *= m;
        for (int idx = 0; idx < static_cast<int>(cur.size()); ++idx) {
            const int c = (idx / stride) % m;
            const int base = idx - c * stride;
            for (int a = 0; a < m; ++a) next[base + a * stride] += P(c, a) * cur[idx];
        }
        std::swap(cur, next);
    }
    return cur;
}

} // namespace

double weitzenboeck_S(const Snapshot& s) {
    const int m = s.m;
    const std::vector<double> R = frame_riemann(s);
    auto r = [&](int a, int b, int c, int d) { return R[((a * m + b) * m + c) * m + d]; };
    const Eigen::MatrixXd w = s.frame.transpose() * s.omegap * s.frame;
    // (R(e_a, e_b) w)_{cd} = -sum_f R_abcf w_fd - sum_f R_abdf w_cf
    auto Rw = [&](int a, int b, int c, int d) {
        double v = 0.0;
        for (int f = 0; f < m; ++f) v -= r(a, b, c, f) * w(f, d) + r(a, b, d, f) * w(c, f);
        return v;
    };
    Eigen::MatrixXd Sw = Eigen::MatrixXd::Zero(m, m);
    for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d)
            for (int b = 0; b < m; ++b) Sw(c, d) -= Rw(c, b, b, d) - Rw(d, b, b, c);
    return 0.5 * (Sw.array() * w.array()).sum();
}

Eigen::VectorXd weitzenboeck_S_1form(const Snapshot& s, const Eigen::VectorXd& alpha) {
    const int m = s.m;
    const std::vector<double> R = frame_riemann(s);
    const Eigen::VectorXd af = s.frame.transpose() * alpha;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    // (S a)_c = -sum_b (R(e_c, e_b) a)_b = sum_{b,f} R_cbbf a_f
    for (int c = 0; c < m; ++c)
        for (int b = 0; b < m; ++b)
            for (int f = 0; f < m; ++f) out[c] += R[((c * m + b) * m + b) * m + f] * af[f];
    return s.gp * s.frame * out;
}

Eigen::MatrixXd ricci_M(const Snapshot& s) {
    const int m = s.m;
    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) ric(i, j) += s.ginvp(k, l) * s.riemann[((k * m + i) * m + j) * m + l];
    return ric;
}

// ----- complex frames -----

ComplexFrame complex_frame(const Eigen::MatrixXd& frame) {
    ComplexFrame f;
    const std::complex<double> I(0.0, 1.0);
    for (int a = 0; a + 1 < frame.cols(); a += 2) {
        CVec z = 0.5 * (frame.col(a).cast<std::complex<double>>() - I * frame.col(a + 1).cast<std::complex<double>>());
        f.Zb.push_back(z.conjugate());
        f.Z.push_back(std::move(z));
    }
    return f;
}

ComplexFrame complex_frame(const Snapshot& s) { return complex_frame(s.frame); }

std::complex<double> riemann_M(const Snapshot& s, const CVec& X, const CVec& Y, const CVec& Z, const CVec& W) {
    const int m = s.m;
    std::complex<double> acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const std::complex<double> xy = X[i] * Y[j];
            if (xy == 0.0) continue;
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) acc += xy * Z[k] * W[l] * s.riemann[((i * m + j) * m + k) * m + l];
        }
    return acc;
}

Eigen::VectorXcd dF(const Snapshot& s, const CVec& X) { return s.Ep.cast<std::complex<double>>() * X; }

Eigen::VectorXcd sff(const Snapshot& s, const CVec& X, const CVec& Y) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s.d);
    for (int i = 0; i < s.m; ++i)
        for (int j = 0; j < s.m; ++j) out += (X[i] * Y[j]) * s.Bp[i * s.m + j].cast<std::complex<double>>();
    return out;
}

std::complex<double> g_ambient(const Snapshot& s, const Eigen::VectorXcd& U, const Eigen::VectorXcd& V) {
    return U.transpose() * s.Gp.cast<std::complex<double>>() * V;
}

std::complex<double> g_domain(const Snapshot& s, const CVec& X, const CVec& Y) {
    return X.transpose() * s.gp.cast<std::complex<double>>() * Y;
}

double isotropic_sum(const Snapshot& s, const ComplexFrame& f) {
    std::complex<double> acc = 0.0;
    for (std::size_t b = 0; b < f.Z.size(); ++b)
        for (std::size_t u = 0; u < f.Z.size(); ++u) acc += riemann_M(s, f.Z[b], f.Z[u], f.Zb[b], f.Zb[u]);
    return kIdentityRiemannSign * acc.real();
}

// ----- equal-angle fields -----

Jet kappa_field(const Snapshot& s) {
    if (!s.has_fields) throw DomainError("kappa needs equal Kähler angles away from Lagrangian points");
    const double c = s.cos.value();
    if (c >= 1.0 - s.tolerances.complex) throw SingularityError("kappa is singular at complex points", c);
    return static_cast<double>(s.n) * log((1.0 + s.cos) / (1.0 - s.cos));
}

SigmaData sigma_form(const Snapshot& s) {
    if (!s.equal_angles) throw DomainError("sigma needs equal Kähler angles");
    if (s.sin2.value() < s.tolerances.complex) throw SingularityError("sigma is singular at complex points", s.sin2.value());
    const int m = s.m, n = s.n;
    SigmaData out;
    const JetVec dw = codifferential_2form(s, s.omega);
    const int o = dw[0].order();
    const Jet inv = reciprocal(s.sin2.truncated(o));
    const JetVec jf = truncated(s.jh_flat, o);
    out.sigma.resize(m);
    for (int i = 0; i < m; ++i) out.sigma[i] = (2.0 * n * jf[i] + dw[i]) * inv;
    out.d_sigma = values(exterior_derivative_1form(out.sigma, m), m, m);
    const JetVec ns = nabla_covector(out.sigma, s.gamma, m);
    out.nabla_sigma = values(ns, m, m);

    const Eigen::MatrixXd JE = s.JN * s.Ep;
    out.trace_form = Eigen::VectorXd::Zero(m);
    for (int x = 0; x < m; ++x)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) out.trace_form[x] += s.ginvp(i, j) * s.Bp[i * m + x].dot(s.Gp * JE.col(j));
    out.trace_form /= -s.sin2.value();
    return out;
}

NormalData phi_xi_normal(const Snapshot& s) {
    const int m = s.m, d = s.d;
    NormalData out;
    Eigen::LLT<Eigen::MatrixXd> llt(s.Gp);
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(L.transpose() * s.Ep);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    out.basis = L.transpose().triangularView<Eigen::Upper>().solve(Q.rightCols(d - m));

    const Eigen::MatrixXd JE = s.JN * s.Ep;
    const Eigen::MatrixXd PhiAmb = JE - s.Ep * s.Ap;
    out.Phi = out.basis.transpose() * s.Gp * PhiAmb;
    const Eigen::MatrixXd JU = s.JN * out.basis;
    out.Xi = s.ginvp * s.Ep.transpose() * s.Gp * JU;
    out.omega_perp = JU.transpose() * s.Gp * out.basis;
    out.phi_norm2 = (s.ginvp * out.Phi.transpose() * out.Phi).trace();
    out.xi_norm2 = (out.Xi.transpose() * s.gp * out.Xi).trace();

    AngleData na = kahler_angles(Eigen::MatrixXd::Identity(d - m, d - m), out.omega_perp, s.tolerances);
    out.cos_normal = na.cos;
    out.J_perp = na.J;
    return out;
}

double norm2_sff_11(const Snapshot& s) {
    const int m = s.m;
    const Eigen::MatrixXd& P = s.frame;
    auto Bv = [&](const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(s.d);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) out += X[i] * Y[j] * s.Bp[i * m + j];
        return out;
    };
    double acc = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const Eigen::VectorXd X = P.col(a), Y = P.col(b);
            const Eigen::VectorXd v = 0.5 * (Bv(X, Y) + Bv(s.J_omega * X, s.J_omega * Y));
            acc += v.dot(s.Gp * v);
        }
    return acc;
}

} // namespace kangle
