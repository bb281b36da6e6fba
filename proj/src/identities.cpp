#include "kangle/identities.hpp"

#include "kangle/ambient.hpp"
#include "kangle/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace kangle {

namespace {

using cd = std::complex<double>;
const cd I(0.0, 1.0);

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> flat(const Eigen::MatrixXd& m) {
    std::vector<double> out;
    out.reserve(m.size());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

std::vector<double> flat(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Scale of a set of terms: the largest magnitude among them.
double scale_of(std::initializer_list<double> terms) {
    double m = 0.0;
    for (double t : terms) m = std::max(m, std::abs(t));
    return m;
}

Eigen::VectorXcd complexify(const Eigen::VectorXd& v) { return v.cast<cd>(); }

double ip(const Snapshot& s, const Eigen::VectorXd& U, const Eigen::VectorXd& V) { return U.dot(s.Gp * V); }
double ip_domain(const Snapshot& s, const Eigen::VectorXd& X, const Eigen::VectorXd& Y) { return X.dot(s.gp * Y); }

Eigen::VectorXd grad_values(const Snapshot& s, const Jet& f) { return values(gradient(s, f)); }

// grad cos from the smooth equal-angle cos.
Eigen::VectorXd grad_cos(const Snapshot& s) { return grad_values(s, s.cos); }

// (nabla_Z H) for a complex domain vector Z.
Eigen::VectorXcd nabla_H(const Snapshot& s, const CVec& Z) { return s.nablaH.cast<cd>() * Z; }
Eigen::VectorXcd nabla_perp_H(const Snapshot& s, const CVec& Z) { return s.nablaH_perp.cast<cd>() * Z; }
Eigen::VectorXcd J_dF(const Snapshot& s, const CVec& Z) { return s.JN.cast<cd>() * dF(s, Z); }

double form(const Snapshot& s, const Eigen::VectorXd& X, const Eigen::VectorXd& Y) { return X.dot(s.omegap * Y); }

std::string gate_equal(const Snapshot& s) { return s.equal_angles ? "" : "angles not equal"; }

std::string gate_generic(const Snapshot& s) {
    if (!s.equal_angles) return "angles not equal";
    if (s.near_lagrangian()) return "near Lagrangian point";
    if (s.near_complex()) return "near complex point";
    return "";
}

std::string gate_off_lagrangian(const Snapshot& s) {
    if (!s.equal_angles) return "angles not equal";
    if (s.near_lagrangian() || !s.has_fields) return "near Lagrangian point";
    return "";
}

std::string gate_off_complex(const Snapshot& s) {
    if (!s.equal_angles) return "angles not equal";
    if (s.near_complex()) return "near complex point";
    return "";
}

double R_of(const Snapshot& s) { return einstein_constant(s.ambient); }

// sum_beta i g(H, JdF(beta)) bar beta - i g(H, JdF(bar beta)) beta, a real domain vector.
Eigen::VectorXcd lemma_ii_sum(const Snapshot& s, const ComplexFrame& f) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(s.m);
    const Eigen::VectorXcd H = complexify(s.Hp);
    for (std::size_t b = 0; b < f.Z.size(); ++b) {
        acc += I * g_ambient(s, H, J_dF(s, f.Z[b])) * f.Zb[b];
        acc -= I * g_ambient(s, H, J_dF(s, f.Zb[b])) * f.Z[b];
    }
    return acc;
}

// sum_mu i g(nabla_mu H, JdF(bar mu)) - i g(nabla_{bar mu} H, JdF(mu))
cd nabla_H_sum(const Snapshot& s, const ComplexFrame& f) {
    cd acc = 0.0;
    for (std::size_t u = 0; u < f.Z.size(); ++u) {
        acc += I * g_ambient(s, nabla_H(s, f.Z[u]), J_dF(s, f.Zb[u]));
        acc -= I * g_ambient(s, nabla_H(s, f.Zb[u]), J_dF(s, f.Z[u]));
    }
    return acc;
}

// sum_mu g(nabla-perp_mu H, JdF(bar mu))
cd perp_sum(const Snapshot& s, const ComplexFrame& f) {
    cd acc = 0.0;
    for (std::size_t u = 0; u < f.Z.size(); ++u) acc += g_ambient(s, nabla_perp_H(s, f.Z[u]), J_dF(s, f.Zb[u]));
    return acc;
}

double norm2_H(const Snapshot& s) { return ip(s, s.Hp, s.Hp); }

Eigen::MatrixXd d_jh_flat(const Snapshot& s) { return values(exterior_derivative_1form(s.jh_flat, s.m), s.m, s.m); }

struct DeltaKappaTerms {
    double lap_kappa, curvature_group, h_term, nabla_h_term, div_term, deltaJ_term;
};

DeltaKappaTerms delta_kappa_terms(const Snapshot& s) {
    const int n = s.n;
    const ComplexFrame f = complex_frame(s);
    DeltaKappaTerms t{};
    t.lap_kappa = laplacian(s, kappa_field(s));
    const double c = s.cos.value(), s2 = s.sin2.value();
    const Eigen::VectorXd gc = grad_cos(s);
    const double gc2 = norm2_vector(s, gc);
    t.curvature_group = c * (-2.0 * n * R_of(s) + 32.0 / s2 * isotropic_sum(s, f) + norm2_nabla_J(s) / s2 +
                             8.0 * (n - 1) / (s2 * s2) * gc2);
    // dcos applied to the complex vector of Lemma 3.1 (ii)
    const Eigen::VectorXcd v = lemma_ii_sum(s, f);
    Eigen::VectorXd dcos(s.m);
    for (int i = 0; i < s.m; ++i) dcos[i] = s.cos.d(i);
    t.h_term = -16.0 * n / (s2 * s2) * c * (dcos.cast<cd>().dot(v)).real();
    t.nabla_h_term = 8.0 * n / s2 * nabla_H_sum(s, f).real();

    // div(J_omega(4n jh / sin^2)) and g(delta J_omega, 4n jh / sin^2)
    const int o = s.jh[0].order();
    const JetVec J1 = truncated(s.J_field, o);
    const Jet inv = reciprocal(s.sin2.truncated(o));
    JetVec V(s.m, Jet::constant(s.m, o, 0.0));
    for (int k = 0; k < s.m; ++k) {
        for (int l = 0; l < s.m; ++l) mul_add(V[k], J1[k * s.m + l], s.jh[l]);
        V[k] *= inv;
        V[k] *= 4.0 * n;
    }
    t.div_term = -divergence(s, V).value();
    const Eigen::VectorXd dJ = values(codifferential_endo(s, s.J_field));
    t.deltaJ_term = 4.0 * n / s2 * ip_domain(s, dJ, s.jhp);
    return t;
}

} // namespace

IdentityResidual make_residual(std::string id, std::vector<double> lhs, std::vector<double> rhs, double scale,
                               const ResidualTolerance& tol) {
    IdentityResidual r;
    r.id = std::move(id);
    if (lhs.size() != rhs.size()) throw UsageError("residual sides differ in size for " + r.id);
    double a = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) a = std::max(a, std::abs(lhs[i] - rhs[i]));
    r.scale = std::max({scale, max_abs(lhs), max_abs(rhs)});
    r.abs_residual = a;
    r.rel_residual = r.scale > 0.0 ? a / r.scale : (a > 0.0 ? INFINITY : 0.0);
    r.lhs = std::move(lhs);
    r.rhs = std::move(rhs);
    r.applicable = true;
    r.tolerance = tol;
    r.pass = std::isfinite(a) && (a <= tol.abs || r.rel_residual <= tol.rel);
    return r;
}

IdentityResidual not_applicable(std::string id, std::string reason, const ResidualTolerance& tol) {
    IdentityResidual r;
    r.id = std::move(id);
    r.reason = std::move(reason);
    r.tolerance = tol;
    return r;
}

bool constant_angle_gate(const Snapshot& s, double tol) {
    const JetLayout& L = s.cos2.layout();
    for (int i = 1; i < L.size(); ++i)
        if (std::abs(s.cos2.coeffs()[i]) > tol) return false;
    return true;
}

bool lagrangian_jet_gate(const Snapshot& s, double tol) {
    for (const auto& w : s.omega)
        for (double c : w.coeffs())
            if (std::abs(c) > tol) return false;
    return true;
}

bool parallel_mean_curvature_gate(const Snapshot& s, double tol) { return s.nablaH_perp.cwiseAbs().maxCoeff() <= tol; }

// ----- Prop 3.1 -----

std::vector<IdentityResidual> verify_prop3_1(const Snapshot& s, const ResidualTolerance& tol) {
    std::vector<IdentityResidual> out;
    const int n = s.n;
    const std::string eq = gate_equal(s);
    if (!eq.empty()) {
        for (const char* id : {"prop3.1.a_norm", "prop3.1.b_nabla_form", "prop3.1.c_delta_form", "prop3.1.d_delta_norm",
                               "prop3.1.e_delta_J", "prop3.1.f_grad_sin2", "prop3.1.g_ratio"})
            out.push_back(not_applicable(id, eq, tol));
        return out;
    }
    const double c = s.cos_theta();

    // (a)
    {
        const double lhs = norm2_2form(s, s.omegap), rhs = n * c * c;
        out.push_back(make_residual("prop3.1.a_norm", {lhs}, {rhs}, scale_of({lhs, rhs}), tol));
    }
    const std::string offL = gate_off_lagrangian(s);
    const std::string gen = gate_generic(s);
    Eigen::VectorXd gc;
    if (offL.empty()) gc = grad_cos(s);

    // (b)
    if (!gen.empty()) {
        out.push_back(not_applicable("prop3.1.b_nabla_form", gen, tol));
    } else {
        const double lhs = norm2_nabla_form(s);
        const double t1 = n * norm2_vector(s, gc), t2 = 0.5 * c * c * norm2_nabla_J(s);
        out.push_back(make_residual("prop3.1.b_nabla_form", {lhs}, {t1 + t2}, scale_of({lhs, t1, t2}), tol));
    }

    const Eigen::VectorXd dw = values(codifferential_2form(s, s.omega));
    // (c): delta of the endomorphism and the raised codifferential both equal (n-2) J grad cos
    if (!offL.empty()) {
        out.push_back(not_applicable("prop3.1.c_delta_form", offL, tol));
    } else {
        const Eigen::VectorXd dA = values(codifferential_endo(s, s.A));
        const Eigen::VectorXd dw_sharp = s.ginvp * dw;
        const Eigen::VectorXd rhs = (n - 2) * (s.J_omega * gc);
        std::vector<double> lhs = flat(dA), rr = flat(rhs);
        const std::vector<double> l2 = flat(dw_sharp);
        lhs.insert(lhs.end(), l2.begin(), l2.end());
        rr.insert(rr.end(), rr.begin(), rr.begin() + s.m);
        out.push_back(make_residual("prop3.1.c_delta_form", lhs, rr, 0.0, tol));
    }
    // (d)
    if (!offL.empty()) {
        out.push_back(not_applicable("prop3.1.d_delta_norm", offL, tol));
    } else {
        const double lhs = norm2_covector(s, dw), rhs = (n - 2.0) * (n - 2.0) * norm2_vector(s, gc);
        out.push_back(make_residual("prop3.1.d_delta_norm", {lhs}, {rhs}, 0.0, tol));
    }
    // (e)
    if (!offL.empty()) {
        out.push_back(not_applicable("prop3.1.e_delta_J", offL, tol));
    } else {
        const Eigen::VectorXd lhs = c * values(codifferential_endo(s, s.J_field));
        const Eigen::VectorXd rhs = (n - 1) * (s.J_omega * gc);
        out.push_back(make_residual("prop3.1.e_delta_J", flat(lhs), flat(rhs), 0.0, tol));
    }
    // (f): (1 - n) grad sin^2 = 16 cos Re(i sum_{beta,mu} (h(bar mu, mu, beta) - h(bar mu, beta, mu)) bar beta)
    // with h(a, b, c) = g(nabla dF(a, b), J dF(c)).
    if (!gen.empty()) {
        out.push_back(not_applicable("prop3.1.f_grad_sin2", gen, tol));
    } else {
        const ComplexFrame f = complex_frame(s);
        auto h = [&](const CVec& a, const CVec& b, const CVec& cc) { return g_ambient(s, sff(s, a, b), J_dF(s, cc)); };
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(s.m);
        for (std::size_t b = 0; b < f.Z.size(); ++b)
            for (std::size_t u = 0; u < f.Z.size(); ++u)
                acc += I * (h(f.Zb[u], f.Z[u], f.Z[b]) - h(f.Zb[u], f.Z[b], f.Z[u])) * f.Zb[b];
        const Eigen::VectorXd rhs = 16.0 * c * acc.real();
        const Eigen::VectorXd lhs = (1.0 - n) * grad_values(s, s.sin2);
        out.push_back(make_residual("prop3.1.f_grad_sin2", flat(lhs), flat(rhs), 0.0, tol));
    }
    // (g): reported ratio
    if (!gen.empty()) {
        out.push_back(not_applicable("prop3.1.g_ratio", gen, tol));
    } else {
        const double lhs = norm2_vector(s, grad_values(s, s.sin2));
        const double rhs = c * c * s.sin2.value() * norm2_sff_11(s);
        IdentityResidual r = not_applicable("prop3.1.g_ratio", "", tol);
        r.applicable = true;
        r.diagnostic = true;
        r.lhs = {lhs};
        r.rhs = {rhs};
        r.scale = rhs;
        r.rel_residual = rhs > 0 ? lhs / rhs : (lhs > tol.abs ? INFINITY : 0.0);
        r.abs_residual = lhs;
        r.pass = std::isfinite(r.rel_residual);
        out.push_back(r);
    }
    return out;
}

// ----- Lemma 3.1 -----

std::vector<IdentityResidual> verify_lemma3_1(const Snapshot& s, const ResidualTolerance& tol) {
    std::vector<IdentityResidual> out;
    const int m = s.m, n = s.n;
    const Eigen::MatrixXd JE = s.JN * s.Ep;

    // (i) for coordinate X = d_i, Y = d_j
    {
        Eigen::MatrixXd L(m, m), M1(m, m), M2(m, m);
        double sc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                L(i, j) = ip(s, s.nablaH.col(i), JE.col(j));
                const double a = -ip_domain(s, s.nabla_jh.col(i), Eigen::VectorXd::Unit(m, j));
                const double b = -ip(s, s.Hp, s.JN * s.Bp[i * m + j]);
                M1(i, j) = a + b;
                Eigen::VectorXd BA = Eigen::VectorXd::Zero(s.d);
                for (int k = 0; k < m; ++k) BA += s.Ap(k, j) * s.Bp[i * m + k];
                const double c1 = -ip(s, s.Hp, BA), c2 = ip(s, s.nablaH_perp.col(i), JE.col(j));
                M2(i, j) = c1 + c2;
                sc = std::max({sc, std::abs(L(i, j)), std::abs(a), std::abs(b), std::abs(c1), std::abs(c2)});
            }
        std::vector<double> lhs = flat(L), rhs = flat(M1);
        const std::vector<double> r2 = flat(M2);
        lhs.insert(lhs.end(), lhs.begin(), lhs.begin() + m * m);
        rhs.insert(rhs.end(), r2.begin(), r2.end());
        out.push_back(make_residual("lemma3.1.i", lhs, rhs, sc, tol));
    }

    const ComplexFrame f = complex_frame(s);
    // (ii)
    {
        const std::string gate = gate_off_lagrangian(s);
        if (!gate.empty()) {
            out.push_back(not_applicable("lemma3.1.ii", gate, tol));
        } else {
            const Eigen::VectorXd lhs = 0.5 * (s.J_omega * s.jhp);
            const Eigen::VectorXcd rhs = lemma_ii_sum(s, f);
            std::vector<double> l = flat(lhs), r = flat(Eigen::VectorXd(rhs.real()));
            // the sum must be real
            for (int i = 0; i < m; ++i) {
                l.push_back(0.0);
                r.push_back(rhs[i].imag());
            }
            out.push_back(make_residual("lemma3.1.ii", l, r, 0.0, tol));
        }
    }
    // (iii) chain of four (five off L) expressions
    {
        const std::string eq = gate_equal(s);
        if (!eq.empty()) {
            out.push_back(not_applicable("lemma3.1.iii", eq, tol));
        } else {
            const double T1 = 2.0 * nabla_H_sum(s, f).real();
            cd t2 = 0.0, t3 = 0.0;
            const Eigen::MatrixXd D = d_jh_flat(s);
            for (std::size_t u = 0; u < f.Z.size(); ++u) {
                const Eigen::VectorXcd nj = s.nabla_jh.cast<cd>() * f.Z[u];
                t2 += g_domain(s, nj, f.Zb[u]);
                t3 += cd(f.Z[u].transpose() * D.cast<cd>() * f.Zb[u]);
            }
            const double T2 = 4.0 * t2.imag();
            const double T3 = (-2.0 * I * t3).real();
            const double hterm = -2.0 * n * s.cos_theta() * norm2_H(s), pterm = -4.0 * perp_sum(s, f).imag();
            const double T4 = hterm + pterm;
            std::vector<double> lhs = {T1, T1, T1}, rhs = {T2, T3, T4};
            double sc = scale_of({T1, T2, T3, hterm, pterm});
            if (gate_off_lagrangian(s).empty()) {
                const int o = s.jh[0].order();
                const JetVec J1 = truncated(s.J_field, o);
                JetVec V(m, Jet::constant(m, o, 0.0));
                for (int k = 0; k < m; ++k)
                    for (int l = 0; l < m; ++l) mul_add(V[k], J1[k * m + l], s.jh[l]);
                const double dv = -divergence(s, V).value();
                const double dj = ip_domain(s, s.jhp, values(codifferential_endo(s, s.J_field)));
                lhs.push_back(T1);
                rhs.push_back(dv + dj);
                sc = std::max({sc, std::abs(dv), std::abs(dj)});
            }
            out.push_back(make_residual("lemma3.1.iii", lhs, rhs, sc, tol));
        }
    }
    // (iv) any orthonormal frame
    {
        const double lhs = divergence(s, s.jh).value();
        const double rhs = -4.0 * perp_sum(s, f).real();
        out.push_back(make_residual("lemma3.1.iv", {lhs}, {rhs}, 0.0, tol));
    }
    return out;
}

// ----- Delta kappa -----

std::vector<IdentityResidual> verify_delta_kappa(const Snapshot& s, const ResidualTolerance& tol) {
    std::vector<IdentityResidual> out;
    // The distinct-angle form of the identity is not implemented.
    const std::string gate = s.equal_angles ? gate_generic(s) : "distinct angles: out of scope";
    if (!gate.empty()) {
        out.push_back(not_applicable("delta_kappa.prop3.2", gate, tol));
        out.push_back(not_applicable("delta_kappa.prop3.3", gate, tol));
        out.push_back(not_applicable("delta_kappa.cor3.2", s.n == 1 ? gate : "n != 1", tol));
        return out;
    }
    const DeltaKappaTerms t = delta_kappa_terms(s);
    {
        const double rhs = t.curvature_group + t.h_term + t.nabla_h_term;
        out.push_back(make_residual("delta_kappa.prop3.2", {t.lap_kappa}, {rhs},
                                    scale_of({t.lap_kappa, t.curvature_group, t.h_term, t.nabla_h_term}), tol));
    }
    {
        const double rhs = t.curvature_group + t.div_term + t.deltaJ_term;
        out.push_back(make_residual("delta_kappa.prop3.3", {t.lap_kappa}, {rhs},
                                    scale_of({t.lap_kappa, t.curvature_group, t.div_term, t.deltaJ_term}), tol));
    }
    if (s.n != 1) {
        out.push_back(not_applicable("delta_kappa.cor3.2", "n != 1", tol));
    } else {
        // delta J_omega = nabla J_omega = 0 on surfaces; both enter as extra residual components.
        const Eigen::VectorXd dJ = values(codifferential_endo(s, s.J_field));
        const double nJ = std::sqrt(norm2_nabla_J(s));
        const double rterm = -2.0 * R_of(s) * s.cos.value();
        const double dterm = t.div_term; // -4 div(J_omega(jh / sin^2)) with n = 1
        std::vector<double> lhs = {t.lap_kappa, nJ}, rhs = {rterm + dterm, 0.0};
        for (int i = 0; i < s.m; ++i) {
            lhs.push_back(dJ[i]);
            rhs.push_back(0.0);
        }
        out.push_back(make_residual("delta_kappa.cor3.2", lhs, rhs, scale_of({t.lap_kappa, rterm, dterm}), tol));
    }
    return out;
}

// ----- Weitzenböck -----

std::vector<IdentityResidual> verify_weitzenboeck(const Snapshot& s, const ResidualTolerance& tol) {
    const double half_lap = 0.5 * laplacian(s, s.n * s.cos2);
    const double hodge = inner_2form(s, hodge_laplacian_form(s), s.omegap);
    const double grad = norm2_nabla_form(s);
    const double S = weitzenboeck_S(s);
    std::vector<IdentityResidual> out;
    out.push_back(make_residual("eq2.2.weitzenboeck", {half_lap}, {-hodge + grad + S},
                                scale_of({half_lap, hodge, grad, S}), tol));
    // At equal angles the curvature term reduces to the isotropic sum.
    if (!s.equal_angles || s.near_lagrangian()) {
        out.push_back(not_applicable("eq2.2.S_isotropic", s.equal_angles ? "Lagrangian point" : "angles not equal", tol));
    } else {
        const double iso = 16.0 * s.cos2.value() * isotropic_sum(s, complex_frame(s));
        out.push_back(make_residual("eq2.2.S_isotropic", {S}, {iso}, scale_of({S, iso}), tol));
    }
    return out;
}

// ----- Prop 3.4 -----

std::vector<IdentityResidual> verify_prop3_4(const Snapshot& s, const ResidualTolerance& tol) {
    std::vector<IdentityResidual> out;
    const int n = s.n;
    const std::string gate = gate_generic(s);
    if (!gate.empty()) {
        for (const char* id : {"prop3.4.full", "prop3.4.eq3.3", "prop3.4.eq3.4"}) out.push_back(not_applicable(id, gate, tol));
        return out;
    }
    const double c = s.cos.value(), s2 = s.sin2.value();
    const double lhs = n * laplacian(s, s.cos2);
    const Eigen::VectorXd gc = grad_cos(s);
    const double t_R = -2.0 * n * s2 * c * c * R_of(s);
    const double t_S = 2.0 * weitzenboeck_S(s);
    const double t_grad = 2.0 * norm2_nabla_form(s);
    // ||grad |sin theta| ||^2 = cos^2 ||grad cos||^2 / sin^2
    const double t_sin = 4.0 * (n - 2) * c * c * norm2_vector(s, gc) / s2;
    JetVec Ajh(s.m, Jet::constant(s.m, s.jh[0].order(), 0.0));
    {
        const JetVec A1 = truncated(s.A, s.jh[0].order());
        for (int k = 0; k < s.m; ++k)
            for (int l = 0; l < s.m; ++l) mul_add(Ajh[k], A1[k * s.m + l], s.jh[l]);
    }
    const double t_div = -4.0 * n * divergence(s, Ajh).value();
    const double t_32 = -4.0 * n * (2.0 + (n - 4) * s2) / s2 * ip_domain(s, gc, s.J_omega * s.jhp);
    const double rhs = t_R + t_S + t_grad + t_sin + t_div + t_32;
    out.push_back(make_residual("prop3.4.full", {lhs}, {rhs}, scale_of({lhs, t_R, t_S, t_grad, t_sin, t_div, t_32}), tol));

    if (n == 2) {
        const Eigen::VectorXd glog = grad_values(s, s.sin2) / s2;
        const double alt = 8.0 * form(s, s.jhp, glog);
        out.push_back(make_residual("prop3.4.eq3.3", {t_32}, {alt}, 0.0, tol));
    } else {
        out.push_back(not_applicable("prop3.4.eq3.3", "n != 2", tol));
    }
    if (n >= 3) {
        const Eigen::VectorXd dw = values(codifferential_2form(s, s.omega));
        const double alt = 4.0 * n * (2.0 + (n - 4) * s2) / (s2 * (n - 2)) * dw.dot(s.jhp);
        out.push_back(make_residual("prop3.4.eq3.4", {t_32}, {alt}, 0.0, tol));
    } else {
        out.push_back(not_applicable("prop3.4.eq3.4", "n < 3", tol));
    }
    return out;
}

// ----- Section 4 (n = 2) -----

std::vector<IdentityResidual> verify_section4(const Snapshot& s, const ResidualTolerance& tol) {
    std::vector<IdentityResidual> out;
    if (s.n != 2) {
        out.push_back(not_applicable("section4.eq4.1", "n != 2", tol));
        out.push_back(not_applicable("section4.cor1.1", "n != 2", tol));
        return out;
    }
    const std::string eq = gate_equal(s);
    const double R = R_of(s);
    const double c2 = s.cos2.value();
    // (4.1), away from complex points
    {
        const std::string gate = gate_off_complex(s);
        if (!gate.empty()) {
            out.push_back(not_applicable("section4.eq4.1", gate, tol));
        } else {
            const double s2 = s.sin2.value();
            const double lhs = s2 * c2 * R;
            JetVec Ajh(s.m, Jet::constant(s.m, s.jh[0].order(), 0.0));
            const JetVec A1 = truncated(s.A, s.jh[0].order());
            for (int k = 0; k < s.m; ++k)
                for (int l = 0; l < s.m; ++l) mul_add(Ajh[k], A1[k * s.m + l], s.jh[l]);
            const double t1 = -2.0 * divergence(s, Ajh).value();
            const double t2 = 2.0 * form(s, s.jhp, grad_values(s, s.sin2) / s2);
            out.push_back(make_residual("section4.eq4.1", {lhs}, {t1 + t2}, scale_of({lhs, t1, t2}), tol));
        }
    }
    // Cor 1.1 identity: needs parallel mean curvature
    {
        if (!eq.empty()) {
            out.push_back(not_applicable("section4.cor1.1", eq, tol));
        } else if (!parallel_mean_curvature_gate(s)) {
            out.push_back(not_applicable("section4.cor1.1", "mean curvature not parallel", tol));
        } else {
            const double s2 = s.sin2.value();
            const double a = s2 * s2 * c2 * R, b = 8.0 * s2 * c2 * norm2_H(s);
            const double rhs = 2.0 * form(s, s.jhp, grad_values(s, s.sin2));
            out.push_back(make_residual("section4.cor1.1", {a + b}, {rhs}, scale_of({a, b, rhs}), tol));
        }
    }
    return out;
}

// ----- Prop 3.6 and Cor 2.1 -----

std::vector<IdentityResidual> verify_prop3_6(const Snapshot& s, const ResidualTolerance& tol) {
    std::vector<IdentityResidual> out;
    const int n = s.n;
    const std::string gate = gate_off_complex(s);
    const bool constant = s.equal_angles && constant_angle_gate(s);
    if (!gate.empty()) {
        for (const char* id : {"prop3.6.sigma_trace", "prop3.6.d_sigma", "prop3.6.sigma_reduced"})
            out.push_back(not_applicable(id, gate, tol));
    } else {
        const SigmaData sd = sigma_form(s);
        const Eigen::VectorXd sig = values(sd.sigma);
        out.push_back(make_residual("prop3.6.sigma_trace", flat(sig), flat(sd.trace_form), 0.0, tol));
        out.push_back(make_residual("prop3.6.d_sigma", flat(sd.d_sigma), flat(Eigen::MatrixXd(R_of(s) * s.omegap)),
                                    0.0, tol));
        if (n == 2 || constant) {
            const Eigen::VectorXd red = 2.0 * n / s.sin2.value() * s.jh_flatp;
            out.push_back(make_residual("prop3.6.sigma_reduced", flat(sig), flat(red), 0.0, tol));
        } else {
            out.push_back(not_applicable("prop3.6.sigma_reduced", "n != 2 and angle not constant", tol));
        }
    }

    // Constant-angle equalities
    if (!s.equal_angles) {
        out.push_back(not_applicable("prop3.6.constant_angle", "angles not equal", tol));
    } else if (!constant) {
        out.push_back(not_applicable("prop3.6.constant_angle", "angle not constant", tol));
    } else {
        const ComplexFrame f = complex_frame(s);
        const Eigen::MatrixXd D = d_jh_flat(s);
        double mid = 0.0;
        for (int a = 0; a < n; ++a) mid += 2.0 * s.frame.col(2 * a).dot(D * s.frame.col(2 * a + 1));
        const double c = s.cos_theta();
        const double lhs = R_of(s) * c * s.sin2.value();
        const double h = -4.0 * n * c * norm2_H(s), p = -8.0 * perp_sum(s, f).imag();
        out.push_back(make_residual("prop3.6.constant_angle", {lhs, lhs}, {mid, h + p}, scale_of({lhs, mid, h, p}), tol));
    }

    // Parallel sigma for parallel nonzero mean curvature in a flat ambient with constant angle
    {
        const double hn = std::sqrt(norm2_H(s));
        if (!s.equal_angles || !constant) {
            out.push_back(not_applicable("prop3.6.parallel_sigma", "angle not constant", tol));
        } else if (R_of(s) != 0.0) {
            out.push_back(not_applicable("prop3.6.parallel_sigma", "R != 0", tol));
        } else if (hn <= 1e-9 || !parallel_mean_curvature_gate(s)) {
            out.push_back(not_applicable("prop3.6.parallel_sigma", "mean curvature not parallel and nonzero", tol));
        } else if (!gate.empty()) {
            out.push_back(not_applicable("prop3.6.parallel_sigma", gate, tol));
        } else {
            const SigmaData sd = sigma_form(s);
            // nabla sigma = 0 with sigma != 0; the scale carries ||sigma||
            std::vector<double> lhs = flat(sd.nabla_sigma), rhs(lhs.size(), 0.0);
            IdentityResidual r = make_residual("prop3.6.parallel_sigma", lhs, rhs, 0.0, tol);
            const double sn = std::sqrt(norm2_covector(s, values(sd.sigma)));
            r.scale = sn;
            r.rel_residual = sn > 0 ? r.abs_residual / sn : INFINITY;
            r.pass = sn > 1e-6 && (r.abs_residual <= tol.abs || r.rel_residual <= tol.rel);
            out.push_back(r);
        }
    }

    // Cor 2.1: d((JH)^T)^flat = 0 for Lagrangian immersions
    if (lagrangian_jet_gate(s)) {
        const Eigen::MatrixXd D = d_jh_flat(s);
        double sc = s.nabla_jh.cwiseAbs().maxCoeff();
        out.push_back(make_residual("cor2.1.closed", flat(D), std::vector<double>(D.size(), 0.0), sc, tol));
    } else {
        out.push_back(not_applicable("cor2.1.closed", "not Lagrangian to jet order", tol));
    }
    return out;
}

// ----- Gauss equation -----

std::vector<IdentityResidual> verify_gauss(const Snapshot& s, const ResidualTolerance& tol) {
    const int m = s.m;
    std::vector<double> lhs(s.riemann), rhs(s.riemann.size());
    double sc = 0.0;
    const std::vector<double> z(s.Fp.data(), s.Fp.data() + s.d);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    const double rn = ambient_curvature(s.ambient, z, s.Ep.col(i), s.Ep.col(j), s.Ep.col(k), s.Ep.col(l));
                    const double q1 = ip(s, s.Bp[i * m + l], s.Bp[j * m + k]);
                    const double q2 = ip(s, s.Bp[i * m + k], s.Bp[j * m + l]);
                    rhs[((i * m + j) * m + k) * m + l] = rn + q1 - q2;
                    sc = std::max({sc, std::abs(rn), std::abs(q1), std::abs(q2)});
                }
    return {make_residual("gauss.equation", lhs, rhs, sc, tol)};
}

// ----- Remark 1: Phi, Xi and normal angles -----

std::vector<IdentityResidual> verify_remark1(const Snapshot& s, const ResidualTolerance& tol) {
    std::vector<IdentityResidual> out;
    const NormalData nd = phi_xi_normal(s);
    const int m = s.m;
    // -Xi Phi = Id + A^2 and -Phi Xi = Id + (omega-perp)^2; ||Phi||^2 = ||Xi||^2 = 2 sum sin^2
    {
        const Eigen::MatrixXd XiPhi = -nd.Xi * nd.Phi;
        const Eigen::MatrixXd t1 = Eigen::MatrixXd::Identity(m, m) + s.Ap * s.Ap;
        const Eigen::MatrixXd PhiXi = -nd.Phi * nd.Xi;
        // omega-perp as an operator in the orthonormal normal frame: U -> (J U)^perp
        const Eigen::MatrixXd Wp = nd.omega_perp.transpose();
        const Eigen::MatrixXd t2 = Eigen::MatrixXd::Identity(m, m) + Wp * Wp;
        double sins = 0.0;
        for (double c : s.cos_angles) sins += 1.0 - c * c;
        std::vector<double> lhs = flat(XiPhi), rhs = flat(t1);
        const std::vector<double> a = flat(PhiXi), b = flat(t2);
        lhs.insert(lhs.end(), a.begin(), a.end());
        rhs.insert(rhs.end(), b.begin(), b.end());
        lhs.push_back(nd.phi_norm2);
        rhs.push_back(2.0 * sins);
        lhs.push_back(nd.xi_norm2);
        rhs.push_back(2.0 * sins);
        out.push_back(make_residual("remark1.phi_xi", lhs, rhs, 1.0, tol));
    }
    // normal angles equal tangent angles; for equal angles g(Phi X, Phi Y) = sin^2 g(X, Y)
    {
        std::vector<double> lhs(s.cos_angles.begin(), s.cos_angles.end()), rhs(nd.cos_normal.begin(), nd.cos_normal.end());
        if (s.equal_angles) {
            const Eigen::MatrixXd PtP = nd.Phi.transpose() * nd.Phi;
            const Eigen::MatrixXd want = (1.0 - s.cos_theta() * s.cos_theta()) * s.gp;
            const std::vector<double> a = flat(PtP), b = flat(want);
            lhs.insert(lhs.end(), a.begin(), a.end());
            rhs.insert(rhs.end(), b.begin(), b.end());
        }
        out.push_back(make_residual("remark1.normal_angles", lhs, rhs, 1.0, tol));
    }
    return out;
}

// ----- suites -----

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"prop3.1",  "lemma3.1", "delta_kappa", "eq2.2", "prop3.4",
                                                   "section4", "prop3.6",  "gauss",       "remark1"};
    return names;
}

std::vector<IdentityResidual> run_identities(const Snapshot& s, const std::vector<std::string>& suites,
                                             const ResidualTolerance& tol) {
    auto wanted = [&](const std::string& name) {
        return std::find(suites.begin(), suites.end(), "all") != suites.end() ||
               std::find(suites.begin(), suites.end(), name) != suites.end();
    };
    for (const auto& su : suites)
        if (su != "all" && std::find(suite_names().begin(), suite_names().end(), su) == suite_names().end())
            throw UsageError("unknown suite '" + su + "'");
    std::vector<IdentityResidual> out;
    auto append = [&](std::vector<IdentityResidual> v) {
        for (auto& r : v) out.push_back(std::move(r));
    };
    if (wanted("prop3.1")) append(verify_prop3_1(s, tol));
    if (wanted("lemma3.1")) append(verify_lemma3_1(s, tol));
    if (wanted("delta_kappa")) append(verify_delta_kappa(s, tol));
    if (wanted("eq2.2")) append(verify_weitzenboeck(s, tol));
    if (wanted("prop3.4")) append(verify_prop3_4(s, tol));
    if (wanted("section4")) append(verify_section4(s, tol));
    if (wanted("prop3.6")) append(verify_prop3_6(s, tol));
    if (wanted("gauss")) append(verify_gauss(s, tol));
    if (wanted("remark1")) append(verify_remark1(s, tol));
    return out;
}

// ----- hypothesis fields -----

std::vector<HypothesisField> evaluate_hypothesis_fields(const Snapshot& s) {
    std::vector<HypothesisField> out;
    const int n = s.n;
    const double R = R_of(s);
    auto add = [&](std::string name, double v) { out.push_back({std::move(name), v, true, ""}); };
    auto skip = [&](std::string name, std::string why) { out.push_back({std::move(name), 0.0, false, std::move(why)}); };
    if (!s.equal_angles) {
        for (const char* nm : {"R_form_jh_grad_sin2", "delta_form_jh", "remark2_combined", "mean_curvature_defect",
                               "isotropic_scalar_curvature"})
            skip(nm, "angles not equal");
        return out;
    }
    const Eigen::VectorXd gs2 = grad_values(s, s.sin2);
    const Eigen::VectorXd dw = values(codifferential_2form(s, s.omega));
    add("R_form_jh_grad_sin2", R * form(s, s.jhp, gs2));
    const double djh = dw.dot(s.jhp);
    add("delta_form_jh", djh);
    const double c2 = s.cos2.value(), s2 = s.sin2.value();
    if (n == 2 || gate_off_lagrangian(s).empty()) {
        const double gc2 = n == 2 ? 0.0 : norm2_vector(s, grad_cos(s));
        add("remark2_combined", 4.0 * n * n * c2 * norm2_H(s) + n * s2 * c2 * R - (n - 2.0) * (n - 2.0) * gc2 + 2.0 * n * djh);
    } else {
        skip("remark2_combined", "near Lagrangian point");
    }
    add("mean_curvature_defect", mean_curvature_defect(n, s2, R, norm2_H(s)));
    add("isotropic_scalar_curvature", isotropic_sum(s, complex_frame(s)));
    return out;
}

// ----- calibration -----

CalibrationResult calibrate_conventions(const ImmersionSpec& spec, const std::vector<std::vector<double>>& points,
                                        double rel_tol) {
    if (spec.n != 1) throw UsageError("calibration needs an n = 1 immersion");
    CalibrationResult res;
    int closing = 0;
    for (int sl : {1, -1})
        for (int sd : {1, -1}) {
            GeometryOptions opts;
            opts.conventions = {sl, sd};
            double worst = 0.0;
            int used = 0;
            for (const auto& p : points) {
                const Snapshot s = compute_snapshot(spec, p, opts);
                const auto r = verify_delta_kappa(s, {0.0, rel_tol});
                for (const auto& x : r)
                    if (x.id == "delta_kappa.cor3.2" && x.applicable) {
                        worst = std::max(worst, x.rel_residual);
                        ++used;
                    }
            }
            if (used == 0) throw ConventionError("no calibration point is away from complex and Lagrangian points");
            res.tried.push_back({opts.conventions, worst});
            if (worst <= rel_tol) {
                ++closing;
                res.conventions = opts.conventions;
            }
        }
    if (closing != 1) {
        std::ostringstream os;
        os << closing << " sign assignments close the calibration identity (need exactly one)";
        throw ConventionError(os.str());
    }
    return res;
}

} // namespace kangle
