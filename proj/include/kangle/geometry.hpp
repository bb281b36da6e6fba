#pragma once

// Invariants of an immersion F: M^{2n} -> N^{2n} at one domain point.
//
// Index conventions (m = 2n domain dimension, d = 4n ambient real dimension):
//   E[a*m + i]           = d_i F^a
//   g, ginv, omega, A    row-major m x m; omega_ij = F*omega(d_i, d_j),
//                        A^k_i = A[k*m + i] with g(A X, Y) = F*omega(X, Y)
//   gamma[(k*m + i)*m + j] = Gamma^k_ij of the induced metric
//   B[(a*m + i)*m + j]   = second fundamental form component a of (d_i, d_j)
//
// Jets are carried at decreasing orders: F at `order`, first-derivative
// quantities one below, Christoffels and B two below.

#include "kangle/ambient_spec.hpp"
#include "kangle/dsl.hpp"
#include "kangle/jet.hpp"
#include "kangle/riemann.hpp"

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kangle {

using JetVec = std::vector<Jet>;

struct Tolerances {
    double lagrangian = 1e-6;   // cos(theta_1) below this: Lagrangian
    double complex = 1e-6;      // cos(theta_n) above 1 - this: complex
    double equal = 1e-8;        // max spread of the angles for "equal"
    double gate_buffer = 1e-4;  // distance kept from L and C by singular identities
    double pairing = 1e-9;      // singular value pairing slack
};

/// Sign constants relating the operators in the identities to ours. laplacian = +1
/// means Delta f = trace Hess f; codifferential = +1 means
/// delta alpha = -sum_i (nabla_{e_i} alpha)(e_i, ...).
struct Conventions {
    int laplacian = 1;
    int codifferential = 1;
};

enum class PointClass { complex, lagrangian, generic, mixed };
const char* to_string(PointClass c);

struct GeometryOptions {
    int order = 3;
    /// Stop after g, F*omega, Christoffels and cos^2 (quadrature integrands).
    bool intrinsic_only = false;
    Conventions conventions;
    Tolerances tolerances;
};

struct Snapshot {
    int n = 0, m = 0, d = 0, order = 0;
    AmbientSpec ambient;
    Conventions conventions;
    Tolerances tolerances;
    std::vector<double> point;

    // Jets
    JetVec F, E, G;                 // G: ambient metric along F
    JetVec g, ginv, omega, A;
    JetVec gamma, B, H;
    JetVec jh_flat, jh;             // ((JH)^T)^flat and (JH)^T
    Jet cos2;                       // ||F*omega||^2 / n

    // Pointwise values
    Eigen::MatrixXd Gp, Ep, gp, ginvp, omegap, Ap;
    Eigen::VectorXd Fp, Hp, jhp, jh_flatp;
    std::vector<Eigen::VectorXd> Bp; // Bp[i*m + j], ambient vectors
    std::vector<double> riemann;     // R^M_{ijkl}, convention of riemann.hpp
    Eigen::MatrixXd JN;              // ambient complex structure
    Eigen::MatrixXd nablaH;          // column i: ambient covariant derivative of H along d_i
    Eigen::MatrixXd nablaH_perp;     // its normal part
    Eigen::MatrixXd nabla_jh;        // (k, i): (nabla_i (JH)^T)^k

    // Kähler angles
    std::vector<double> cos_angles;  // descending, clamped to [0, 1]
    int rank = 0;
    PointClass cls = PointClass::generic;
    double angle_spread = 0.0;
    bool equal_angles = false;
    std::optional<double> signed_cos; // n = 1 only
    Eigen::MatrixXd J_omega;          // pointwise partial isometry
    Eigen::MatrixXd frame;            // columns X_1, Y_1, X_2, Y_2, ... (g-orthonormal)
    std::vector<std::string> warnings;

    // Smooth fields of the equal-angle case: sin2 everywhere, cos and J_omega
    // away from Lagrangian points (has_fields).
    Jet sin2;
    bool has_fields = false;
    Jet cos;
    JetVec J_field;

    double cos_theta() const { return cos_angles.empty() ? 0.0 : cos_angles.front(); }
    bool near_lagrangian() const { return cos_theta() < tolerances.gate_buffer; }
    bool near_complex() const { return cos_angles.back() > 1.0 - tolerances.gate_buffer; }
};

Snapshot compute_snapshot(const ImmersionSpec& spec, std::span<const double> point, const GeometryOptions& opts = {});

// ----- building blocks (exposed for tests and the identity suites) -----

/// g_M from dF jets and the ambient metric along F. Throws NotAnImmersionError
/// when g_M is not positive definite.
JetVec induced_metric(const JetVec& E, const JetVec& G, int d, int m);
/// F*omega_ij = g(J dF d_i, dF d_j).
JetVec pullback_form(const JetVec& E, const JetVec& G, int d, int m);

struct AngleData {
    std::vector<double> cos;      // descending
    int rank = 0;
    PointClass cls = PointClass::generic;
    double spread = 0.0;
    Eigen::MatrixXd J;            // partial isometry
    Eigen::MatrixXd frame;        // X_1, Y_1, ... with F*omega(X_a, Y_a) = cos_a
};
/// Kähler angles from the skew form in a g-orthonormal frame, paired by SVD.
AngleData kahler_angles(const Eigen::MatrixXd& g, const Eigen::MatrixXd& omega, const Tolerances& tol);

/// cos(theta~) = F*omega(e1, e2) for the oriented frame of the coordinates (n = 1).
double signed_angle_n1(const Eigen::MatrixXd& g, const Eigen::MatrixXd& omega);

// Covariant derivatives on the domain. Results have order
// min(input order - 1, gamma order). Layout: derivative index first.
JetVec nabla_vector(const JetVec& V, const JetVec& gamma, int m);    // [i*m + k]
JetVec nabla_covector(const JetVec& a, const JetVec& gamma, int m);  // [i*m + j]
JetVec nabla_2form(const JetVec& w, const JetVec& gamma, int m);     // [(i*m + j)*m + k]
JetVec nabla_endo(const JetVec& T, const JetVec& gamma, int m);      // [(i*m + k)*m + j] = (nabla_i T)^k_j

/// s_Delta * g^{ij}(d_ij f - Gamma^k_ij d_k f) at the point.
double laplacian(const Snapshot& s, const Jet& f);
/// grad f as a vector field (jets one order below f).
JetVec gradient(const Snapshot& s, const Jet& f);
/// Codifferential of a 2-form: s_delta * (-g^{il} (nabla_i w)_{lj}).
JetVec codifferential_2form(const Snapshot& s, const JetVec& w);
/// Codifferential of an endomorphism field: s_delta * (-g^{il} (nabla_i T)^k_l).
JetVec codifferential_endo(const Snapshot& s, const JetVec& T);
/// div V = -delta(V^flat), i.e. s_delta * nabla_i V^i.
Jet divergence(const Snapshot& s, const JetVec& V);
/// (d alpha)_ij = d_i alpha_j - d_j alpha_i.
JetVec exterior_derivative_1form(const JetVec& a, int m);

// Pointwise norms (Hilbert-Schmidt; 2-forms carry the factor 1/2).
double norm2_vector(const Snapshot& s, const Eigen::VectorXd& v);
double norm2_covector(const Snapshot& s, const Eigen::VectorXd& a);
double norm2_2form(const Snapshot& s, const Eigen::MatrixXd& w);
double inner_2form(const Snapshot& s, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Eigen::VectorXd values(const JetVec& v);
JetVec truncated(const JetVec& v, int order);

/// ||nabla F*omega||^2 at the point.
double norm2_nabla_form(const Snapshot& s);
/// ||nabla J_omega||^2 (full tensor norm); needs the smooth fields.
double norm2_nabla_J(const Snapshot& s);
/// (Delta F*omega)_ij = (d delta F*omega)_ij at the point.
Eigen::MatrixXd hodge_laplacian_form(const Snapshot& s);
/// <S F*omega, F*omega> with the 2-form Weitzenböck operator built from R^M.
double weitzenboeck_S(const Snapshot& s);
/// S applied to a 1-form; equals the Ricci endomorphism (test hook).
Eigen::VectorXd weitzenboeck_S_1form(const Snapshot& s, const Eigen::VectorXd& a);
Eigen::MatrixXd ricci_M(const Snapshot& s);

// ----- complex frames -----

using CVec = Eigen::VectorXcd;

struct ComplexFrame {
    std::vector<CVec> Z;    // Z_a = (X_a - i Y_a) / 2 in domain coordinates
    std::vector<CVec> Zb;   // conjugates
};
ComplexFrame complex_frame(const Snapshot& s);
ComplexFrame complex_frame(const Eigen::MatrixXd& frame);

/// Complex-bilinear evaluations in the domain coordinate basis.
std::complex<double> riemann_M(const Snapshot& s, const CVec& X, const CVec& Y, const CVec& Z, const CVec& W);
Eigen::VectorXcd dF(const Snapshot& s, const CVec& X);
Eigen::VectorXcd sff(const Snapshot& s, const CVec& X, const CVec& Y);
std::complex<double> g_ambient(const Snapshot& s, const Eigen::VectorXcd& U, const Eigen::VectorXcd& V);
std::complex<double> g_domain(const Snapshot& s, const CVec& X, const CVec& Y);

/// Sum over beta, mu of R^M(beta, mu, bar beta, bar mu) in the identities' sign
/// convention (see kIdentityRiemannSign).
double isotropic_sum(const Snapshot& s, const ComplexFrame& f);

/// The identities use R^M with the opposite overall sign to riemann.hpp.
inline constexpr int kIdentityRiemannSign = -1;

// ----- equal-angle fields -----

/// kappa = sum_a log((1 + cos_a) / (1 - cos_a)) as a jet from the smooth
/// equal-angle cos. Throws SingularityError at complex points.
Jet kappa_field(const Snapshot& s);

struct SigmaData {
    JetVec sigma;                  // 1-form jets, order of delta F*omega
    Eigen::VectorXd trace_form;    // -(1/sin^2) trace g(nabla dF(., X), J dF(.))
    Eigen::MatrixXd d_sigma;
    Eigen::MatrixXd nabla_sigma;   // (i, j) = (nabla_i sigma)_j
};
SigmaData sigma_form(const Snapshot& s);

struct NormalData {
    Eigen::MatrixXd basis;         // d x 2n, g-orthonormal basis of the normal space
    Eigen::MatrixXd Phi;           // normal-frame coordinates of Phi(d_i), 2n x m
    Eigen::MatrixXd Xi;            // Xi(U_b) in domain coordinates, m x 2n
    Eigen::MatrixXd omega_perp;    // skew matrix in the normal frame
    Eigen::MatrixXd J_perp;
    std::vector<double> cos_normal;
    double phi_norm2 = 0.0, xi_norm2 = 0.0;
};
NormalData phi_xi_normal(const Snapshot& s);

/// (nabla dF)^{(1,1)} with respect to J_omega, HS norm squared.
double norm2_sff_11(const Snapshot& s);

} // namespace kangle
