#pragma once

// Residual evaluators for the angle identities. Every evaluator is a pure
// function of a Snapshot and returns records that say whether the identity
// applies at the point and, if so, how well both sides agree.
//
// Identity ids (stable, used by the CLI --suite flag):
//   prop3.1.{a_norm, b_nabla_form, c_delta_form, d_delta_norm, e_delta_J, f_grad_sin2, g_ratio}
//   lemma3.1.{i, ii, iii, iv}
//   delta_kappa.{prop3.2, prop3.3, cor3.2}
//   eq2.2.{weitzenboeck, S_isotropic}
//   prop3.4.{full, eq3.3, eq3.4}
//   section4.{eq4.1, cor1.1}
//   prop3.6.{sigma_trace, d_sigma, sigma_reduced, constant_angle, parallel_sigma}
//   cor2.1.closed
//   gauss.equation
//   remark1.{phi_xi, normal_angles}

#include "kangle/geometry.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace kangle {

struct ResidualTolerance {
    double abs = 1e-7;
    double rel = 1e-5;
};

struct IdentityResidual {
    std::string id;
    std::vector<double> lhs, rhs;
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    double scale = 0.0;             // magnitude of the largest term
    bool applicable = false;
    std::string reason;             // gating reason when not applicable
    ResidualTolerance tolerance;
    bool pass = false;
    bool diagnostic = false;        // reported value, not an equality
};

/// Builds a record; pass iff applicable and (abs <= tol.abs or rel <= tol.rel).
IdentityResidual make_residual(std::string id, std::vector<double> lhs, std::vector<double> rhs, double scale,
                               const ResidualTolerance& tol);
IdentityResidual not_applicable(std::string id, std::string reason, const ResidualTolerance& tol);

std::vector<IdentityResidual> verify_prop3_1(const Snapshot& s, const ResidualTolerance& tol = {});
std::vector<IdentityResidual> verify_lemma3_1(const Snapshot& s, const ResidualTolerance& tol = {});
std::vector<IdentityResidual> verify_delta_kappa(const Snapshot& s, const ResidualTolerance& tol = {});
std::vector<IdentityResidual> verify_weitzenboeck(const Snapshot& s, const ResidualTolerance& tol = {});
std::vector<IdentityResidual> verify_prop3_4(const Snapshot& s, const ResidualTolerance& tol = {});
std::vector<IdentityResidual> verify_section4(const Snapshot& s, const ResidualTolerance& tol = {});
std::vector<IdentityResidual> verify_prop3_6(const Snapshot& s, const ResidualTolerance& tol = {});
std::vector<IdentityResidual> verify_gauss(const Snapshot& s, const ResidualTolerance& tol = {});
std::vector<IdentityResidual> verify_remark1(const Snapshot& s, const ResidualTolerance& tol = {});

/// Suite names accepted by run_identities: the prefixes above, or "all".
const std::vector<std::string>& suite_names();
std::vector<IdentityResidual> run_identities(const Snapshot& s, const std::vector<std::string>& suites,
                                             const ResidualTolerance& tol = {});

struct HypothesisField {
    std::string name;
    double value = 0.0;
    bool applicable = false;
    std::string reason;
};
std::vector<HypothesisField> evaluate_hypothesis_fields(const Snapshot& s);

/// ||H||^2 + (sin^2 / 4n) R, the defect of the relation between mean
/// curvature, angle and scalar curvature.
/// Generic over the number type so it can be checked in exact arithmetic.
template <class T>
T mean_curvature_defect(int n, const T& sin2, const T& R, const T& H2) {
    return H2 + sin2 / T(4 * n) * R;
}

// ----- gates -----

/// Angles constant to second order: gradient and Hessian of cos^2 vanish.
bool constant_angle_gate(const Snapshot& s, double tol = 1e-7);
/// F*omega vanishes with all its jet coefficients (Lagrangian to jet order).
bool lagrangian_jet_gate(const Snapshot& s, double tol = 1e-10);
/// Normal derivative of H vanishes at the point.
bool parallel_mean_curvature_gate(const Snapshot& s, double tol = 1e-9);

// ----- sign calibration -----

struct CalibrationResult {
    Conventions conventions;
    std::vector<std::pair<Conventions, double>> tried; // assignment, worst relative residual
};
/// Tries the four (s_Delta, s_delta) assignments on the n = 1 identity for
/// Delta kappa at the given points. Throws ConventionError unless exactly
/// one closes.
CalibrationResult calibrate_conventions(const ImmersionSpec& spec, const std::vector<std::vector<double>>& points,
                                        double rel_tol = 1e-5);

} // namespace kangle
