#pragma once

// Ambient Kähler-Einstein data in an affine holomorphic chart.
//
// Space forms use the potential (1/rho) log(1 + rho |z|^2). Real coordinates
// are interleaved, (x1, y1, x2, y2, ...), and J maps (x, y) to (-y, x).

#include "kangle/ambient_spec.hpp"
#include "kangle/jet.hpp"

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace kangle {

/// Distance from the chart boundary below which points are rejected.
inline constexpr double kChartMargin = 1e-6;

/// Throws DomainError when rho |z|^2 <= -1 + margin (negative rho only), or
/// when z has the wrong length.
void check_chart(const AmbientSpec& spec, std::span<const double> z);

/// Real metric as a row-major (2m x 2m) matrix of jets.
std::vector<Jet> ambient_metric(const AmbientSpec& spec, std::span<const Jet> z);
Eigen::MatrixXd ambient_metric(const AmbientSpec& spec, std::span<const double> z);

Eigen::MatrixXd ambient_J(const AmbientSpec& spec);

/// J applied componentwise to a real vector of jets or doubles.
std::vector<Jet> apply_J(std::span<const Jet> v);
Eigen::VectorXd apply_J(const Eigen::VectorXd& v);

/// Christoffel contraction Gamma^a_{bc} xi^b eta^c of the Levi-Civita
/// connection, in closed form.
std::vector<Jet> ambient_connection(const AmbientSpec& spec, std::span<const Jet> z, std::span<const Jet> xi,
                                    std::span<const Jet> eta);

/// Christoffel symbols Gamma^a_{bc} at a point (closed form), index (a, b, c)
/// flattened as (a * d + b) * d + c.
std::vector<double> ambient_christoffel(const AmbientSpec& spec, std::span<const double> z);

/// R(X,Y,Z,W) = g(R(X,Y)Z, W), R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
/// Holomorphic sectional curvature is 4 rho.
double ambient_curvature(const AmbientSpec& spec, std::span<const double> z, const Eigen::VectorXd& X,
                         const Eigen::VectorXd& Y, const Eigen::VectorXd& Z, const Eigen::VectorXd& W);

/// Ricci = R g with R = 2(m + 1) rho, m the complex dimension.
double einstein_constant(const AmbientSpec& spec);

} // namespace kangle
