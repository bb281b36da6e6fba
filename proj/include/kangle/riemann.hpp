#pragma once

// Coordinate Riemannian geometry from metric jets: inverse, Christoffel
// symbols and the curvature tensor. Used for the induced metric of an
// immersion and as an independent check of the ambient closed forms.

#include "kangle/jet.hpp"

#include <Eigen/Dense>
#include <vector>

namespace kangle {

/// Row-major d x d matrix of jets.
std::vector<Jet> jet_inverse(const std::vector<Jet>& m, int d);

/// Gamma^k_{ij} at index (k * d + i) * d + j, one order below g.
std::vector<Jet> christoffel_from_metric(const std::vector<Jet>& g, int d);

/// R_{ijkl} = g(R(d_i, d_j) d_k, d_l) at index ((i * d + j) * d + k) * d + l,
/// from Christoffel jets of order >= 1 and the metric at the point.
std::vector<double> riemann_from_christoffel(const std::vector<Jet>& gamma, const Eigen::MatrixXd& g, int d);

Eigen::MatrixXd values(const std::vector<Jet>& m, int rows, int cols);

} // namespace kangle
