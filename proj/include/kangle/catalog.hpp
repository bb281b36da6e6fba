#pragma once

// Built-in example immersions. Each entry carries the properties it is
// expected to have; check_expectations asserts them at a snapshot.

#include "kangle/dsl.hpp"
#include "kangle/geometry.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kangle {

struct Expectations {
    std::optional<bool> minimal;
    std::optional<bool> totally_geodesic;
    std::optional<bool> equal_angles;
    std::optional<bool> constant_angle;
    std::optional<PointClass> classification;
    std::optional<double> mean_curvature_norm;
    std::function<double(std::span<const double>)> cos_theta;
    /// Equal angles are a candidate property: measured, never asserted.
    bool equal_angle_candidate = false;
    /// Parallel mean curvature (needed by the n = 2 pinching identity).
    bool parallel_mean_curvature = false;
};

struct CatalogEntry {
    std::string name;
    std::string description;
    std::string text;
    ImmersionSpec spec;
    std::vector<double> lo, hi;   // sampling box
    Expectations expect;
    bool calibration = false;

    bool periodic() const { return spec.periodic; }
};

const std::vector<CatalogEntry>& builtin_catalog();
/// Throws UsageError for unknown names.
const CatalogEntry& catalog_entry(std::string_view name);

/// Same immersion in another ambient of the same complex dimension.
ImmersionSpec with_ambient(const ImmersionSpec& spec, const AmbientSpec& ambient);

struct SelfCheck {
    std::string property;
    bool pass = false;
    double deviation = 0.0;
};
std::vector<SelfCheck> check_expectations(const CatalogEntry& e, const Snapshot& s);

/// cos(theta) printed for the D-S graph, q = cos^2(x+z) + sinh^2(y+w):
/// 2 sqrt(q) / (1 + 4q).
double ds_printed_cos(std::span<const double> p);
/// cos(theta) the D-S map actually has: 2 sqrt(q) / sqrt(1 + 4q).
double ds_realized_cos(std::span<const double> p);

} // namespace kangle
