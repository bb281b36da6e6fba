#pragma once

// Sampling, torus quadrature and suite orchestration over the catalog.

#include "kangle/catalog.hpp"
#include "kangle/identities.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kangle {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

// ----- sampling -----

/// `count` Halton points in the box [lo, hi]. Seed 0 gives the plain
/// sequence (starting at index 1); any other seed applies a seeded
/// Cranley–Patterson rotation.
std::vector<std::vector<double>> halton_points(std::span<const double> lo, std::span<const double> hi, int count,
                                               std::uint64_t seed);

/// Worker count: KANGLE_THREADS if set to a positive integer, else the
/// hardware concurrency.
int worker_count();

/// "flat" or "space_form(RHO)". Throws UsageError otherwise.
AmbientSpec parse_ambient(std::string_view text, int complex_dim);
std::string ambient_name(const AmbientSpec& a);

// ----- torus quadrature -----

enum class Integrand {
    volume,               // 1
    laplacian_cos2,       // Delta cos^2 theta
    laplacian_random,     // Delta f for a seeded random trigonometric f
    hodge_pairing,        // <Delta F*omega, F*omega>
    codifferential_norm,  // ||delta F*omega||^2
};
const char* to_string(Integrand i);

struct TorusIntegrals {
    int grid = 0;
    long long points = 0;
    std::map<Integrand, double> value;      // integral against Vol_M
    std::map<Integrand, double> magnitude;  // integral of |integrand|
};

/// Trapezoidal rule on the uniform N^{2n} grid over [0, 2 pi)^{2n}. Throws
/// UsageError unless the spec is periodic and N >= 8.
TorusIntegrals torus_integrals(const ImmersionSpec& spec, int N, std::uint64_t seed = 1, int threads = 0);
double torus_quadrature(const ImmersionSpec& spec, Integrand what, int N, std::uint64_t seed = 1);

enum class IntegralCheckKind { stokes, eq2_3 };
const char* to_string(IntegralCheckKind k);
/// Throws UsageError for names other than "stokes" and "eq2.3".
IntegralCheckKind parse_integral_check(std::string_view name);

struct IntegralCheck {
    std::string check;
    int grid = 0, coarse_grid = 0;
    double lhs = 0.0, rhs = 0.0;
    double abs_residual = 0.0, rel_residual = 0.0, scale = 0.0;
    double coarse_error = 0.0;   // |lhs - rhs| on the coarse grid
    double ratio = 0.0;          // coarse_error / abs_residual
    bool converged = false;      // ratio > 1e3 or coarse grid already at the noise floor
    bool pass = false;           // abs <= tol_abs or rel <= tol_rel
    std::string error;           // set when a grid point could not be evaluated
};

/// Runs the check at N and N/2 (the coarse grid is at least 4).
IntegralCheck integral_check(const ImmersionSpec& spec, IntegralCheckKind kind, int N, std::uint64_t seed = 1,
                             double tol_abs = 1e-8, double tol_rel = 1e-6);

/// Several checks sharing one pair of grid evaluations.
std::vector<IntegralCheck> integral_checks(const ImmersionSpec& spec, std::span<const IntegralCheckKind> kinds, int N,
                                           std::uint64_t seed = 1, double tol_abs = 1e-8, double tol_rel = 1e-6);

/// Grid used by default for a periodic entry: 64 per axis for n = 1, less
/// for n = 2 where 64^4 points are out of budget.
int default_quadrature_grid(int n);

// ----- suite runs -----

struct RunOptions {
    std::vector<std::string> entries;              // empty: the whole catalog
    std::vector<std::string> suites{"all"};
    int points = 64;
    std::uint64_t seed = 1;
    ResidualTolerance tolerance;
    int order = 3;
    std::optional<std::string> ambient;            // override, e.g. "space_form(-1)"
    int quadrature_grid = 0;                       // 0: skip quadrature
    bool calibrate = true;
    int threads = 0;                               // 0: worker_count()
};

struct RecordRow {
    std::string entry;
    int point_index = 0;
    std::vector<double> point;
    IdentityResidual residual;
};

struct NotApplicableSummary {
    std::string id, reason;
    int count = 0;
};

struct SelfCheckSummary {
    std::string property;
    int passed = 0, failed = 0;
    double worst_deviation = 0.0;
};

struct FieldRange {
    double min = 0.0, max = 0.0;
    int count = 0;
};

struct EntryReport {
    std::string name;
    std::string ambient;
    int points_requested = 0, points_sampled = 0;
    std::vector<std::pair<int, std::string>> skipped;    // point index, reason
    std::map<std::string, int> classification;
    double cos_min = 0.0, cos_max = 0.0, cos_mean = 0.0, max_spread = 0.0;
    std::string equal_angle_gate;                        // "", "passed" or "failed"
    std::vector<std::vector<double>> gate_counterexamples;
    std::vector<SelfCheckSummary> self_checks;
    std::vector<RecordRow> records;                      // applicable records
    std::vector<NotApplicableSummary> not_applicable;
    std::map<std::string, FieldRange> diagnostics;       // hypothesis fields and ratios
    std::vector<IntegralCheck> quadrature;
    int failed = 0;
};

struct ConventionHeader {
    Conventions conventions;
    std::string two_form_norm = "half";                  // <a, b> = 1/2 a_ij b^ij
    std::string calibration_entry;
    std::vector<std::pair<Conventions, double>> tried;
    bool calibrated = false;
};

struct RunReport {
    std::string version = kToolVersion;
    ConventionHeader header;
    RunOptions options;
    std::vector<EntryReport> entries;
    double seconds = 0.0;
    int failed = 0;
    bool pass() const { return failed == 0; }
};

/// Calibrates the sign conventions on the catalog's calibration entry.
/// Throws ConventionError when the calibration is not unique.
ConventionHeader calibrate_header(std::uint64_t seed = 1);

/// Runs the selected suites on catalog entries. Deterministic given the
/// options; records are sorted by (entry, point index, identity id).
RunReport run_suite(const RunOptions& options);
/// Same for a user-supplied immersion, sampled in `box`.
RunReport run_suite(const ImmersionSpec& spec, std::span<const double> lo, std::span<const double> hi,
                    const RunOptions& options);

} // namespace kangle
