#pragma once

// JSON serialization of run reports, snapshots and quadrature checks.
// Doubles are written in shortest round-trip form, so parsing a report
// recovers every value bit for bit.

#include "kangle/harness.hpp"

#include "json.hpp"

namespace kangle {

using Json = nlohmann::ordered_json;

Json to_json(const IdentityResidual& r);
Json to_json(const IntegralCheck& c);
Json to_json(const ConventionHeader& h);
Json to_json(const EntryReport& e);
/// Full report. `"schema": kReportSchema` comes first.
Json to_json(const RunReport& r);

/// Pointwise values of a snapshot (no jets).
Json snapshot_to_json(const Snapshot& s);
Json catalog_to_json();

} // namespace kangle
