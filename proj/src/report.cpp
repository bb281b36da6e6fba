#include "kangle/report.hpp"

#include <cmath>

namespace kangle {

namespace {

Json matrix(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json conventions(const Conventions& c) { return {{"s_laplacian", c.laplacian}, {"s_codifferential", c.codifferential}}; }

Json ambient(const AmbientSpec& a) {
    Json j{{"kind", a.is_flat() ? "flat" : "space_form"}, {"complex_dim", a.complex_dim}};
    if (!a.is_flat()) j["rho"] = a.rho;
    return j;
}

} // namespace

Json to_json(const IdentityResidual& r) {
    Json j{{"id", r.id}, {"applicable", r.applicable}};
    if (!r.applicable) {
        j["reason"] = r.reason;
        return j;
    }
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["abs_residual"] = r.abs_residual;
    j["rel_residual"] = r.rel_residual;
    j["scale"] = r.scale;
    j["tolerance"] = {{"abs", r.tolerance.abs}, {"rel", r.tolerance.rel}};
    j["diagnostic"] = r.diagnostic;
    j["pass"] = r.pass;
    return j;
}

Json to_json(const IntegralCheck& c) {
    if (!c.error.empty()) return {{"check", c.check}, {"grid", c.grid}, {"error", c.error}, {"pass", false}};
    return {{"check", c.check},
            {"grid", c.grid},
            {"coarse_grid", c.coarse_grid},
            {"lhs", c.lhs},
            {"rhs", c.rhs},
            {"abs_residual", c.abs_residual},
            {"rel_residual", c.rel_residual},
            {"scale", c.scale},
            {"coarse_error", c.coarse_error},
            {"convergence_ratio", std::isfinite(c.ratio) ? Json(c.ratio) : Json(nullptr)},  // null: exact at N
            {"converged", c.converged},
            {"pass", c.pass}};
}

Json to_json(const ConventionHeader& h) {
    Json tried = Json::array();
    for (const auto& [c, worst] : h.tried) {
        Json t = conventions(c);
        t["worst_rel_residual"] = worst;
        tried.push_back(std::move(t));
    }
    Json j = conventions(h.conventions);
    j["two_form_norm"] = h.two_form_norm;
    j["calibrated"] = h.calibrated;
    j["calibration_entry"] = h.calibration_entry;
    j["tried"] = std::move(tried);
    return j;
}

Json to_json(const EntryReport& e) {
    Json j{{"name", e.name},
           {"ambient", e.ambient},
           {"points_requested", e.points_requested},
           {"points_sampled", e.points_sampled}};

    Json skipped = Json::array();
    for (const auto& [idx, why] : e.skipped) skipped.push_back({{"point_index", idx}, {"reason", why}});
    j["skipped"] = std::move(skipped);

    j["classification"] = Json::object();
    for (const auto& [cls, count] : e.classification) j["classification"][cls] = count;
    j["angles"] = {{"cos_min", e.cos_min}, {"cos_max", e.cos_max}, {"cos_mean", e.cos_mean},
                   {"max_spread", e.max_spread}};
    if (!e.equal_angle_gate.empty()) {
        j["equal_angle_gate"] = e.equal_angle_gate;
        j["gate_counterexamples"] = e.gate_counterexamples;
    }

    Json checks = Json::array();
    for (const auto& c : e.self_checks)
        checks.push_back({{"property", c.property}, {"passed", c.passed}, {"failed", c.failed},
                          {"worst_deviation", c.worst_deviation}});
    j["self_checks"] = std::move(checks);

    Json records = Json::array();
    for (const auto& row : e.records) {
        Json r{{"entry", row.entry}, {"point_index", row.point_index}, {"point", row.point}};
        r.update(to_json(row.residual));
        records.push_back(std::move(r));
    }
    j["records"] = std::move(records);

    Json na = Json::array();
    for (const auto& s : e.not_applicable) na.push_back({{"id", s.id}, {"reason", s.reason}, {"count", s.count}});
    j["not_applicable"] = std::move(na);

    j["diagnostics"] = Json::object();
    for (const auto& [name, range] : e.diagnostics)
        j["diagnostics"][name] = {{"min", range.min}, {"max", range.max}, {"count", range.count}};

    Json quad = Json::array();
    for (const auto& c : e.quadrature) quad.push_back(to_json(c));
    j["quadrature"] = std::move(quad);
    j["failed"] = e.failed;
    j["pass"] = e.failed == 0;
    return j;
}

Json to_json(const RunReport& r) {
    const RunOptions& o = r.options;
    Json j{{"schema", kReportSchema}, {"tool", "kangle"}, {"version", r.version}};
    j["conventions"] = to_json(r.header);
    j["options"] = {{"entries", o.entries},
                    {"suites", o.suites},
                    {"points", o.points},
                    {"seed", o.seed},
                    {"tolerance", {{"abs", o.tolerance.abs}, {"rel", o.tolerance.rel}}},
                    {"order", o.order},
                    {"ambient", o.ambient ? Json(*o.ambient) : Json(nullptr)},
                    {"quadrature_grid", o.quadrature_grid}};
    Json entries = Json::array();
    for (const auto& e : r.entries) entries.push_back(to_json(e));
    j["entries"] = std::move(entries);
    j["seconds"] = r.seconds;
    j["failed"] = r.failed;
    j["pass"] = r.pass();
    return j;
}

Json snapshot_to_json(const Snapshot& s) {
    Json j{{"schema", kReportSchema},
           {"n", s.n},
           {"order", s.order},
           {"ambient", ambient(s.ambient)},
           {"conventions", conventions(s.conventions)},
           {"point", s.point},
           {"F", vector(s.Fp)},
           {"metric", matrix(s.gp)},
           {"pullback_form", matrix(s.omegap)},
           {"cos_angles", s.cos_angles},
           {"classification", to_string(s.cls)},
           {"equal_angles", s.equal_angles},
           {"angle_spread", s.angle_spread}};
    if (s.signed_cos) j["signed_cos"] = *s.signed_cos;
    j["mean_curvature"] = vector(s.Hp);
    j["mean_curvature_norm"] = std::sqrt(s.Hp.dot(s.Gp * s.Hp));
    j["jh_tangent"] = vector(s.jhp);
    j["warnings"] = s.warnings;
    return j;
}

Json catalog_to_json() {
    Json list = Json::array();
    for (const auto& e : builtin_catalog()) {
        list.push_back({{"name", e.name},
                        {"description", e.description},
                        {"n", e.spec.n},
                        {"ambient", ambient(e.spec.ambient)},
                        {"periodic", e.periodic()},
                        {"calibration", e.calibration},
                        {"lo", e.lo},
                        {"hi", e.hi},
                        {"immersion", e.text}});
    }
    return list;
}

} // namespace kangle
