#include "cli.hpp"

#include "kangle/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace kangle::cli {

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parse errors carry the file they came from.
struct SourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Target {
    std::string label;
    ImmersionSpec spec;
    std::vector<double> lo, hi;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path + "'");
    return ss.str();
}

ImmersionSpec load_spec(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return parse_immersion(text, path);
    } catch (const ParseError& e) {
        std::string msg = e.what();
        if (const auto colon = msg.find(": "); colon != std::string::npos) msg.erase(0, colon + 2);
        throw SourceError(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + msg);
    }
}

/// Two values: one range for every axis. 4n values: lo1, hi1, lo2, hi2, ...
void apply_box(Target& t, const std::vector<double>& box) {
    const int dim = t.spec.domain_dim();
    if (box.empty()) {
        const double lo = t.spec.periodic ? 0.0 : -1.0, hi = t.spec.periodic ? 2.0 * std::numbers::pi : 1.0;
        t.lo.assign(dim, lo);
        t.hi.assign(dim, hi);
        return;
    }
    if (box.size() == 2) {
        t.lo.assign(dim, box[0]);
        t.hi.assign(dim, box[1]);
    } else if (static_cast<int>(box.size()) == 2 * dim) {
        for (int k = 0; k < dim; ++k) {
            t.lo.push_back(box[2 * k]);
            t.hi.push_back(box[2 * k + 1]);
        }
    } else {
        throw UsageError("--box takes 2 or " + std::to_string(2 * dim) + " values");
    }
    for (int k = 0; k < dim; ++k)
        if (!(t.lo[k] < t.hi[k])) throw UsageError("--box ranges must satisfy lo < hi");
}

Target resolve(const std::string& file, const std::string& entry, const std::optional<std::string>& ambient) {
    if (file.empty() == entry.empty()) throw UsageError("give exactly one of FILE or --entry");
    Target t;
    if (!entry.empty()) {
        const CatalogEntry& e = catalog_entry(entry);
        t = {e.name, e.spec, e.lo, e.hi};
    } else {
        t.label = file;
        t.spec = load_spec(file);
    }
    if (ambient) t.spec = with_ambient(t.spec, parse_ambient(*ambient, t.spec.ambient.complex_dim));
    return t;
}

void emit_json(const Json& j, const std::string& path, std::ostream& out) {
    if (path == "-") {
        out << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << j.dump(2) << '\n';
    if (!f) throw IoError("error writing '" + path + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) items.push_back(item);
    return items;
}

void print_summary(const RunReport& r, std::ostream& out) {
    const auto& c = r.header.conventions;
    out << "conventions: s_laplacian=" << std::showpos << c.laplacian << " s_codifferential=" << c.codifferential
        << std::noshowpos << " two_form_norm=" << r.header.two_form_norm << '\n';
    for (const auto& e : r.entries) {
        int applicable = static_cast<int>(e.records.size());
        out << std::left << std::setw(28) << e.name << ' ' << std::setw(18) << e.ambient << " points "
            << e.points_sampled << '/' << e.points_requested << "  records " << applicable << "  failed " << e.failed;
        if (!e.equal_angle_gate.empty()) out << "  gate " << e.equal_angle_gate;
        out << (e.failed == 0 ? "  ok" : "  FAIL") << '\n';
        int shown = 0;
        for (const auto& row : e.records) {
            if (row.residual.pass || row.residual.diagnostic) continue;
            if (shown++ == 5) break;
            out << "    " << row.residual.id << " at point " << row.point_index << ": rel " << row.residual.rel_residual
                << " abs " << row.residual.abs_residual << '\n';
        }
        for (const auto& q : e.quadrature)
            if (!q.pass)
                out << "    quadrature " << q.check << " N=" << q.grid << ": "
                    << (q.error.empty() ? "rel " + std::to_string(q.rel_residual) : q.error) << '\n';
        for (const auto& s : e.self_checks)
            if (s.failed > 0) out << "    self-check " << s.property << " failed at " << s.failed << " points\n";
    }
    out << (r.pass() ? "PASS" : "FAIL") << ": " << r.entries.size() << " entries, " << r.failed << " failures, "
        << std::fixed << std::setprecision(2) << r.seconds << " s\n";
    out << std::defaultfloat;
}

void print_check(const IntegralCheck& c, std::ostream& out) {
    out << std::setprecision(17);
    if (!c.error.empty()) {
        out << c.check << " N=" << c.grid << ": " << c.error << "\n";
        return;
    }
    out << c.check << " N=" << c.grid << "\n  lhs " << c.lhs << "\n  rhs " << c.rhs << std::setprecision(3)
        << "\n  abs " << c.abs_residual << "  rel " << c.rel_residual << "  coarse(N=" << c.coarse_grid
        << ") " << c.coarse_error << "  ratio " << c.ratio << (c.converged ? "  converged" : "") << '\n'
        << "  " << (c.pass ? "equal" : "NOT equal") << '\n';
    out << std::setprecision(6);
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kähler angle identity verifier for immersed submanifolds"};
    app.name("kangle");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kToolVersion);

    std::optional<std::string> ambient;
    std::string json_path;
    app.add_option("--ambient", ambient, "ambient override: flat or space_form(RHO)");
    app.add_option("--json", json_path, "write the JSON report to PATH ('-' for stdout)");

    // eval
    auto* eval = app.add_subcommand("eval", "print the geometry at one point as JSON");
    std::string eval_file, eval_entry;
    std::vector<double> eval_point;
    int eval_order = 3;
    eval->add_option("file", eval_file, "immersion file (.imm)");
    eval->add_option("--entry", eval_entry, "catalog entry");
    eval->add_option("--point", eval_point, "comma separated coordinates (use --point=-1,0 for a leading minus)")
        ->delimiter(',');
    eval->add_option("--order", eval_order, "jet order")->check(CLI::IsMember({3, 4}));

    // verify
    auto* verify = app.add_subcommand("verify", "run identity suites at sampled points");
    std::string verify_file, suite_list = "all";
    std::vector<std::string> verify_entries;
    std::vector<double> box;
    RunOptions ropts;
    verify->add_option("file", verify_file, "immersion file (.imm)");
    verify->add_option("--entry", verify_entries, "catalog entries (default: the whole catalog)")->delimiter(',');
    verify->add_option("--suite", suite_list, "comma separated suite names, or all");
    verify->add_option("--points", ropts.points, "points per entry")->check(CLI::PositiveNumber);
    verify->add_option("--seed", ropts.seed, "sampling seed (0: unrotated Halton sequence)");
    verify->add_option("--tol-abs", ropts.tolerance.abs, "absolute residual tolerance")->check(CLI::NonNegativeNumber);
    verify->add_option("--tol-rel", ropts.tolerance.rel, "relative residual tolerance")->check(CLI::NonNegativeNumber);
    verify->add_option("--order", ropts.order, "jet order")->check(CLI::IsMember({3, 4}));
    verify->add_option("--grid", ropts.quadrature_grid, "also run torus quadrature on periodic entries (0: off)")
        ->check(CLI::NonNegativeNumber);
    verify->add_option("--box", box, "sampling box for FILE: lo,hi or lo1,hi1,lo2,hi2,...")->delimiter(',');

    // integrate
    auto* integrate = app.add_subcommand("integrate", "torus quadrature checks on a periodic immersion");
    std::string int_file, int_entry, int_check;
    int grid = 0;
    std::uint64_t int_seed = 1;
    integrate->add_option("file", int_file, "periodic immersion file (.imm)");
    integrate->add_option("--entry", int_entry, "catalog entry");
    integrate->add_option("--grid", grid, "points per axis (default: 64 for n = 1, 12 for n = 2)");
    integrate->add_option("--check", int_check, "stokes or eq2.3 (default: both)")
        ->check(CLI::IsMember({"stokes", "eq2.3"}));
    integrate->add_option("--seed", int_seed, "seed of the random test function");

    auto* catalog = app.add_subcommand("catalog", "list the built-in entries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        err << "error: " << e.what() << "\n\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return 2;
    }

    try {
        if (eval->parsed()) {
            Target t = resolve(eval_file, eval_entry, ambient);
            std::vector<double> p = eval_point;
            if (p.empty()) {
                if (eval_entry.empty()) throw UsageError("--point is required with FILE");
                for (std::size_t k = 0; k < t.lo.size(); ++k) p.push_back(0.5 * (t.lo[k] + t.hi[k]));
            }
            if (static_cast<int>(p.size()) != t.spec.domain_dim())
                throw UsageError("--point needs " + std::to_string(t.spec.domain_dim()) + " coordinates");
            GeometryOptions g;
            g.order = eval_order;
            g.conventions = calibrate_header().conventions;
            const Json j = snapshot_to_json(compute_snapshot(t.spec, p, g));
            out << j.dump(2) << '\n';
            if (!json_path.empty() && json_path != "-") emit_json(j, json_path, out);
            return 0;
        }

        if (verify->parsed()) {
            ropts.suites = split_list(suite_list);
            if (ropts.suites.empty()) throw UsageError("--suite is empty");
            ropts.ambient = ambient;
            RunReport r;
            if (!verify_file.empty()) {
                if (!verify_entries.empty()) throw UsageError("give exactly one of FILE or --entry");
                if (!box.empty() && box.size() != 2 && box.size() % 2 != 0) throw UsageError("--box takes pairs");
                Target t = resolve(verify_file, "", std::nullopt);
                apply_box(t, box);
                r = run_suite(t.spec, t.lo, t.hi, ropts);
            } else {
                if (!box.empty()) throw UsageError("--box applies to FILE only");
                ropts.entries = verify_entries;
                r = run_suite(ropts);
            }
            print_summary(r, json_path == "-" ? err : out);
            if (!json_path.empty()) emit_json(to_json(r), json_path, out);
            return r.pass() ? 0 : 1;
        }

        if (integrate->parsed()) {
            Target t = resolve(int_file, int_entry, ambient);
            const int N = grid > 0 ? grid : default_quadrature_grid(t.spec.n);
            std::vector<IntegralCheckKind> kinds;
            if (int_check.empty())
                kinds = {IntegralCheckKind::stokes, IntegralCheckKind::eq2_3};
            else
                kinds = {parse_integral_check(int_check)};
            Json j{{"schema", kReportSchema}, {"target", t.label}, {"checks", Json::array()}};
            bool ok = true;
            std::ostream& text = json_path == "-" ? err : out;
            for (const IntegralCheck& c : integral_checks(t.spec, kinds, N, int_seed)) {
                print_check(c, text);
                j["checks"].push_back(to_json(c));
                ok = ok && c.pass;
            }
            j["pass"] = ok;
            if (!json_path.empty()) emit_json(j, json_path, out);
            return ok ? 0 : 1;
        }

        if (catalog->parsed()) {
            if (json_path == "-") {
                emit_json(catalog_to_json(), json_path, out);
                return 0;
            }
            for (const auto& e : builtin_catalog())
                out << std::left << std::setw(28) << e.name << " n=" << e.spec.n << "  " << std::setw(18)
                    << ambient_name(e.spec.ambient) << (e.periodic() ? "periodic  " : "          ") << e.description
                    << '\n';
            if (!json_path.empty()) emit_json(catalog_to_json(), json_path, out);
            return 0;
        }
    } catch (const SourceError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace kangle::cli
