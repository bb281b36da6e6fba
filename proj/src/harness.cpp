#include "kangle/harness.hpp"

#include "kangle/errors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

namespace kangle {

// ----- sampling -----

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

double radical_inverse(long long i, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

std::vector<std::vector<double>> halton_points(std::span<const double> lo, std::span<const double> hi, int count,
                                               std::uint64_t seed) {
    const std::size_t dim = lo.size();
    if (hi.size() != dim || dim > std::size(kPrimes)) throw UsageError("Halton sampling supports up to 8 dimensions");
    std::vector<double> shift(dim, 0.0);
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        for (auto& s : shift) s = unit_double(rng);
    }
    std::vector<std::vector<double>> out(count, std::vector<double>(dim));
    for (int i = 0; i < count; ++i)
        for (std::size_t k = 0; k < dim; ++k) {
            double u = radical_inverse(i + 1, kPrimes[k]) + shift[k];
            u -= std::floor(u);
            out[i][k] = lo[k] + (hi[k] - lo[k]) * u;
        }
    return out;
}

int worker_count() {
    if (const char* env = std::getenv("KANGLE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

AmbientSpec parse_ambient(std::string_view text, int complex_dim) {
    static const std::regex sf(R"(\s*space_form\s*\(\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*\)\s*)");
    const std::string t(text);
    if (std::regex_match(t, std::regex(R"(\s*flat\s*)"))) return AmbientSpec::flat(complex_dim);
    std::smatch m;
    if (std::regex_match(t, m, sf)) {
        const double rho = std::stod(m[1].str());
        if (rho == 0.0) throw UsageError("space_form(0) is the flat ambient; write 'flat'");
        return AmbientSpec::space_form(rho, complex_dim);
    }
    throw UsageError("ambient must be 'flat' or 'space_form(RHO)', got '" + t + "'");
}

std::string ambient_name(const AmbientSpec& a) {
    if (a.is_flat()) return "flat";
    std::ostringstream os;
    os << "space_form(" << a.rho << ")";
    return os.str();
}

// ----- quadrature -----

const char* to_string(Integrand i) {
    switch (i) {
    case Integrand::volume: return "volume";
    case Integrand::laplacian_cos2: return "laplacian_cos2";
    case Integrand::laplacian_random: return "laplacian_random";
    case Integrand::hodge_pairing: return "hodge_pairing";
    case Integrand::codifferential_norm: return "codifferential_norm";
    }
    return "?";
}

namespace {

constexpr Integrand kIntegrands[] = {Integrand::volume, Integrand::laplacian_cos2, Integrand::laplacian_random,
                                     Integrand::hodge_pairing, Integrand::codifferential_norm};

// f = sum_k a_k sin(nu_k . u + phi_k) with small integer frequencies.
struct RandomTrig {
    std::vector<std::vector<int>> nu;
    std::vector<double> amp, phase;

    RandomTrig(int dim, std::uint64_t seed) {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        for (int k = 0; k < 4; ++k) {
            std::vector<int> v(dim);
            for (auto& x : v) x = static_cast<int>(rng() % 5) - 2;
            nu.push_back(v);
            amp.push_back(0.5 + unit_double(rng));
            phase.push_back(2.0 * std::numbers::pi * unit_double(rng));
        }
    }

    Jet operator()(std::span<const double> p, int order) const {
        const int dim = static_cast<int>(p.size());
        Jet f = Jet::constant(dim, order, 0.0);
        for (std::size_t k = 0; k < nu.size(); ++k) {
            Jet arg = Jet::constant(dim, order, phase[k]);
            for (int i = 0; i < dim; ++i)
                if (nu[k][i] != 0) arg += static_cast<double>(nu[k][i]) * Jet::seed(dim, order, p, i);
            f += amp[k] * sin(arg);
        }
        return f;
    }
};

} // namespace

TorusIntegrals torus_integrals(const ImmersionSpec& spec, int N, std::uint64_t seed, int threads) {
    if (!spec.periodic) throw UsageError("torus quadrature needs a periodic immersion");
    if (N < 4) throw UsageError("quadrature grid must have at least 4 points per axis");
    const int dim = spec.domain_dim();
    long long total = 1;
    for (int i = 0; i < dim; ++i) total *= N;
    const double h = 2.0 * std::numbers::pi / N;
    const double cell = std::pow(h, dim);
    const RandomTrig f(dim, seed);
    GeometryOptions opts;
    opts.intrinsic_only = true;

    // Partial sums per chunk, combined in index order for reproducibility.
    const int chunks = static_cast<int>(std::min<long long>(total, 256));
    std::vector<std::array<double, 10>> partial(chunks);
    parallel_for(chunks, threads > 0 ? threads : worker_count(), [&](int c) {
        std::array<double, 10> acc{};
        std::vector<double> p(dim);
        for (long long idx = c; idx < total; idx += chunks) {
            long long r = idx;
            for (int i = 0; i < dim; ++i) {
                p[i] = h * static_cast<double>(r % N);
                r /= N;
            }
            const Snapshot s = compute_snapshot(spec, p, opts);
            const double vol = std::sqrt(s.gp.determinant()) * cell;
            const Eigen::VectorXd dw = values(codifferential_2form(s, s.omega));
            const double vals[5] = {
                1.0,
                laplacian(s, s.cos2),
                laplacian(s, f(p, s.order)),
                inner_2form(s, hodge_laplacian_form(s), s.omegap),
                norm2_covector(s, dw),
            };
            for (int k = 0; k < 5; ++k) {
                acc[k] += vals[k] * vol;
                acc[5 + k] += std::abs(vals[k]) * vol;
            }
        }
        partial[c] = acc;
    });
    TorusIntegrals out;
    out.grid = N;
    out.points = total;
    for (int k = 0; k < 5; ++k) {
        double v = 0.0, a = 0.0;
        for (const auto& pc : partial) {
            v += pc[k];
            a += pc[5 + k];
        }
        out.value[kIntegrands[k]] = v;
        out.magnitude[kIntegrands[k]] = a;
    }
    return out;
}

double torus_quadrature(const ImmersionSpec& spec, Integrand what, int N, std::uint64_t seed) {
    if (N < 8) throw UsageError("quadrature grid must have at least 8 points per axis");
    return torus_integrals(spec, N, seed).value.at(what);
}

const char* to_string(IntegralCheckKind k) { return k == IntegralCheckKind::stokes ? "stokes" : "eq2.3"; }

IntegralCheckKind parse_integral_check(std::string_view name) {
    if (name == "stokes") return IntegralCheckKind::stokes;
    if (name == "eq2.3") return IntegralCheckKind::eq2_3;
    throw UsageError("unknown integral check '" + std::string(name) + "' (expected stokes or eq2.3)");
}

int default_quadrature_grid(int n) { return n == 1 ? 64 : 12; }

namespace {

IntegralCheck make_check(IntegralCheckKind kind, const TorusIntegrals& fine, const TorusIntegrals& rough,
                         double tol_abs, double tol_rel) {
    IntegralCheck c;
    c.check = to_string(kind);
    c.grid = fine.grid;
    c.coarse_grid = rough.grid;
    double coarse_l = 0.0, coarse_r = 0.0;
    if (kind == IntegralCheckKind::stokes) {
        c.lhs = fine.value.at(Integrand::laplacian_random);
        c.scale = fine.magnitude.at(Integrand::laplacian_random);
        coarse_l = rough.value.at(Integrand::laplacian_random);
    } else {
        c.lhs = fine.value.at(Integrand::hodge_pairing);
        c.rhs = fine.value.at(Integrand::codifferential_norm);
        c.scale = std::max({fine.magnitude.at(Integrand::hodge_pairing), std::abs(c.rhs)});
        coarse_l = rough.value.at(Integrand::hodge_pairing);
        coarse_r = rough.value.at(Integrand::codifferential_norm);
    }
    c.abs_residual = std::abs(c.lhs - c.rhs);
    c.rel_residual = c.scale > 0.0 ? c.abs_residual / c.scale : 0.0;
    c.coarse_error = std::abs(coarse_l - coarse_r);
    c.ratio = c.abs_residual > 0.0 ? c.coarse_error / c.abs_residual : std::numeric_limits<double>::infinity();
    const double floor = 1e-12 * std::max(1.0, c.scale);
    c.converged = c.coarse_error <= floor || c.ratio > 1e3;
    c.pass = c.abs_residual <= tol_abs || c.rel_residual <= tol_rel;
    return c;
}

} // namespace

std::vector<IntegralCheck> integral_checks(const ImmersionSpec& spec, std::span<const IntegralCheckKind> kinds, int N,
                                           std::uint64_t seed, double tol_abs, double tol_rel) {
    if (N < 8) throw UsageError("quadrature grid must have at least 8 points per axis");
    const TorusIntegrals fine = torus_integrals(spec, N, seed);
    const TorusIntegrals rough = torus_integrals(spec, std::max(4, N / 2), seed);
    std::vector<IntegralCheck> out;
    for (auto k : kinds) out.push_back(make_check(k, fine, rough, tol_abs, tol_rel));
    return out;
}

IntegralCheck integral_check(const ImmersionSpec& spec, IntegralCheckKind kind, int N, std::uint64_t seed,
                             double tol_abs, double tol_rel) {
    const IntegralCheckKind k[] = {kind};
    return integral_checks(spec, k, N, seed, tol_abs, tol_rel).front();
}

// ----- suite runs -----

namespace {

struct Sample {
    const CatalogEntry* entry = nullptr;  // null for user specs
    const ImmersionSpec* spec = nullptr;
    int index = 0;
    std::vector<double> point;
};

struct SampleResult {
    bool ok = false;
    std::string skip_reason;
    std::vector<double> cos;
    double spread = 0.0;
    bool equal = false;
    PointClass cls = PointClass::generic;
    std::vector<IdentityResidual> residuals;
    std::vector<SelfCheck> self_checks;
    std::vector<HypothesisField> fields;
};

void widen(FieldRange& r, double v) {
    if (r.count == 0) r.min = r.max = v;
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
    ++r.count;
}

EntryReport summarize(const std::string& name, const std::string& ambient, const CatalogEntry* entry,
                      const std::vector<Sample>& samples, const std::vector<SampleResult>& results) {
    EntryReport rep;
    rep.name = name;
    rep.ambient = ambient;
    rep.points_requested = static_cast<int>(samples.size());
    std::map<std::pair<std::string, std::string>, int> na;
    std::map<std::string, SelfCheckSummary> sc;
    double cos_sum = 0.0;
    bool gate_ok = true;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SampleResult& r = results[i];
        if (!r.ok) {
            rep.skipped.push_back({samples[i].index, r.skip_reason});
            continue;
        }
        const double c = r.cos.empty() ? 0.0 : r.cos.front();
        if (rep.points_sampled == 0) rep.cos_min = rep.cos_max = c;
        rep.cos_min = std::min(rep.cos_min, c);
        rep.cos_max = std::max(rep.cos_max, c);
        cos_sum += c;
        rep.max_spread = std::max(rep.max_spread, r.spread);
        ++rep.points_sampled;
        ++rep.classification[to_string(r.cls)];
        if (entry && entry->expect.equal_angle_candidate && !r.equal) {
            gate_ok = false;
            rep.gate_counterexamples.push_back(samples[i].point);
        }
        for (const auto& x : r.residuals) {
            if (x.diagnostic) {
                if (x.applicable) widen(rep.diagnostics[x.id], x.rel_residual);
                continue;
            }
            if (!x.applicable) {
                ++na[{x.id, x.reason}];
                continue;
            }
            if (!x.pass) ++rep.failed;
            rep.records.push_back({name, samples[i].index, samples[i].point, x});
        }
        for (const auto& s : r.self_checks) {
            auto& agg = sc[s.property];
            agg.property = s.property;
            (s.pass ? agg.passed : agg.failed)++;
            agg.worst_deviation = std::max(agg.worst_deviation, s.deviation);
            if (!s.pass) ++rep.failed;
        }
        for (const auto& f : r.fields)
            if (f.applicable) widen(rep.diagnostics[f.name], f.value);
    }
    if (rep.points_sampled > 0) rep.cos_mean = cos_sum / rep.points_sampled;
    if (entry && entry->expect.equal_angle_candidate) rep.equal_angle_gate = gate_ok ? "passed" : "failed";
    for (const auto& [key, count] : na) rep.not_applicable.push_back({key.first, key.second, count});
    for (auto& [_, s] : sc) rep.self_checks.push_back(s);
    std::stable_sort(rep.records.begin(), rep.records.end(), [](const RecordRow& a, const RecordRow& b) {
        return std::tie(a.point_index, a.residual.id) < std::tie(b.point_index, b.residual.id);
    });
    return rep;
}

RunReport run_samples(const std::vector<std::pair<std::string, std::vector<Sample>>>& groups,
                      const std::vector<const CatalogEntry*>& entries, const std::vector<ImmersionSpec>& specs,
                      const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    rep.options = options;
    if (options.calibrate) rep.header = calibrate_header(options.seed);

    GeometryOptions gopts;
    gopts.order = options.order;
    gopts.conventions = rep.header.conventions;

    std::vector<const Sample*> flat;
    for (const auto& g : groups)
        for (const auto& s : g.second) flat.push_back(&s);
    std::vector<SampleResult> results(flat.size());
    parallel_for(static_cast<int>(flat.size()), options.threads > 0 ? options.threads : worker_count(), [&](int i) {
        const Sample& smp = *flat[i];
        SampleResult& out = results[i];
        try {
            const Snapshot s = compute_snapshot(*smp.spec, smp.point, gopts);
            out.ok = true;
            out.cos = s.cos_angles;
            out.spread = s.angle_spread;
            out.equal = s.equal_angles;
            out.cls = s.cls;
            out.residuals = run_identities(s, options.suites, options.tolerance);
            if (smp.entry && !options.ambient) out.self_checks = check_expectations(*smp.entry, s);
            out.fields = evaluate_hypothesis_fields(s);
        } catch (const UsageError&) {
            throw;
        } catch (const Error& e) {
            out.ok = false;
            out.skip_reason = e.what();
        }
    });

    std::size_t offset = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& [name, samples] = groups[g];
        const std::vector<SampleResult> part(results.begin() + offset, results.begin() + offset + samples.size());
        offset += samples.size();
        EntryReport er = summarize(name, ambient_name(specs[g].ambient), entries[g], samples, part);
        if (options.quadrature_grid > 0 && specs[g].periodic) {
            const int N = std::min(options.quadrature_grid, default_quadrature_grid(specs[g].n));
            const IntegralCheckKind kinds[] = {IntegralCheckKind::stokes, IntegralCheckKind::eq2_3};
            try {
                er.quadrature = integral_checks(specs[g], kinds, N, options.seed);
            } catch (const UsageError&) {
                throw;
            } catch (const Error& e) {
                for (auto kind : kinds) {
                    IntegralCheck c;
                    c.check = to_string(kind);
                    c.grid = N;
                    c.error = e.what();
                    er.quadrature.push_back(c);
                }
            }
            for (const auto& c : er.quadrature)
                if (!c.pass) ++er.failed;
        }
        rep.failed += er.failed;
        rep.entries.push_back(std::move(er));
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace

ConventionHeader calibrate_header(std::uint64_t seed) {
    const CatalogEntry* cal = nullptr;
    for (const auto& e : builtin_catalog())
        if (e.calibration) cal = &e;
    if (!cal) throw ConventionError("the catalog has no calibration entry");
    const auto pts = halton_points(cal->lo, cal->hi, 8, seed);
    const CalibrationResult res = calibrate_conventions(cal->spec, pts);
    ConventionHeader h;
    h.conventions = res.conventions;
    h.tried = res.tried;
    h.calibration_entry = cal->name;
    h.calibrated = true;
    return h;
}

RunReport run_suite(const RunOptions& options) {
    std::vector<const CatalogEntry*> entries;
    if (options.entries.empty()) {
        for (const auto& e : builtin_catalog()) entries.push_back(&e);
    } else {
        for (const auto& name : options.entries) entries.push_back(&catalog_entry(name));
    }
    for (const auto& s : options.suites)
        if (s != "all" && std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            throw UsageError("unknown suite '" + s + "'");

    std::vector<ImmersionSpec> specs;
    for (const auto* e : entries)
        specs.push_back(options.ambient ? with_ambient(e->spec, parse_ambient(*options.ambient, e->spec.ambient.complex_dim))
                                        : e->spec);
    std::vector<std::pair<std::string, std::vector<Sample>>> groups;
    for (std::size_t g = 0; g < entries.size(); ++g) {
        std::vector<Sample> samples;
        const auto pts = halton_points(entries[g]->lo, entries[g]->hi, options.points, options.seed);
        for (int i = 0; i < options.points; ++i) samples.push_back({entries[g], nullptr, i, pts[i]});
        groups.push_back({entries[g]->name, std::move(samples)});
    }
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (auto& s : groups[g].second) s.spec = &specs[g];
    return run_samples(groups, entries, specs, options);
}

RunReport run_suite(const ImmersionSpec& spec, std::span<const double> lo, std::span<const double> hi,
                    const RunOptions& options) {
    if (static_cast<int>(lo.size()) != spec.domain_dim() || hi.size() != lo.size())
        throw UsageError("sampling box must have one range per domain variable");
    std::vector<ImmersionSpec> specs{options.ambient
                                         ? with_ambient(spec, parse_ambient(*options.ambient, spec.ambient.complex_dim))
                                         : spec};
    std::vector<Sample> samples;
    const auto pts = halton_points(lo, hi, options.points, options.seed);
    for (int i = 0; i < options.points; ++i) samples.push_back({nullptr, &specs[0], i, pts[i]});
    const std::string name = spec.name.empty() ? "user" : spec.name;
    return run_samples({{name, std::move(samples)}}, {nullptr}, specs, options);
}

} // namespace kangle
