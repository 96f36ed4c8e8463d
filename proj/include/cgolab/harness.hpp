#pragma once

// Experiment drivers behind the command-line tool.  Each runner takes one
// resolved ExperimentConfig, fans the independent solves out to a small pool
// and collects results by index, so the output order never depends on timing.
// CSV outputs start with a timestamp line, the schema version and the resolved
// configuration; everything after the timestamp is reproducible byte for byte.

#include "cgolab/beltrami.hpp"
#include "cgolab/forward.hpp"
#include "cgolab/generators.hpp"
#include "cgolab/spaces.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace cgolab {

using json = nlohmann::ordered_json;

inline constexpr const char* decay_schema = "cgolab-decay/1";
inline constexpr const char* stability_schema = "cgolab-stability/1";
inline constexpr const char* oracles_schema = "cgolab-oracles/1";

// --- configuration ---------------------------------------------------------------------

/// Shape shared by all members of the generator family; members differ in amplitude.
struct FamilyConfig {
    double alpha = 2.0;
    cplx centre = {0.1, 0.05};
    double r_in = 0.25, r_out = 0.8;

    DiniBumpSpec member(double amplitude) const {
        DiniBumpSpec s;
        s.alpha = alpha;
        s.centre = centre;
        s.r_in = r_in;
        s.r_out = r_out;
        s.amplitude = amplitude;
        return s;
    }
    double amplitude_for(double kappa) const { return kappa == 0.0 ? 0.0 : amplitude_for_kappa(member(0.0), kappa); }
};

struct DecayConfig {
    std::vector<double> kappas{0.0, 0.1, 0.3, 0.5}; ///< one family member per contrast sup |mu|
    std::vector<cplx> ks{4, 8, 16, 32, 64, 128};
    int n0 = 4;        ///< Neumann terms kept in g_k
    double R0 = 2.0;   ///< low-frequency disk radius
    double beta = 1.2; ///< exponent of omega in theta
    double ripple = 0.1;
};

struct StabilityConfig {
    GridSpec grid{512, 4.0};
    std::vector<double> amplitudes{0.4, 0.2, 0.1, 0.05, 0.025, 0.0125};
    PolarMesh mesh{256, 512};
    int modes = 32;
    cplx probe_k = 1.0;
    double beta = 1.2;
    std::vector<double> c2_grid{0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0};
};

struct OracleConfig {
    double s_min = 1.0, s_max = 50.0, s_step = 0.05;
    double gap_floor = 4.3, bessel_tol = 1e-8;
    std::vector<double> betas{1.2, 1.4};
    double r_min = 10.0, r_max = 1e4, r_extended = 1e5, band_drift = 0.2, i0_tol = 1e-6;
    std::vector<cplx> kernel_points{cplx(0, 0), cplx(1, 0), cplx(0, 2)};
    int kernel_n = 256;
    double kernel_drift = 0.2;
    int interpolation_trials = 100;
    int interpolation_n = 64;
    double interpolation_alpha = 2.0; ///< sigma = integrated log-power modulus with this exponent
};

struct ExperimentConfig {
    GridSpec grid{256, 4.0};
    FamilyConfig family;
    DecayConfig decay;
    StabilityConfig stability;
    OracleConfig oracles;
    SolverConfig solver;
    std::string out = "out";
    std::uint64_t seed = 0;
    int threads = 0; ///< 0 = hardware concurrency
};

namespace detail {

inline json to_json(cplx z) { return z.imag() == 0.0 ? json(z.real()) : json::array({z.real(), z.imag()}); }

inline cplx cplx_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    throw std::invalid_argument("config: expected a number or [re, im], got " + j.dump());
}

// Reads optional keys from one object and rejects keys nobody asked for.
class KeyReader {
public:
    KeyReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw std::invalid_argument("config: " + where_ + " must be an object");
    }
    template <class T>
    void get(const char* key, T& dst) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            if constexpr (std::is_same_v<T, cplx>) {
                dst = cplx_from_json(j_.at(key));
            } else if constexpr (std::is_same_v<T, std::vector<cplx>>) {
                dst.clear();
                for (const auto& v : j_.at(key)) dst.push_back(cplx_from_json(v));
            } else {
                dst = j_.at(key).get<T>();
            }
        } catch (const json::exception& e) {
            throw std::invalid_argument("config: " + where_ + "." + key + ": " + e.what());
        }
    }
    const json* sub(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw std::invalid_argument("config: unknown key '" + where_ + "." + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline void read_grid(const json& j, const std::string& where, GridSpec& g) {
    KeyReader r(j, where);
    r.get("n", g.n);
    r.get("half_width", g.half_width);
    r.finish();
    g.validate();
}

inline json grid_json(const GridSpec& g) { return {{"n", g.n}, {"half_width", g.half_width}}; }

inline json cplx_list(const std::vector<cplx>& v) {
    json a = json::array();
    for (cplx z : v) a.push_back(to_json(z));
    return a;
}

} // namespace detail

inline json to_json(const ExperimentConfig& c) {
    const auto& s = c.solver;
    const auto& o = c.oracles;
    return {
        {"grid", detail::grid_json(c.grid)},
        {"family", {{"alpha", c.family.alpha}, {"centre", detail::to_json(c.family.centre)},
                    {"r_in", c.family.r_in}, {"r_out", c.family.r_out}}},
        {"decay", {{"kappas", c.decay.kappas}, {"ks", detail::cplx_list(c.decay.ks)}, {"n0", c.decay.n0},
                   {"R0", c.decay.R0}, {"beta", c.decay.beta}, {"ripple", c.decay.ripple}}},
        {"stability", {{"grid", detail::grid_json(c.stability.grid)}, {"amplitudes", c.stability.amplitudes},
                       {"mesh", {c.stability.mesh.radial, c.stability.mesh.angular}}, {"modes", c.stability.modes},
                       {"probe_k", detail::to_json(c.stability.probe_k)}, {"beta", c.stability.beta},
                       {"c2_grid", c.stability.c2_grid}}},
        {"oracles", {{"s_min", o.s_min}, {"s_max", o.s_max}, {"s_step", o.s_step}, {"gap_floor", o.gap_floor},
                     {"bessel_tol", o.bessel_tol}, {"betas", o.betas}, {"r_min", o.r_min}, {"r_max", o.r_max},
                     {"r_extended", o.r_extended}, {"band_drift", o.band_drift}, {"i0_tol", o.i0_tol},
                     {"kernel_points", detail::cplx_list(o.kernel_points)}, {"kernel_n", o.kernel_n},
                     {"kernel_drift", o.kernel_drift}, {"interpolation_trials", o.interpolation_trials},
                     {"interpolation_n", o.interpolation_n}, {"interpolation_alpha", o.interpolation_alpha}}},
        {"solver", {{"method", s.phase_method == PhaseMethod::Krylov ? "krylov" : "fixed-point"}, {"n_max", s.n_max},
                    {"tol", s.tol}, {"kappa1", s.kappa1}, {"outer_max", s.outer_max}, {"outer_tol", s.outer_tol},
                    {"harmonics", s.harmonics}, {"anderson_depth", s.anderson_depth},
                    {"krylov_restart", s.krylov_restart}, {"krylov_max", s.krylov_max}}},
        {"out", c.out},
        {"seed", c.seed},
        {"threads", c.threads},
    };
}

/// Defaults overlaid with whatever the object sets; unknown keys are errors.
inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    detail::KeyReader top(j, "config");
    if (auto* g = top.sub("grid")) detail::read_grid(*g, "grid", c.grid);
    if (auto* f = top.sub("family")) {
        detail::KeyReader r(*f, "family");
        r.get("alpha", c.family.alpha);
        r.get("centre", c.family.centre);
        r.get("r_in", c.family.r_in);
        r.get("r_out", c.family.r_out);
        r.finish();
    }
    if (auto* d = top.sub("decay")) {
        detail::KeyReader r(*d, "decay");
        r.get("kappas", c.decay.kappas);
        r.get("ks", c.decay.ks);
        r.get("n0", c.decay.n0);
        r.get("R0", c.decay.R0);
        r.get("beta", c.decay.beta);
        r.get("ripple", c.decay.ripple);
        r.finish();
    }
    if (auto* s = top.sub("stability")) {
        detail::KeyReader r(*s, "stability");
        if (auto* g = r.sub("grid")) detail::read_grid(*g, "stability.grid", c.stability.grid);
        r.get("amplitudes", c.stability.amplitudes);
        std::vector<int> mesh{c.stability.mesh.radial, c.stability.mesh.angular};
        r.get("mesh", mesh);
        if (mesh.size() != 2) throw std::invalid_argument("config: stability.mesh must be [radial, angular]");
        c.stability.mesh = {mesh[0], mesh[1]};
        r.get("modes", c.stability.modes);
        r.get("probe_k", c.stability.probe_k);
        r.get("beta", c.stability.beta);
        r.get("c2_grid", c.stability.c2_grid);
        r.finish();
    }
    if (auto* o = top.sub("oracles")) {
        auto& v = c.oracles;
        detail::KeyReader r(*o, "oracles");
        r.get("s_min", v.s_min);
        r.get("s_max", v.s_max);
        r.get("s_step", v.s_step);
        r.get("gap_floor", v.gap_floor);
        r.get("bessel_tol", v.bessel_tol);
        r.get("betas", v.betas);
        r.get("r_min", v.r_min);
        r.get("r_max", v.r_max);
        r.get("r_extended", v.r_extended);
        r.get("band_drift", v.band_drift);
        r.get("i0_tol", v.i0_tol);
        r.get("kernel_points", v.kernel_points);
        r.get("kernel_n", v.kernel_n);
        r.get("kernel_drift", v.kernel_drift);
        r.get("interpolation_trials", v.interpolation_trials);
        r.get("interpolation_n", v.interpolation_n);
        r.get("interpolation_alpha", v.interpolation_alpha);
        r.finish();
    }
    if (auto* s = top.sub("solver")) {
        auto& v = c.solver;
        detail::KeyReader r(*s, "solver");
        std::string method = v.phase_method == PhaseMethod::Krylov ? "krylov" : "fixed-point";
        r.get("method", method);
        if (method == "krylov") v.phase_method = PhaseMethod::Krylov;
        else if (method == "fixed-point") v.phase_method = PhaseMethod::FixedPoint;
        else throw std::invalid_argument("config: solver.method must be krylov or fixed-point");
        r.get("n_max", v.n_max);
        r.get("tol", v.tol);
        r.get("kappa1", v.kappa1);
        r.get("outer_max", v.outer_max);
        r.get("outer_tol", v.outer_tol);
        r.get("harmonics", v.harmonics);
        r.get("anderson_depth", v.anderson_depth);
        r.get("krylov_restart", v.krylov_restart);
        r.get("krylov_max", v.krylov_max);
        r.finish();
    }
    top.get("out", c.out);
    top.get("seed", c.seed);
    top.get("threads", c.threads);
    top.finish();

    c.solver.validate();
    if (c.threads < 0) throw std::invalid_argument("config: threads must be >= 0");
    if (c.decay.n0 < 1 || !(c.decay.R0 > 0.0) || !(c.decay.ripple >= 0.0))
        throw std::invalid_argument("config: decay.n0, decay.R0 must be positive and ripple nonnegative");
    for (double kappa : c.decay.kappas)
        if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("config: decay.kappas must lie in [0, 1)");
    for (cplx k : c.decay.ks)
        if (k == 0.0) throw std::invalid_argument("config: decay.ks must be nonzero");
    for (double t : c.stability.amplitudes)
        if (!(t > 0.0)) throw std::invalid_argument("config: stability.amplitudes must be positive");
    if (c.stability.probe_k == 0.0) throw std::invalid_argument("config: stability.probe_k must be nonzero");
    for (double c2 : c.stability.c2_grid)
        if (!(c2 > 0.0)) throw std::invalid_argument("config: stability.c2_grid must be positive");
    if (!(c.oracles.s_step > 0.0) || !(c.oracles.s_min >= 1.0) || !(c.oracles.s_max >= c.oracles.s_min))
        throw std::invalid_argument("config: oracles s range must satisfy 1 <= s_min <= s_max, s_step > 0");
    // generator bounds are checked here rather than mid-sweep
    (void)c.family.member(0.0);
    make_dini_conductivity(c.family.member(0.0), GridSpec(32, 2.0));
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        j = json::parse(is, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return config_from_json(j);
}

// --- work pool ----------------------------------------------------------------------------

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first exception.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(resolve_threads(threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// --- output helpers --------------------------------------------------------------------

namespace detail {

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

inline std::string csv_text(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '"') c = ';';
    return s;
}

inline std::string timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct Column {
    const char* name;
    const char* meaning;
};

inline void write_header(std::ostream& os, const char* schema, const json& config, bool stamp) {
    if (stamp) os << "# generated " << timestamp() << "\n";
    os << "# schema " << schema << "\n";
    os << "# config " << config.dump() << "\n";
}

inline json schema_json(const char* schema, const std::vector<Column>& cols) {
    json c = json::array();
    for (const auto& col : cols) c.push_back({{"name", col.name}, {"meaning", col.meaning}});
    return {{"schema", schema}, {"columns", c}};
}

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

} // namespace detail

// --- decay experiment --------------------------------------------------------------------

struct DecayRow {
    std::size_t member = 0;
    double kappa = 0.0, amplitude = 0.0, alpha = 0.0;
    cplx k = 0.0;
    double linear_deviation = detail::nan, linear_residual = detail::nan;
    bool linear_ok = false;
    std::size_t linear_terms = 0;
    double phase_deviation = detail::nan, phase_residual = detail::nan;
    bool phase_ok = false;
    int phase_iterations = 0;
    double g_norm = detail::nan, h_norm = detail::nan, h_bound = detail::nan;
    double lowfreq_mass = detail::nan, theta_half_k = detail::nan, mass_theta = detail::nan;
    double mass_bound = detail::nan; ///< n0 (C_{alpha,beta} Gamma)^n0; nan when C_{alpha,beta} is undefined
    std::string status;
};

struct DecayFitRow {
    std::size_t member = 0;
    double kappa = 0.0;
    std::string kind; ///< "linear" or "phase"
    double a = 0.0, theta_r2 = 0.0, power_slope = 0.0, power_r2 = 0.0;
    std::string preferred; ///< model with the better r^2: "dini" (theta) or "holder" (power law)
    bool nonincreasing = false;
    bool checked = false; ///< false for the zero member
};

struct DecayResult {
    json config;
    std::vector<DecayRow> rows;
    std::vector<DecayFitRow> fits;
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

inline DecayResult run_decay_experiment(const ExperimentConfig& cfg) {
    DecayResult res;
    res.config = to_json(cfg);
    const auto& dc = cfg.decay;
    const std::size_t members = dc.kappas.size(), nk = dc.ks.size();

    std::vector<BeltramiCoefficient> mus(members);
    std::vector<double> amps(members);
    parallel_for(members, cfg.threads, [&](std::size_t m) {
        amps[m] = cfg.family.amplitude_for(dc.kappas[m]);
        const auto c = make_dini_conductivity(cfg.family.member(amps[m]), cfg.grid, cfg.seed);
        mus[m] = mu_from_gamma(c.gamma, cfg.family.alpha, cfg.seed);
    });
    double dini_c = detail::nan;
    try {
        dini_c = square_dini_constant(cfg.family.alpha, dc.beta).value;
    } catch (const std::domain_error&) {
    }
    const ThetaWeight theta(ModulusSpec::log_power(dc.beta));

    res.rows.resize(members * nk);
    parallel_for(members * nk, cfg.threads, [&](std::size_t idx) {
        const std::size_t m = idx / nk;
        DecayRow& row = res.rows[idx];
        row.member = m;
        row.kappa = mus[m].kappa;
        row.amplitude = amps[m];
        row.alpha = cfg.family.alpha;
        row.k = dc.ks[idx % nk];
        std::vector<std::string> notes;
        try {
            const auto lin = solve_linear_cgo(mus[m], row.k, cfg.solver);
            row.linear_deviation = lin.sup_deviation;
            row.linear_residual = lin.residual;
            row.linear_ok = lin.converged;
            row.linear_terms = lin.series_terms.size();
            if (!lin.status.empty()) notes.push_back("linear: " + lin.status);
            const auto [gk, hk] = decompose_g_h(lin, dc.n0);
            row.g_norm = gk.norm();
            row.h_norm = hk.norm();
            if (lin.kappa1 < 1.0) row.h_bound = neumann_tail_bound(mus[m].kappa, lin.kappa1, dc.n0);
            row.lowfreq_mass = gk_lowfreq_mass(lin, dc.n0, dc.R0);
            row.theta_half_k = theta(std::abs(row.k) / 2.0);
            row.mass_theta = row.lowfreq_mass * row.theta_half_k;
            row.mass_bound = dc.n0 * std::pow(dini_c * mus[m].gamma_norm, dc.n0);
        } catch (const std::exception& e) {
            row.linear_ok = false;
            notes.push_back(std::string("linear: ") + e.what());
        }
        try {
            const auto ph = solve_nonlinear_cgo(mus[m], row.k, cfg.solver);
            row.phase_deviation = ph.sup_deviation;
            row.phase_residual = ph.residual;
            row.phase_ok = ph.converged;
            row.phase_iterations = ph.outer_iters;
            if (!ph.status.empty()) notes.push_back("phase: " + ph.status);
        } catch (const std::exception& e) {
            row.phase_ok = false;
            notes.push_back(std::string("phase: ") + e.what());
        }
        for (const auto& n : notes) row.status += (row.status.empty() ? "" : "; ") + n;
    });

    for (std::size_t m = 0; m < members; ++m) {
        const bool zero = mus[m].kappa == 0.0;
        for (int which = 0; which < 2; ++which) {
            DecayProfile prof;
            for (std::size_t j = 0; j < nk; ++j) {
                const auto& r = res.rows[m * nk + j];
                DecayPoint p;
                p.k_abs = std::abs(r.k);
                p.deviation = which == 0 ? r.linear_deviation : r.phase_deviation;
                p.residual = which == 0 ? r.linear_residual : r.phase_residual;
                p.ok = (which == 0 ? r.linear_ok : r.phase_ok) && std::isfinite(p.deviation);
                prof.points.push_back(p);
            }
            fit_decay(prof, dc.beta);
            DecayFitRow f;
            f.member = m;
            f.kappa = mus[m].kappa;
            f.kind = which == 0 ? "linear" : "phase";
            f.a = prof.a;
            f.theta_r2 = prof.theta_fit.r2;
            f.power_slope = prof.power_fit.slope;
            f.power_r2 = prof.power_fit.r2;
            f.preferred = prof.theta_fit.r2 >= prof.power_fit.r2 ? "dini" : "holder";
            f.nonincreasing = prof.nonincreasing(dc.ripple);
            f.checked = !zero;
            const std::string tag = "member " + std::to_string(m) + " " + f.kind + ": ";
            if (f.checked) {
                if (!f.nonincreasing) res.failures.push_back(tag + "deviation increases beyond the ripple");
                if (!(f.a > 0.0)) res.failures.push_back(tag + "fitted exponent a = " + detail::sci(f.a) + " not positive");
            }
            res.fits.push_back(f);
        }
    }
    for (const auto& r : res.rows) {
        const std::string tag = "member " + std::to_string(r.member) + " k " + detail::num(std::abs(r.k)) + ": ";
        if (!r.linear_ok || !r.phase_ok) res.failures.push_back(tag + "solver failure (" + r.status + ")");
        if (r.kappa == 0.0 && !(r.linear_deviation == 0.0 && r.phase_deviation == 0.0 && r.lowfreq_mass == 0.0))
            res.failures.push_back(tag + "zero coefficient gave a nonzero row");
        if (std::isfinite(r.mass_bound) && !(r.mass_theta <= r.mass_bound))
            res.failures.push_back(tag + "mass * theta exceeds n0 (C Gamma)^n0");
    }
    return res;
}

inline const std::vector<detail::Column>& decay_columns() {
    static const std::vector<detail::Column> cols{
        {"member", "index into decay.kappas"},
        {"kappa", "sup |mu| of the member"},
        {"amplitude", "t in gamma = 1 + t eta"},
        {"alpha", "log-power exponent of the generator"},
        {"k_re", "frequency, real part"},
        {"k_im", "frequency, imaginary part"},
        {"linear_deviation", "sup |psi - z| on the closed unit disk"},
        {"linear_residual", "windowed relative residual of the linear equation"},
        {"linear_ok", "1 if the Neumann series converged"},
        {"linear_terms", "number of Neumann terms kept"},
        {"phase_deviation", "sup |phi - z| on the closed unit disk"},
        {"phase_residual", "windowed relative residual of the nonlinear equation"},
        {"phase_ok", "1 if the nonlinear solve converged"},
        {"phase_iterations", "outer or Krylov iterations of the nonlinear solve"},
        {"g_norm", "L2 norm of g_k (first n0 Neumann terms)"},
        {"h_norm", "L2 norm of h_k (remaining terms)"},
        {"h_bound", "closed-form bound sqrt(pi) kappa kappa1^n0 / (1 - kappa1)"},
        {"lowfreq_mass", "integral of |g_k^|^2 over |xi| < R0"},
        {"theta_half_k", "theta(|k| / 2) with omega = |log r|^-beta"},
        {"mass_theta", "lowfreq_mass * theta_half_k"},
        {"mass_bound", "n0 (C_{alpha,beta} Gamma)^n0, nan when C is undefined"},
        {"status", "solver notes; empty on success"},
    };
    return cols;
}

inline const std::vector<detail::Column>& decay_fit_columns() {
    static const std::vector<detail::Column> cols{
        {"member", "index into decay.kappas"},
        {"kappa", "sup |mu| of the member"},
        {"kind", "linear (psi) or phase (phi)"},
        {"a", "minus the slope of log deviation against log theta(|k|)"},
        {"theta_r2", "r^2 of that fit"},
        {"power_slope", "slope of log deviation against log |k|"},
        {"power_r2", "r^2 of the power-law fit"},
        {"preferred", "dini if theta_r2 >= power_r2, else holder"},
        {"nonincreasing", "1 if each deviation is at most (1 + ripple) times the previous"},
        {"checked", "0 for the zero member, whose checks are skipped"},
    };
    return cols;
}

inline void write_decay_csv(std::ostream& os, const DecayResult& r, bool stamp = true) {
    using detail::num;
    detail::write_header(os, decay_schema, r.config, stamp);
    const auto& cols = decay_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].name;
    os << "\n";
    for (const auto& x : r.rows)
        os << x.member << ',' << num(x.kappa) << ',' << num(x.amplitude) << ',' << num(x.alpha) << ','
           << num(x.k.real()) << ',' << num(x.k.imag()) << ',' << num(x.linear_deviation) << ','
           << num(x.linear_residual) << ',' << x.linear_ok << ',' << x.linear_terms << ',' << num(x.phase_deviation)
           << ',' << num(x.phase_residual) << ',' << x.phase_ok << ',' << x.phase_iterations << ',' << num(x.g_norm)
           << ',' << num(x.h_norm) << ',' << num(x.h_bound) << ',' << num(x.lowfreq_mass) << ','
           << num(x.theta_half_k) << ',' << num(x.mass_theta) << ',' << num(x.mass_bound) << ','
           << detail::csv_text(x.status) << "\n";
}

inline void write_decay_fits_csv(std::ostream& os, const DecayResult& r, bool stamp = true) {
    using detail::num;
    detail::write_header(os, decay_schema, r.config, stamp);
    const auto& cols = decay_fit_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].name;
    os << "\n";
    for (const auto& f : r.fits)
        os << f.member << ',' << num(f.kappa) << ',' << f.kind << ',' << num(f.a) << ',' << num(f.theta_r2) << ','
           << num(f.power_slope) << ',' << num(f.power_r2) << ',' << f.preferred << ',' << f.nonincreasing << ','
           << f.checked << "\n";
}

// --- stability experiment ------------------------------------------------------------------

struct StabilityRecord {
    double t = 0.0;
    double rho = detail::nan;            ///< weighted norm of the DtN difference
    double sup_gamma_diff = detail::nan; ///< sup |gamma_ref - gamma_t|
    double sup_u_diff = detail::nan;     ///< sup over the unit disk of |u_ref - u_t| at the probe k
    double cgo_residual = detail::nan;   ///< largest residual of the two CGO solves
    double interp_lhs = detail::nan;     ///< sup |dF/dx| of the windowed f difference
    double interp_rhs = detail::nan;     ///< interpolation bound for it
    bool interp_holds = false;
    bool ok = false;
    std::string status;
};

/// V(rho) = c1 theta(|log rho| / c2)^-a.  a and c2 come from least squares in
/// (log theta, log d); c1 is then raised to the smallest value whose curve lies
/// on or above every point (c1_ls is the least-squares value).
struct StabilityFit {
    bool valid = false;
    int usable = 0;
    double c2 = detail::nan, a = detail::nan, c1_ls = detail::nan, c1 = detail::nan, r2 = detail::nan;
    bool dominated = false;    ///< every usable point under the c1 curve
    bool dominated_ls = false; ///< every usable point under the c1_ls curve
    std::string note;

    double operator()(const ThetaWeight& theta, double rho) const {
        return c1 * std::pow(theta(std::abs(std::log(rho)) / c2), -a);
    }
};

struct StabilityResult {
    json config;
    std::vector<StabilityRecord> records; ///< reference row (t = 0) first, then amplitudes as configured
    StabilityFit fit;
    bool monotone = false;
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

inline StabilityFit fit_stability(const std::vector<double>& rho, const std::vector<double>& diff,
                                  const std::vector<double>& c2_grid, double beta) {
    StabilityFit best;
    std::vector<double> r, d;
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho[i] > 0.0 && rho[i] < 1.0 && diff[i] > 0.0) {
            r.push_back(rho[i]);
            d.push_back(diff[i]);
        }
    best.usable = static_cast<int>(r.size());
    if (r.size() < 4) {
        best.note = "degenerate: fewer than 4 points with 0 < rho < 1 and a positive difference";
        return best;
    }
    const ThetaWeight theta(ModulusSpec::log_power(beta));
    double best_sse = INFINITY;
    for (double c2 : c2_grid) {
        std::vector<double> x, y;
        bool inside = true;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double arg = std::abs(std::log(r[i])) / c2;
            if (!(arg > 1.0)) {
                inside = false;
                break;
            }
            x.push_back(std::log(theta(arg)));
            y.push_back(std::log(d[i]));
        }
        if (!inside) continue;
        const auto line = fit_line(x, y);
        if (!line.valid) continue;
        double sse = 0.0, lift = -INFINITY;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - (line.intercept + line.slope * x[i]);
            sse += e * e;
            lift = std::max(lift, e);
        }
        if (sse < best_sse) {
            best_sse = sse;
            best.valid = true;
            best.c2 = c2;
            best.a = -line.slope;
            best.r2 = line.r2;
            best.c1_ls = std::exp(line.intercept);
            best.c1 = std::exp(line.intercept + std::max(0.0, lift));
            best.dominated_ls = lift <= 1e-12;
        }
    }
    if (!best.valid) {
        best.note = "no c2 in the grid keeps |log rho| / c2 > 1 for every point";
        return best;
    }
    best.dominated = true;
    for (std::size_t i = 0; i < r.size(); ++i) best.dominated = best.dominated && d[i] <= best(theta, r[i]) * (1 + 1e-12);
    return best;
}

inline StabilityResult run_stability_experiment(const ExperimentConfig& cfg) {
    StabilityResult res;
    res.config = to_json(cfg);
    const auto& sc = cfg.stability;
    const GridSpec& g = sc.grid;
    std::vector<double> ts{0.0};
    ts.insert(ts.end(), sc.amplitudes.begin(), sc.amplitudes.end());

    struct Member {
        Conductivity c;
        DtnMatrix dtn;
        Field f_plus, u;
        double residual = 0.0;
        std::string status;
        bool ok = false;
    };
    std::vector<Member> ms(ts.size());
    parallel_for(ts.size(), cfg.threads, [&](std::size_t i) {
        Member& m = ms[i];
        try {
            m.c = make_dini_conductivity(cfg.family.member(ts[i]), g, cfg.seed);
            m.dtn = dtn_assemble(m.c, sc.modes, sc.mesh);
            const auto mu = mu_from_gamma(m.c.gamma, cfg.family.alpha, cfg.seed);
            const auto minus = make_beltrami(mu.mu * -1.0, cfg.family.alpha, cfg.seed);
            const auto pp = solve_nonlinear_cgo(mu, sc.probe_k, cfg.solver);
            const auto pm = solve_nonlinear_cgo(minus, sc.probe_k, cfg.solver);
            m.f_plus = cgo_f(pp);
            m.u = cgo_to_u(m.f_plus, cgo_f(pm));
            m.residual = std::max(pp.residual, pm.residual);
            m.ok = pp.converged && pm.converged;
            for (const auto* s : {&pp.status, &pm.status})
                if (!s->empty()) m.status += (m.status.empty() ? "" : "; ") + *s;
        } catch (const std::exception& e) {
            m.ok = false;
            m.status = e.what();
        }
    });

    const Member& ref = ms.front();
    const Field W = window(g, 1.0, 1.45);
    const auto sigma = ModulusSpec::integrated(std::max(cfg.family.alpha, 1.0 + 1e-9));
    res.records.resize(ts.size());
    parallel_for(ts.size(), cfg.threads, [&](std::size_t i) {
        const Member& m = ms[i];
        StabilityRecord& rec = res.records[i];
        rec.t = ts[i];
        rec.status = m.status;
        rec.ok = m.ok && ref.ok;
        if (!rec.ok) {
            if (!ref.ok && i != 0) rec.status += (rec.status.empty() ? "" : "; ") + std::string("reference failed");
            return;
        }
        rec.cgo_residual = m.residual;
        rec.rho = dtn_opnorm_diff(ref.dtn, m.dtn);
        rec.sup_gamma_diff = (ref.c.gamma - m.c.gamma).sup();
        rec.sup_u_diff = 0.0;
        for (int b = 0; b < g.n; ++b)
            for (int a = 0; a < g.n; ++a)
                if (std::abs(g.point(a, b)) <= 1.0)
                    rec.sup_u_diff = std::max(rec.sup_u_diff, std::abs(ref.u(a, b) - m.u(a, b)));
        const Field F = (ref.f_plus - m.f_plus) * W;
        const auto ib = interpolation_bound(F, sigma, Axis::X, default_seminorm_method(g), cfg.seed);
        rec.interp_lhs = ib.lhs;
        rec.interp_rhs = ib.rhs;
        rec.interp_holds = ib.holds();
    });

    std::vector<double> rho, diff;
    for (const auto& r : res.records)
        if (r.ok && r.t > 0.0) {
            rho.push_back(r.rho);
            diff.push_back(r.sup_gamma_diff);
        }
    res.fit = fit_stability(rho, diff, sc.c2_grid, sc.beta);

    // joint monotonicity along increasing t, the reference row included
    std::vector<const StabilityRecord*> order;
    for (const auto& r : res.records) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->t < b->t; });
    res.monotone = true;
    for (std::size_t i = 1; i < order.size(); ++i)
        res.monotone = res.monotone && order[i]->ok && order[i]->rho > order[i - 1]->rho &&
                       order[i]->sup_gamma_diff > order[i - 1]->sup_gamma_diff;

    for (const auto& r : res.records) {
        if (!r.ok) res.failures.push_back("t " + detail::num(r.t) + ": " + r.status);
        else if (!r.interp_holds && r.interp_lhs > 0.0)
            res.failures.push_back("t " + detail::num(r.t) + ": interpolation bound violated");
    }
    const auto& r0 = res.records.front();
    if (r0.ok && !(r0.rho == 0.0 && r0.sup_gamma_diff == 0.0 && r0.sup_u_diff <= cfg.solver.outer_tol))
        res.failures.push_back("identical pair gave nonzero differences");
    if (!res.monotone) res.failures.push_back("rho and sup |gamma difference| are not jointly monotone in t");
    if (!res.fit.valid) res.failures.push_back("stability fit: " + res.fit.note);
    else {
        if (!(res.fit.a > 0.0)) res.failures.push_back("stability fit: a = " + detail::sci(res.fit.a) + " not positive");
        if (!res.fit.dominated) res.failures.push_back("stability fit: points above the fitted curve");
    }
    return res;
}

inline const std::vector<detail::Column>& stability_columns() {
    static const std::vector<detail::Column> cols{
        {"t", "amplitude of the member; 0 is the reference conductivity"},
        {"rho", "weighted operator norm of the DtN difference from the reference"},
        {"sup_gamma_diff", "sup |gamma_ref - gamma_t|"},
        {"sup_u_diff", "sup over the unit disk of |u_ref - u_t| at the probe k"},
        {"cgo_residual", "largest residual of the two CGO solves for the member"},
        {"interp_lhs", "sup |d/dx F| for F = (f_ref - f_t) times a window"},
        {"interp_rhs", "interpolation bound 2 sigma(zeta^-1(|F| / [F_x])) [F_x]"},
        {"interp_holds", "1 if interp_lhs <= interp_rhs"},
        {"ok", "1 if assembly and both CGO solves succeeded"},
        {"fit_valid", "1 if the V(rho) fit had at least 4 usable points"},
        {"fit_c2", "c2 chosen from the grid"},
        {"fit_a", "fitted exponent a"},
        {"fit_c1_ls", "least-squares c1"},
        {"fit_c1", "smallest c1 whose curve dominates every point"},
        {"fit_dominated_ls", "1 if the least-squares curve already dominates"},
        {"v_of_rho", "V(rho) with c1 (nan for rows outside the fit)"},
        {"status", "failure notes; empty on success"},
    };
    return cols;
}

inline void write_stability_csv(std::ostream& os, const StabilityResult& r, bool stamp = true) {
    using detail::num;
    detail::write_header(os, stability_schema, r.config, stamp);
    const auto& cols = stability_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].name;
    os << "\n";
    const ThetaWeight theta(ModulusSpec::log_power(r.config["stability"]["beta"].get<double>()));
    const auto& f = r.fit;
    for (const auto& x : r.records) {
        const double v = f.valid && x.ok && x.rho > 0.0 && x.rho < 1.0 ? f(theta, x.rho) : detail::nan;
        os << num(x.t) << ',' << num(x.rho) << ',' << num(x.sup_gamma_diff) << ',' << num(x.sup_u_diff) << ','
           << num(x.cgo_residual) << ',' << num(x.interp_lhs) << ',' << num(x.interp_rhs) << ',' << x.interp_holds
           << ',' << x.ok << ',' << f.valid << ',' << num(f.c2) << ',' << num(f.a) << ',' << num(f.c1_ls) << ','
           << num(f.c1) << ',' << f.dominated_ls << ',' << num(v) << ',' << detail::csv_text(x.status) << "\n";
    }
}

// --- appendix oracles --------------------------------------------------------------------

struct OracleReport {
    json report;
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

inline OracleReport run_appendix_oracles(const ExperimentConfig& cfg) {
    const auto& oc = cfg.oracles;
    OracleReport out;
    json& rep = out.report;
    rep["schema"] = oracles_schema;
    rep["config"] = to_json(cfg);

    { // oscillatory integral: min of 2 pi - 2 F(s), and F against pi J0(2 pi s)
        const int steps = static_cast<int>(std::floor((oc.s_max - oc.s_min) / oc.s_step + 1e-9));
        std::vector<double> gap(steps + 1), diff(steps + 1);
        parallel_for(gap.size(), cfg.threads, [&](std::size_t i) {
            const double s = oc.s_min + oc.s_step * static_cast<double>(i);
            const double F = oscillatory_integral(s).value;
            gap[i] = 2.0 * PI - 2.0 * F;
            diff[i] = std::abs(F - PI * boost::math::cyl_bessel_j(0, 2.0 * PI * s));
        });
        const auto lo = std::min_element(gap.begin(), gap.end());
        const double worst = *std::max_element(diff.begin(), diff.end());
        const bool pass = *lo >= oc.gap_floor && worst <= oc.bessel_tol;
        rep["oscillatory"] = {{"min_gap", *lo},
                              {"argmin_s", oc.s_min + oc.s_step * static_cast<double>(lo - gap.begin())},
                              {"floor", oc.gap_floor},
                              {"bessel_max_diff", worst},
                              {"samples", gap.size()},
                              {"pass", pass}};
        if (!pass) out.failures.push_back("oscillatory integral sweep");
    }

    { // Fourier decay of the cut-off Cauchy kernel, and its stability under N doubling
        json items = json::array();
        std::vector<KernelDecayReport> lo(oc.kernel_points.size()), hi(oc.kernel_points.size());
        parallel_for(2 * lo.size(), cfg.threads, [&](std::size_t i) {
            const std::size_t p = i / 2;
            const GridSpec g(oc.kernel_n * (i % 2 ? 2 : 1), cfg.grid.half_width);
            (i % 2 ? hi : lo)[p] = kernel_fourier_decay(oc.kernel_points[p], 1e9, g);
        });
        bool all = true;
        for (std::size_t p = 0; p < lo.size(); ++p) {
            const double drift = std::abs(hi[p].sup_ratio / lo[p].sup_ratio - 1.0);
            const bool pass = std::isfinite(lo[p].sup_ratio) && std::isfinite(hi[p].sup_ratio) && drift <= oc.kernel_drift;
            all = all && pass;
            items.push_back({{"z", detail::to_json(oc.kernel_points[p])},
                             {"sup_ratio", lo[p].sup_ratio},
                             {"sup_ratio_doubled", hi[p].sup_ratio},
                             {"drift", drift},
                             {"transform_at_zero", lo[p].at_zero},
                             {"l1_norm", lo[p].l1_norm},
                             {"pass", pass}});
        }
        rep["kernel_decay"] = items;
        if (!all) out.failures.push_back("kernel decay");
    }

    { // I0 / theta band, and its drift when the range is extended
        json items = json::array();
        std::vector<I0Profile> base(oc.betas.size()), ext(oc.betas.size());
        parallel_for(2 * oc.betas.size(), cfg.threads, [&](std::size_t i) {
            const ThetaWeight w(ModulusSpec::log_power(oc.betas[i / 2]));
            const double top = i % 2 ? oc.r_extended : oc.r_max;
            std::vector<double> rs;
            for (double r = oc.r_min; r <= top * (1 + 1e-9); r *= std::sqrt(10.0)) rs.push_back(r);
            (i % 2 ? ext : base)[i / 2] = i0_profile(w, rs, oc.i0_tol);
        });
        bool all = true;
        for (std::size_t b = 0; b < oc.betas.size(); ++b) {
            bool converged = true;
            for (const auto* p : {&base[b], &ext[b]})
                for (const auto& pt : p->points) converged = converged && pt.converged;
            const double drift = std::abs(ext[b].band / base[b].band - 1.0);
            const bool pass = converged && base[b].band > 0.0 && drift <= oc.band_drift;
            all = all && pass;
            json pts = json::array();
            for (const auto& pt : ext[b].points) pts.push_back({{"r", pt.r}, {"ratio", pt.ratio}});
            items.push_back({{"beta", oc.betas[b]},
                             {"band", base[b].band},
                             {"band_extended", ext[b].band},
                             {"ratio_min", base[b].ratio_min},
                             {"ratio_max", base[b].ratio_max},
                             {"drift", drift},
                             {"converged", converged},
                             {"points", pts},
                             {"pass", pass}});
        }
        rep["i0_theta"] = items;
        if (!all) out.failures.push_back("I0 / theta band");
    }

    { // interpolation inequality on random fields, and the Holder exponent
        const GridSpec g(oc.interpolation_n, 2.0);
        std::mt19937_64 rng(cfg.seed);
        std::vector<Field> fields;
        for (int i = 0; i < oc.interpolation_trials; ++i) fields.push_back(random_bump_field(g, rng));
        const auto sigma = ModulusSpec::integrated(oc.interpolation_alpha);
        std::vector<char> holds(fields.size());
        std::vector<double> margin(fields.size());
        parallel_for(fields.size(), cfg.threads, [&](std::size_t i) {
            const auto c = interpolation_bound(fields[i], sigma, i % 2 ? Axis::Y : Axis::X,
                                               default_seminorm_method(g), cfg.seed);
            holds[i] = c.holds();
            margin[i] = c.rhs > 0.0 ? c.lhs / c.rhs : 0.0;
        });
        const int passed = static_cast<int>(std::count(holds.begin(), holds.end(), 1));
        double exp_err = 0.0;
        for (double a : {0.25, 0.5, 0.8})
            for (double x : {1e-3, 1e-6, 1e-9}) {
                const auto h = ModulusSpec::holder(a);
                exp_err = std::max(exp_err, std::abs(std::log(h(invert_r_sigma(h, x))) / std::log(x) - a / (1 + a)));
            }
        const bool pass = passed == oc.interpolation_trials && exp_err <= 1e-12;
        rep["interpolation"] = {{"trials", oc.interpolation_trials},
                                {"passed", passed},
                                {"worst_lhs_over_rhs", *std::max_element(margin.begin(), margin.end())},
                                {"holder_exponent_error", exp_err},
                                {"pass", pass}};
        if (!pass) out.failures.push_back("interpolation inequality");
    }
    rep["pass"] = out.failures.empty();
    return out;
}

// --- files --------------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

} // namespace detail

/// Writes decay.csv, decay_fits.csv and decay.schema.json into dir.
inline void save_decay(const std::filesystem::path& dir, const DecayResult& r) {
    std::filesystem::create_directories(dir);
    auto a = detail::open_out(dir / "decay.csv");
    write_decay_csv(a, r);
    auto b = detail::open_out(dir / "decay_fits.csv");
    write_decay_fits_csv(b, r);
    auto s = detail::open_out(dir / "decay.schema.json");
    json schema = detail::schema_json(decay_schema, decay_columns());
    schema["fits"] = detail::schema_json(decay_schema, decay_fit_columns())["columns"];
    s << schema.dump(2) << "\n";
}

/// Writes stability.csv and stability.schema.json into dir.
inline void save_stability(const std::filesystem::path& dir, const StabilityResult& r) {
    std::filesystem::create_directories(dir);
    auto a = detail::open_out(dir / "stability.csv");
    write_stability_csv(a, r);
    auto s = detail::open_out(dir / "stability.schema.json");
    s << detail::schema_json(stability_schema, stability_columns()).dump(2) << "\n";
}

inline void save_oracles(const std::filesystem::path& dir, const OracleReport& r) {
    std::filesystem::create_directories(dir);
    auto a = detail::open_out(dir / "oracles.json");
    a << r.report.dump(2) << "\n";
}

} // namespace cgolab
