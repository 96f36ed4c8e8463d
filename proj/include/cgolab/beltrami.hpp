#pragma once

// Beltrami coefficients and complex geometric optics solutions.
//
// Everything oscillating at the CGO frequency is kept as a sum of harmonics
//   X(z) = sum_j e_{jk}(z) X_j(z),
// with slowly varying X_j on the grid.  Shifted multipliers act harmonic by
// harmonic, so |k| never has to be resolved by the lattice; pointwise values
// are recovered by evaluating the e_{jk} factors exactly at lattice points.
// Cauchy and Beurling transforms use the truncated kernel, which is exact on
// the disk of radius 1.5 for data in the unit disk; solution samples are
// meaningful there and only there.

#include "cgolab/kernel.hpp"
#include "cgolab/modulus.hpp"
#include "cgolab/spaces.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cgolab {

namespace detail {
inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}
} // namespace detail

struct BeltramiCoefficient {
    Field mu;
    double kappa = 0.0;      ///< sup |mu|
    double gamma_norm = 0.0; ///< sup |mu| + measured C^varpi seminorm
    double alpha = 2.0;      ///< exponent of the log-power modulus varpi
    SeminormReport seminorm;
};

/// Validates support in the unit disk and sup |mu| < 1, and measures the bounds.
inline BeltramiCoefficient make_beltrami(Field mu, double alpha = 2.0, std::uint64_t seed = 0) {
    const auto& g = mu.grid();
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j)
            if (std::abs(g.point(j, m)) >= 1.0 && mu(j, m) != 0.0)
                throw std::invalid_argument("make_beltrami: mu must vanish outside the unit disk");
    BeltramiCoefficient b;
    b.kappa = mu.sup();
    if (!(b.kappa < 1.0)) throw std::invalid_argument("make_beltrami: need sup |mu| < 1");
    b.alpha = alpha;
    b.seminorm = c_modulus_seminorm(mu, ModulusSpec::log_power(alpha), default_seminorm_method(g), seed);
    b.gamma_norm = b.kappa + b.seminorm.value;
    b.mu = std::move(mu);
    return b;
}

inline BeltramiCoefficient mu_from_gamma(const Field& gamma, double alpha = 2.0, std::uint64_t seed = 0) {
    for (auto v : gamma.samples())
        if (!(v.real() > 0.0) || std::abs(v.imag()) > 1e-14 * v.real())
            throw std::invalid_argument("mu_from_gamma: conductivity must be real and positive");
    return make_beltrami(gamma.map([](cplx v) { return (1.0 - v) / (1.0 + v); }), alpha, seed);
}

inline Field gamma_from_mu(const Field& mu) {
    return mu.map([](cplx v) { return (1.0 - v) / (1.0 + v); });
}

/// How the phase equation is solved: Krylov solves the R-linear equation for
/// f = exp(ikz)(1 + w) and takes phi = z + log(1 + w) / (ik); FixedPoint freezes
/// e_{-k}(phi) in an outer loop and iterates the R-linear inner problem.
enum class PhaseMethod { Krylov, FixedPoint };

struct SolverConfig {
    int n_max = 200;
    double tol = 1e-10;
    double kappa1 = 0.0; ///< contraction estimate; 0 means "use sup |mu|"
    int outer_max = 100;
    double outer_tol = 1e-8;
    int harmonics = 8; ///< nonlinear solver keeps e_{jk} for |j| <= harmonics
    int anderson_depth = 6; ///< outer-loop Anderson memory; 0 gives plain (damped) iteration
    bool trace = false;     ///< record the outer update sizes
    PhaseMethod phase_method = PhaseMethod::Krylov;
    int krylov_restart = 80;
    int krylov_max = 4000;

    void validate() const {
        if (!(tol > 0.0) || !(outer_tol > 0.0)) throw std::invalid_argument("SolverConfig: tolerances must be positive");
        if (!(kappa1 >= 0.0 && kappa1 < 1.0)) throw std::invalid_argument("SolverConfig: kappa1 must lie in [0, 1)");
        if (n_max < 1 || outer_max < 1 || harmonics < 1 || anderson_depth < 0 || krylov_restart < 1 || krylov_max < 1)
            throw std::invalid_argument("SolverConfig: caps must be positive");
    }
};

namespace detail {

// Truncated transforms of unit-disk data are exact below this radius.
inline constexpr double exact_radius = 1.5;
// Residual window: 1 inside the first radius, 0 beyond the second.
inline constexpr double check_inner = 1.1, check_outer = 1.45;

struct DiskPoints {
    std::vector<std::size_t> idx;
    std::vector<cplx> z;
};

inline DiskPoints disk_points(const GridSpec& g, double radius, bool closed = false) {
    DiskPoints d;
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) {
            const double r = std::abs(g.point(j, m));
            if (r < radius || (closed && r == radius)) {
                d.idx.push_back(static_cast<std::size_t>(m) * g.n + j);
                d.z.push_back(g.point(j, m));
            }
        }
    return d;
}

inline double subset_norm(const std::vector<cplx>& v, double h) {
    double s = 0.0;
    for (auto x : v) s += std::norm(x);
    return h * std::sqrt(s);
}

} // namespace detail

// --- linear problem ----------------------------------------------------------------

struct CgoLinearSolution {
    Field psi; ///< z + P[dbar psi]; samples valid for |z| < 1.5
    cplx k = 0.0;
    /// Slow factors of the Neumann terms: (aT)^n a = e_{-(n+1)k} * series_terms[n].
    std::vector<Field> series_terms;
    std::vector<double> term_norms;
    double max_ratio = 0.0; ///< largest ratio of consecutive term norms
    double kappa1 = 0.0;
    double residual = 0.0;      ///< windowed relative L2 residual (triangle sum over harmonics)
    double sup_deviation = 0.0; ///< sup |psi - z| over lattice points of the closed unit disk
    bool converged = false;
    std::string status;
};

/// Neumann series for dbar psi = a d psi, a = -(conj k / k) mu e_{-k}.
inline CgoLinearSolution solve_linear_cgo(const BeltramiCoefficient& mu, cplx k, const SolverConfig& cfg = {}) {
    cfg.validate();
    if (k == 0.0) throw std::invalid_argument("solve_linear_cgo: k must be nonzero");
    if (!(mu.kappa < 1.0)) throw std::invalid_argument("solve_linear_cgo: need kappa < 1");
    const auto& g = mu.mu.grid();
    const cplx c = -std::conj(k) / k;
    CgoLinearSolution sol;
    sol.k = k;
    sol.kappa1 = cfg.kappa1 > 0.0 ? cfg.kappa1 : mu.kappa;

    Field slow = mu.mu * c;
    for (int n = 0; n < cfg.n_max; ++n) {
        const double nrm = slow.norm();
        sol.term_norms.push_back(nrm);
        sol.series_terms.push_back(slow);
        if (nrm <= cfg.tol * sol.term_norms.front()) {
            sol.converged = true;
            break;
        }
        slow = apply_shifted(slow, ShiftedKind::Beurling, harmonic_shift(k, -(n + 1)));
        slow *= mu.mu;
        slow *= c;
    }
    const double floor = 1e-13 * sol.term_norms.front();
    for (std::size_t n = 1; n < sol.term_norms.size(); ++n)
        if (sol.term_norms[n - 1] > floor)
            sol.max_ratio = std::max(sol.max_ratio, sol.term_norms[n] / sol.term_norms[n - 1]);
    if (!sol.converged) {
        const std::size_t n = sol.term_norms.size();
        sol.status = "series not converged within n_max; last ratio " +
                     detail::sci(n > 1 ? sol.term_norms[n - 1] / sol.term_norms[n - 2] : 0.0);
    }

    // psi - z = sum_n e_{-(n+1)k} P_{-(n+1)} term_n.  The residual pairs harmonic
    // -(n+1) of dbar psi with harmonic -(n+1) of a d psi, both windowed.
    const Field W = window(g, detail::check_inner, detail::check_outer);
    std::vector<cplx> dev(g.size(), 0.0);
    std::vector<double> theta(g.size());
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) theta[static_cast<std::size_t>(m) * g.n + j] = 2.0 * (k * g.point(j, m)).real();
    const std::size_t terms = sol.series_terms.size();
    double res = 0.0;
    Field prev_d(g); // d psi harmonic of the previous term (harmonic -(n+1) of d psi is D Q_n)
    for (std::size_t n = 0; n <= terms; ++n) {
        Field rhs = n == 0 ? mu.mu * c : prev_d * mu.mu * c; // harmonic -(n+1) of a d psi
        if (n < terms) {
            const cplx shift = harmonic_shift(k, -static_cast<int>(n + 1));
            const auto spec = to_spectral(sol.series_terms[n]);
            auto q = spec, db = spec, dd = spec;
            q.apply([&](cplx z) { return shifted_symbol(ShiftedKind::Cauchy, z + shift); });
            db.apply([&](cplx z) {
                return shifted_symbol(ShiftedKind::DBar, z + shift) * shifted_symbol(ShiftedKind::Cauchy, z + shift);
            });
            dd.apply([&](cplx z) {
                return shifted_symbol(ShiftedKind::D, z + shift) * shifted_symbol(ShiftedKind::Cauchy, z + shift);
            });
            const Field Q = from_spectral(q);
            const double mult = -static_cast<double>(n + 1);
            for (std::size_t i = 0; i < dev.size(); ++i) dev[i] += std::polar(1.0, mult * theta[i]) * Q[i];
            Field r = from_spectral(db) - rhs;
            r *= W;
            res += r.norm();
            prev_d = from_spectral(dd);
        } else {
            rhs *= W;
            res += rhs.norm();
        }
    }
    const double base = mu.mu.norm();
    sol.residual = base > 0.0 ? res / base : 0.0;
    sol.psi = Field(g);
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) {
            const std::size_t i = static_cast<std::size_t>(m) * g.n + j;
            sol.psi[i] = g.point(j, m) + dev[i];
            if (std::abs(g.point(j, m)) <= 1.0) sol.sup_deviation = std::max(sol.sup_deviation, std::abs(dev[i]));
        }
    if (sol.converged && sol.residual > cfg.tol)
        sol.status = "series converged but residual " + detail::sci(sol.residual) + " exceeds tol";
    return sol;
}

/// dbar psi = g_k + h_k with g_k the first n0 Neumann terms; both sampled with their e factors.
inline std::pair<Field, Field> decompose_g_h(const CgoLinearSolution& sol, std::size_t n0) {
    const auto& g = sol.series_terms.front().grid();
    Field gk(g), hk(g);
    for (std::size_t n = 0; n < sol.series_terms.size(); ++n) {
        Field& dst = n < n0 ? gk : hk;
        const auto& t = sol.series_terms[n];
        const cplx kk = -static_cast<double>(n + 1) * sol.k;
        for (int m = 0; m < g.n; ++m)
            for (int j = 0; j < g.n; ++j) dst(j, m) += e_k(kk, g.point(j, m)) * t(j, m);
    }
    return {std::move(gk), std::move(hk)};
}

/// Sum of the L2 norms of the Neumann terms from n0 on (a bound for ||h_k||_2).
inline double series_tail_norm(const CgoLinearSolution& sol, std::size_t n0) {
    double s = 0.0;
    for (std::size_t n = n0; n < sol.term_norms.size(); ++n) s += sol.term_norms[n];
    return s;
}

/// Closed-form tail bound sqrt(pi) kappa kappa1^n0 / (1 - kappa1).
inline double neumann_tail_bound(double kappa, double kappa1, int n0) {
    if (!(kappa1 < 1.0)) throw std::invalid_argument("neumann_tail_bound: kappa1 must be < 1");
    return std::sqrt(PI) * kappa * std::pow(kappa1, n0) / (1.0 - kappa1);
}

namespace detail {

// Polar rule on the disk |xi| < R0: Gauss-Legendre in the radius, trapezoid in angle.
template <class Transform>
double low_frequency_mass(double R0, Transform&& ft) {
    static constexpr double x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                    0.9445750230732326, 0.9894009349916499};
    static constexpr double w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                    0.0622535239386479, 0.0271524594117541};
    const int angles = 96, panels = std::max(2, static_cast<int>(std::ceil(2.0 * R0)));
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = R0 * (p + 0.5) / panels, half = 0.5 * R0 / panels;
        for (int i = 0; i < 16; ++i) {
            const double r = mid + (i < 8 ? -1.0 : 1.0) * half * x[i % 8];
            double ring = 0.0;
            for (int a = 0; a < angles; ++a) ring += std::norm(ft(std::polar(r, 2.0 * PI * a / angles)));
            total += w[i % 8] * half * r * ring * (2.0 * PI / angles);
        }
    }
    return total;
}

// h^2 sum f(z) exp(-2 pi i z.xi) over the nonzero samples.
struct SparseSamples {
    std::vector<cplx> z, v;
    double h2 = 0.0;
    SparseSamples(const Field& f) : h2(f.grid().spacing() * f.grid().spacing()) {
        const auto& g = f.grid();
        for (int m = 0; m < g.n; ++m)
            for (int j = 0; j < g.n; ++j)
                if (f(j, m) != 0.0) {
                    z.push_back(g.point(j, m));
                    v.push_back(f(j, m));
                }
    }
    cplx transform(cplx xi) const {
        cplx s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i)
            s += v[i] * std::polar(1.0, -2.0 * PI * (z[i].real() * xi.real() + z[i].imag() * xi.imag()));
        return h2 * s;
    }
};

} // namespace detail

/// int_{|xi| < R0} |g^(xi)|^2 dxi, with g^ evaluated off the lattice by direct summation.
inline double gk_lowfreq_mass(const Field& gk, double R0) {
    if (!(R0 > 0.0)) throw std::invalid_argument("gk_lowfreq_mass: R0 must be positive");
    const detail::SparseSamples s(gk);
    if (s.z.empty()) return 0.0;
    return detail::low_frequency_mass(R0, [&](cplx xi) { return s.transform(xi); });
}

/// Same mass for g_k = sum_{n < n0} e_{-(n+1)k} term_n, transforming each slow factor at
/// the shifted frequency so the e factors never meet the lattice.
inline double gk_lowfreq_mass(const CgoLinearSolution& sol, std::size_t n0, double R0) {
    if (!(R0 > 0.0)) throw std::invalid_argument("gk_lowfreq_mass: R0 must be positive");
    std::vector<detail::SparseSamples> parts;
    std::vector<cplx> shifts;
    for (std::size_t n = 0; n < std::min(n0, sol.series_terms.size()); ++n) {
        parts.emplace_back(sol.series_terms[n]);
        shifts.push_back(harmonic_shift(sol.k, -static_cast<int>(n + 1)));
    }
    return detail::low_frequency_mass(R0, [&](cplx xi) {
        cplx s = 0.0;
        for (std::size_t n = 0; n < parts.size(); ++n) s += parts[n].transform(xi - shifts[n]);
        return s;
    });
}

// --- nonlinear problem ---------------------------------------------------------------

struct CgoPhase {
    Field phi;     ///< z + epsilon; samples valid for |z| < 1.5
    Field epsilon; ///< phi - z
    cplx k = 0.0;
    int outer_iters = 0;
    int inner_iters = 0; ///< total over all outer steps
    double residual = 0.0;      ///< windowed relative L2 residual of the phase equation
    double last_update = 0.0;   ///< final sup |phi_{m+1} - phi_m| over the unit disk
    double sup_deviation = 0.0; ///< sup |phi - z| over lattice points of the closed unit disk
    double damping = 1.0;
    bool converged = false; ///< updates fell below outer_tol with the inner loop at tol
    std::vector<double> updates; ///< outer update sizes when tracing
    std::string status;

    // Pointwise data on the disk |z| < 1.5 (index into disk_idx).
    std::vector<std::size_t> disk_idx;
    std::vector<cplx> dbar_eps, d_eps; ///< dbar epsilon and d epsilon
};

namespace detail {

// Harmonics j = -J..J of fields on a point set, stored as [j + J][point].
struct Harmonic {
    int J = 0;
    std::vector<std::vector<cplx>> part;
    Harmonic(int J_, std::size_t n) : J(J_), part(2 * J_ + 1, std::vector<cplx>(n, 0.0)) {}
    std::vector<cplx>& operator[](int j) { return part[j + J]; }
    const std::vector<cplx>& operator[](int j) const { return part[j + J]; }
};

// sum_j e_{jk}(z_i) X_j[i] at every point.
inline std::vector<cplx> evaluate(const Harmonic& X, const std::vector<double>& theta) {
    std::vector<cplx> out(theta.size(), 0.0);
    for (int j = -X.J; j <= X.J; ++j) {
        const auto& p = X[j];
        for (std::size_t i = 0; i < out.size(); ++i)
            if (p[i] != 0.0) out[i] += std::polar(1.0, j * theta[i]) * p[i];
    }
    return out;
}

} // namespace detail

/// Phase equation dbar phi = -(conj k / k) mu e_{-k}(phi) conj(d phi), phi = z + O(1/z).
/// Outer loop freezes e_{-k}(phi_m); the inner loop solves q = nu (1 + conj(T q)) for
/// q = dbar phi, and phi_{m+1} = z + P q.
inline CgoPhase solve_phase_fixed_point(const BeltramiCoefficient& mu, cplx k, const SolverConfig& cfg = {}) {
    cfg.validate();
    if (k == 0.0) throw std::invalid_argument("solve_nonlinear_cgo: k must be nonzero");
    if (!(mu.kappa < 1.0)) throw std::invalid_argument("solve_nonlinear_cgo: need kappa < 1");
    const auto& g = mu.mu.grid();
    if (g.half_width < 4.0) throw std::invalid_argument("solve_nonlinear_cgo: grid half-width must be >= 4");
    const double h = g.spacing();
    const int J = cfg.harmonics, M = static_cast<int>(std::bit_ceil(static_cast<unsigned>(4 * J + 4)));
    const cplx c = -std::conj(k) / k;

    CgoPhase out;
    out.k = k;
    const auto disk = detail::disk_points(g, detail::exact_radius);
    const std::size_t np = disk.idx.size();
    out.disk_idx = disk.idx;
    std::vector<double> theta(np), wgt(np);
    std::vector<cplx> mu_d(np);
    std::vector<std::size_t> supp; // positions in disk where mu != 0
    std::vector<char> in_unit(np);
    for (std::size_t i = 0; i < np; ++i) {
        theta[i] = 2.0 * (k * disk.z[i]).real();
        wgt[i] = radial_cutoff(std::abs(disk.z[i]), detail::check_inner, detail::check_outer);
        mu_d[i] = mu.mu[disk.idx[i]];
        if (mu_d[i] != 0.0) supp.push_back(i);
        in_unit[i] = std::abs(disk.z[i]) <= 1.0;
    }
    auto scatter = [&](const std::vector<cplx>& v) {
        Field f(g);
        for (std::size_t i = 0; i < np; ++i) f[disk.idx[i]] = v[i];
        return f;
    };
    auto gather = [&](const Field& f, std::vector<cplx>& v) {
        for (std::size_t i = 0; i < np; ++i) v[i] = f[disk.idx[i]];
    };
    auto norm_of = [&](const std::vector<cplx>& v) { return detail::subset_norm(v, h); };

    // Tabulated shifted Beurling symbols, built on first use per harmonic.
    std::vector<std::vector<cplx>> tsym(2 * J + 1);
    auto apply_T = [&](int j, const std::vector<cplx>& in, std::vector<cplx>& res) {
        auto& sym = tsym[j + J];
        if (sym.empty()) {
            sym.resize(g.size());
            const cplx s = harmonic_shift(k, j);
            for (int m = 0; m < g.n; ++m)
                for (int jj = 0; jj < g.n; ++jj)
                    sym[static_cast<std::size_t>(m) * g.n + jj] = shifted_symbol(ShiftedKind::Beurling, g.zeta(jj, m) + s);
        }
        auto spec = to_spectral(scatter(in));
        auto& co = spec.coefficients();
        for (std::size_t i = 0; i < co.size(); ++i) co[i] *= sym[i];
        gather(from_spectral(spec), res);
    };

    // exp(-2i Re(k eps)) as harmonics, sampled at M values of the fast phase.
    std::vector<std::vector<cplx>> tw(2 * J + 1, std::vector<cplx>(M));
    for (int j = -J; j <= J; ++j)
        for (int l = 0; l < M; ++l) tw[j + J][l] = std::polar(1.0, 2.0 * PI * j * l / M);
    auto phase_factor = [&](const detail::Harmonic& eps) {
        detail::Harmonic E(J, np);
        std::vector<cplx> val(M);
        for (std::size_t i : supp) {
            for (int l = 0; l < M; ++l) {
                cplx v = 0.0;
                for (int j = -J; j <= J; ++j) v += eps[j][i] * tw[j + J][l];
                val[l] = std::polar(1.0, -2.0 * (k * v).real());
            }
            for (int j = -J; j <= J; ++j) {
                cplx s = 0.0;
                for (int l = 0; l < M; ++l) s += val[l] * std::conj(tw[j + J][l]);
                E[j][i] = s / static_cast<double>(M);
            }
        }
        return E;
    };
    // nu = c mu e_{-k} E: harmonic j of nu is c mu E_{j+1}.
    auto coefficient = [&](const detail::Harmonic& E) {
        detail::Harmonic nu(J, np);
        for (int j = -J; j < J; ++j)
            for (std::size_t i : supp) nu[j][i] = c * mu_d[i] * E[j + 1][i];
        return nu;
    };
    // nu (1 + conj X): conj moves harmonic b to -b.
    auto beltrami_rhs = [&](const detail::Harmonic& nu, const detail::Harmonic& X) {
        detail::Harmonic r(J, np);
        for (std::size_t i : supp) {
            for (int a = -J; a <= J; ++a) {
                const cplx na = nu[a][i];
                if (na == 0.0) continue;
                for (int b = -J; b <= J; ++b) {
                    const int jj = a + b;
                    if (jj < -J || jj > J) continue;
                    cplx cb = std::conj(X[-b][i]);
                    if (b == 0) cb += 1.0;
                    r[jj][i] += na * cb;
                }
            }
        }
        return r;
    };
    auto total_norm = [&](const detail::Harmonic& X) {
        double s = 0.0;
        for (auto& p : X.part) s += norm_of(p);
        return s;
    };

    detail::Harmonic q(J, np), Tq(J, np), eps(J, np);
    std::vector<Field> eps_full(2 * J + 1, Field(g));
    const double mu_norm = mu.mu.norm();

    auto certify = [&]() {
        // Spectral dbar and d of each epsilon harmonic, against nu(eps)(1 + conj d eps).
        detail::Harmonic db(J, np), dd(J, np);
        for (int j = -J; j <= J; ++j) {
            if (norm_of(eps[j]) == 0.0) continue;
            const cplx s = harmonic_shift(k, j);
            const auto spec = to_spectral(eps_full[j + J]);
            auto a = spec, b = spec;
            a.apply([&](cplx z) { return shifted_symbol(ShiftedKind::DBar, z + s); });
            b.apply([&](cplx z) { return shifted_symbol(ShiftedKind::D, z + s); });
            gather(from_spectral(a), db[j]);
            gather(from_spectral(b), dd[j]);
        }
        const auto rhs = beltrami_rhs(coefficient(phase_factor(eps)), dd);
        double res = 0.0;
        std::vector<cplx> r(np);
        for (int j = -J; j <= J; ++j) {
            for (std::size_t i = 0; i < np; ++i) r[i] = wgt[i] * (db[j][i] - rhs[j][i]);
            res += norm_of(r);
        }
        out.dbar_eps = detail::evaluate(db, theta);
        out.d_eps = detail::evaluate(dd, theta);
        return mu_norm > 0.0 ? res / mu_norm : 0.0;
    };

    // eps = P q, harmonic-wise.
    auto phase_from = [&](const detail::Harmonic& qq) {
        for (int j = -J; j <= J; ++j) {
            eps_full[j + J] = norm_of(qq[j]) != 0.0 ? apply_shifted(scatter(qq[j]), ShiftedKind::Cauchy, harmonic_shift(k, j))
                                                    : Field(g);
            gather(eps_full[j + J], eps[j]);
        }
    };
    // q <- nu (1 + conj(T q)) until the relative change drops below inner_tol.
    auto inner_solve = [&](const detail::Harmonic& nu, detail::Harmonic& qq, double inner_tol) {
        for (int it = 0; it < cfg.n_max; ++it) {
            ++out.inner_iters;
            const double scale = total_norm(qq);
            for (int j = -J; j <= J; ++j) {
                if (norm_of(qq[j]) <= 1e-15 * scale) {
                    std::fill(Tq[j].begin(), Tq[j].end(), 0.0);
                    continue;
                }
                apply_T(j, qq[j], Tq[j]);
            }
            auto qn = beltrami_rhs(nu, Tq);
            double change = 0.0;
            std::vector<cplx> d(np);
            for (int j = -J; j <= J; ++j) {
                for (std::size_t i = 0; i < np; ++i) d[i] = qn[j][i] - qq[j][i];
                change += norm_of(d);
            }
            const double size = total_norm(qn);
            qq = std::move(qn);
            if (size == 0.0 || change <= inner_tol * size) return true;
        }
        return false;
    };

    // Outer iterates live on the support of mu; Anderson mixing on those vectors.
    const std::size_t ns = supp.size(), H = static_cast<std::size_t>(2 * J + 1);
    auto pack = [&](const detail::Harmonic& X) {
        Eigen::VectorXcd v(H * ns);
        for (int j = -J; j <= J; ++j)
            for (std::size_t a = 0; a < ns; ++a) v[static_cast<Eigen::Index>((j + J) * ns + a)] = X[j][supp[a]];
        return v;
    };
    auto unpack = [&](const Eigen::VectorXcd& v, detail::Harmonic& X) {
        for (int j = -J; j <= J; ++j)
            for (std::size_t a = 0; a < ns; ++a) X[j][supp[a]] = v[static_cast<Eigen::Index>((j + J) * ns + a)];
    };
    std::deque<Eigen::VectorXcd> dF, dG;
    Eigen::VectorXcd f_prev, g_prev;

    std::vector<cplx> prev_vals = detail::evaluate(eps, theta);
    double prev_update = INFINITY;
    int growth = 0;
    bool inner_failed = false, certified = false;
    int settle = 0;
    for (int outer = 1; outer <= cfg.outer_max; ++outer) {
        out.outer_iters = outer;
        const auto nu = coefficient(phase_factor(eps));
        // Inexact inner solves while the phase is still moving.
        const double inner_tol = std::max(cfg.tol, std::min(1e-3, 1e-2 * prev_update));
        detail::Harmonic qg = q;
        if (!inner_solve(nu, qg, inner_tol)) inner_failed = true;
        const bool inner_exact = inner_tol == cfg.tol;

        const Eigen::VectorXcd x = pack(q), gx = pack(qg), f = gx - x;
        Eigen::VectorXcd next;
        if (cfg.anderson_depth > 0) {
            if (f_prev.size() == f.size()) {
                dF.push_back(f - f_prev);
                dG.push_back(gx - g_prev);
                if (static_cast<int>(dF.size()) > cfg.anderson_depth) {
                    dF.pop_front();
                    dG.pop_front();
                }
            }
            next = gx;
            if (!dF.empty()) {
                Eigen::MatrixXcd A(f.size(), static_cast<Eigen::Index>(dF.size())), B(A.rows(), A.cols());
                for (std::size_t c2 = 0; c2 < dF.size(); ++c2) {
                    A.col(static_cast<Eigen::Index>(c2)) = dF[c2];
                    B.col(static_cast<Eigen::Index>(c2)) = dG[c2];
                }
                Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
                qr.setThreshold(1e-12);
                next -= B * qr.solve(f);
            }
            f_prev = f;
            g_prev = gx;
        } else {
            // Fall back to half steps once the update grows twice in a row.
            if (growth >= 2 && out.damping == 1.0) out.damping = 0.5;
            next = x + out.damping * f;
        }
        unpack(next, q);
        phase_from(q);

        const auto vals = detail::evaluate(eps, theta);
        double update = 0.0;
        for (std::size_t i = 0; i < np; ++i)
            if (in_unit[i]) update = std::max(update, std::abs(vals[i] - prev_vals[i]));
        prev_vals = vals;
        growth = update > prev_update ? growth + 1 : 0;
        prev_update = update;
        out.last_update = update;
        if (cfg.trace) out.updates.push_back(update);
        if (update < cfg.outer_tol && inner_exact) {
            out.converged = !inner_failed;
            // The residual responds to phase errors with a factor ~2|k|; keep going until it
            // is certified or the updates reach round-off scale.
            out.residual = certify();
            certified = true;
            if (out.residual <= cfg.outer_tol || update < 1e-3 * cfg.outer_tol) break;
        }
        if (out.converged && ++settle > 10) {
            // Updates stagnate at the discretization floor.
            out.residual = certify();
            certified = true;
            break;
        }
    }
    if (!certified) out.residual = certify();
    if (inner_failed) out.status = "inner iteration hit n_max";
    else if (!out.converged)
        out.status = "outer iteration not converged; last update " + detail::sci(out.last_update);
    else if (out.residual > cfg.outer_tol)
        out.status = "converged; residual " + detail::sci(out.residual) + " above outer_tol";

    // Pointwise phase on the whole grid.
    out.epsilon = Field(g);
    for (int m = 0; m < g.n; ++m)
        for (int jj = 0; jj < g.n; ++jj) {
            const std::size_t i = static_cast<std::size_t>(m) * g.n + jj;
            const double th = 2.0 * (k * g.point(jj, m)).real();
            cplx v = 0.0;
            for (int j = -J; j <= J; ++j)
                if (eps_full[j + J][i] != 0.0) v += std::polar(1.0, j * th) * eps_full[j + J][i];
            out.epsilon[i] = v;
            if (std::abs(g.point(jj, m)) <= 1.0) out.sup_deviation = std::max(out.sup_deviation, std::abs(v));
        }
    out.phi = out.epsilon;
    for (int m = 0; m < g.n; ++m)
        for (int jj = 0; jj < g.n; ++jj) out.phi(jj, m) += g.point(jj, m);
    return out;
}

namespace detail {

struct KrylovResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    std::vector<double> history;
};

// Restarted GMRES for x - A x = b over real vectors (A may be only R-linear on the
// complex data it packs).  Modified Gram-Schmidt with one reorthogonalization pass.
template <class Op>
KrylovResult gmres(Op&& apply_A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int restart, int max_iter,
                   bool trace) {
    KrylovResult out;
    const double bn = b.norm();
    if (bn == 0.0) {
        x.setZero();
        out.converged = true;
        return out;
    }
    auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return v - apply_A(v); };
    const Eigen::Index n = b.size();
    Eigen::MatrixXd V(n, restart + 1), Hm(restart + 1, restart);
    Eigen::VectorXd cs(restart), sn(restart), s(restart + 1);
    Eigen::VectorXd r = b - op(x);
    out.relative_residual = r.norm() / bn;
    while (out.relative_residual > tol && out.iterations < max_iter) {
        const double beta = r.norm();
        V.col(0) = r / beta;
        Hm.setZero();
        s.setZero();
        s[0] = beta;
        int j = 0;
        while (j < restart && out.iterations < max_iter) {
            ++out.iterations;
            Eigen::VectorXd w = op(V.col(j));
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i) {
                    const double d = V.col(i).dot(w);
                    Hm(i, j) += d;
                    w -= d * V.col(i);
                }
            Hm(j + 1, j) = w.norm();
            if (Hm(j + 1, j) > 0.0) V.col(j + 1) = w / Hm(j + 1, j);
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * Hm(i, j) + sn[i] * Hm(i + 1, j);
                Hm(i + 1, j) = -sn[i] * Hm(i, j) + cs[i] * Hm(i + 1, j);
                Hm(i, j) = t;
            }
            const double den = std::hypot(Hm(j, j), Hm(j + 1, j));
            cs[j] = Hm(j, j) / den;
            sn[j] = Hm(j + 1, j) / den;
            Hm(j, j) = den;
            Hm(j + 1, j) = 0.0;
            s[j + 1] = -sn[j] * s[j];
            s[j] *= cs[j];
            ++j;
            const double est = std::abs(s[j]) / bn;
            if (trace) out.history.push_back(est);
            if (est <= tol) break;
        }
        const Eigen::VectorXd y = Hm.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(s.head(j));
        x += V.leftCols(j) * y;
        r = b - op(x);
        out.relative_residual = r.norm() / bn;
    }
    out.converged = out.relative_residual <= tol;
    return out;
}

} // namespace detail

/// The CGO solution written as f = exp(ikz)(1 + w) turns the phase equation into the
/// R-linear problem dbar w = mu e_{-k} conj(ik(1 + w) + d w).  With q = dbar w only the
/// harmonics 0 and -1 occur, q = Q0 + e_{-k} Q1:
///   Q1 = mu (-i conj k)(1 + conj(P Q0)) + mu conj(T Q0)
///   Q0 = mu (-i conj k) conj(P_{-1} Q1) + mu conj(T_{-1} Q1)
/// which is solved by GMRES on the support of mu.  Then phi = z + log(1 + w) / (ik).
inline CgoPhase solve_phase_krylov(const BeltramiCoefficient& mu, cplx k, const SolverConfig& cfg = {}) {
    cfg.validate();
    if (k == 0.0) throw std::invalid_argument("solve_nonlinear_cgo: k must be nonzero");
    if (!(mu.kappa < 1.0)) throw std::invalid_argument("solve_nonlinear_cgo: need kappa < 1");
    const auto& g = mu.mu.grid();
    if (g.half_width < 4.0) throw std::invalid_argument("solve_nonlinear_cgo: grid half-width must be >= 4");
    const double h = g.spacing();
    const cplx mik = -I * std::conj(k);

    CgoPhase out;
    out.k = k;
    std::vector<std::size_t> supp;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (mu.mu[i] != 0.0) supp.push_back(i);
    const std::size_t ns = supp.size();

    // Symbols at shifts 0 and -conj(k)/pi: Cauchy, Beurling and dbar of Cauchy.
    struct Symbols {
        std::vector<cplx> P, T, DbP;
    };
    auto tabulate = [&](cplx shift) {
        Symbols sy;
        sy.P.resize(g.size());
        sy.T.resize(g.size());
        sy.DbP.resize(g.size());
        for (int m = 0; m < g.n; ++m)
            for (int j = 0; j < g.n; ++j) {
                const std::size_t i = static_cast<std::size_t>(m) * g.n + j;
                const cplx z = g.zeta(j, m) + shift;
                sy.P[i] = shifted_symbol(ShiftedKind::Cauchy, z);
                sy.T[i] = shifted_symbol(ShiftedKind::Beurling, z);
                sy.DbP[i] = shifted_symbol(ShiftedKind::DBar, z) * sy.P[i];
            }
        return sy;
    };
    const Symbols s0 = tabulate(0.0), s1 = tabulate(harmonic_shift(k, -1));

    auto scatter = [&](const Eigen::VectorXd& v, std::size_t block) {
        Field f(g);
        for (std::size_t a = 0; a < ns; ++a)
            f[supp[a]] = cplx(v[static_cast<Eigen::Index>(2 * (block * ns + a))],
                              v[static_cast<Eigen::Index>(2 * (block * ns + a) + 1)]);
        return f;
    };
    auto multiply = [&](const SpectralField& sp, const std::vector<cplx>& sym) {
        auto c = sp;
        auto& co = c.coefficients();
        for (std::size_t i = 0; i < co.size(); ++i) co[i] *= sym[i];
        return from_spectral(c);
    };
    auto put = [&](Eigen::VectorXd& v, std::size_t block, std::size_t a, cplx z) {
        v[static_cast<Eigen::Index>(2 * (block * ns + a))] = z.real();
        v[static_cast<Eigen::Index>(2 * (block * ns + a) + 1)] = z.imag();
    };
    // Block 0 holds Q0, block 1 holds Q1 (the e_{-k} harmonic).
    auto apply_A = [&](const Eigen::VectorXd& v) {
        const auto sp0 = to_spectral(scatter(v, 0)), sp1 = to_spectral(scatter(v, 1));
        const Field P0 = multiply(sp0, s0.P), T0 = multiply(sp0, s0.T);
        const Field P1 = multiply(sp1, s1.P), T1 = multiply(sp1, s1.T);
        Eigen::VectorXd r(v.size());
        for (std::size_t a = 0; a < ns; ++a) {
            const std::size_t i = supp[a];
            put(r, 0, a, mu.mu[i] * (mik * std::conj(P1[i]) + std::conj(T1[i])));
            put(r, 1, a, mu.mu[i] * (mik * std::conj(P0[i]) + std::conj(T0[i])));
        }
        return r;
    };
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(4 * ns)), x = b;
    for (std::size_t a = 0; a < ns; ++a) put(b, 1, a, mu.mu[supp[a]] * mik);
    const auto kr = detail::gmres(apply_A, b, x, cfg.tol, cfg.krylov_restart, cfg.krylov_max, cfg.trace);
    out.outer_iters = kr.iterations;
    out.last_update = kr.relative_residual;
    out.converged = kr.converged;
    out.updates = kr.history;

    // w and its derivatives on the whole grid, harmonic by harmonic.
    const auto sp0 = to_spectral(scatter(x, 0)), sp1 = to_spectral(scatter(x, 1));
    const Field W0 = multiply(sp0, s0.P), DW0 = multiply(sp0, s0.T), DbW0 = multiply(sp0, s0.DbP);
    const Field W1 = multiply(sp1, s1.P), DW1 = multiply(sp1, s1.T), DbW1 = multiply(sp1, s1.DbP);

    const auto disk = detail::disk_points(g, detail::exact_radius);
    out.disk_idx = disk.idx;
    out.dbar_eps.resize(disk.idx.size());
    out.d_eps.resize(disk.idx.size());
    out.epsilon = Field(g);
    out.phi = Field(g);
    const cplx ik = I * k;
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) {
            const std::size_t i = static_cast<std::size_t>(m) * g.n + j;
            const cplx z = g.point(j, m);
            const cplx w = W0[i] + e_k(-k, z) * W1[i];
            out.epsilon[i] = std::log(1.0 + w) / ik;
            out.phi[i] = z + out.epsilon[i];
            if (std::abs(z) <= 1.0) out.sup_deviation = std::max(out.sup_deviation, std::abs(out.epsilon[i]));
        }
    // Certificate: phase-equation residual r_w / (ik (1 + w)) on the disk, windowed.
    double res = 0.0;
    for (std::size_t a = 0; a < disk.idx.size(); ++a) {
        const std::size_t i = disk.idx[a];
        const cplx z = disk.z[a], e = e_k(-k, z);
        const cplx one_w = 1.0 + W0[i] + e * W1[i];
        const cplx dw = DW0[i] + e * DW1[i], dbw = DbW0[i] + e * DbW1[i];
        const cplx r0 = DbW0[i] - mu.mu[i] * (mik * std::conj(W1[i]) + std::conj(DW1[i]));
        const cplx r1 = DbW1[i] - mu.mu[i] * (mik * (1.0 + std::conj(W0[i])) + std::conj(DW0[i]));
        const double wt = radial_cutoff(std::abs(z), detail::check_inner, detail::check_outer);
        res += std::norm(wt * (r0 + e * r1) / (ik * one_w));
        out.dbar_eps[a] = dbw / (ik * one_w);
        out.d_eps[a] = dw / (ik * one_w);
    }
    const double mu_norm = mu.mu.norm();
    out.residual = mu_norm > 0.0 ? h * std::sqrt(res) / mu_norm : 0.0;
    if (!out.converged)
        out.status = "Krylov iteration not converged; relative residual " + detail::sci(kr.relative_residual);
    else if (out.residual > cfg.outer_tol)
        out.status = "converged; residual " + detail::sci(out.residual) + " above outer_tol";
    return out;
}

inline CgoPhase solve_nonlinear_cgo(const BeltramiCoefficient& mu, cplx k, const SolverConfig& cfg = {}) {
    return cfg.phase_method == PhaseMethod::Krylov ? solve_phase_krylov(mu, k, cfg)
                                                   : solve_phase_fixed_point(mu, k, cfg);
}

/// f = exp(i k phi).
inline Field cgo_f(const CgoPhase& p) {
    return p.phi.map([k = p.k](cplx v) { return std::exp(I * k * v); });
}

// --- decay profile ---------------------------------------------------------------------

enum class CgoKind { Linear, Nonlinear };

struct LinearFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    bool valid = false;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    LinearFit f;
    const std::size_t n = x.size();
    if (n < 2) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    f.valid = true;
    return f;
}

struct DecayPoint {
    double k_abs = 0.0;
    double deviation = 0.0;
    double residual = 0.0;
    bool ok = true;
    std::string status;
};

struct DecayProfile {
    std::vector<DecayPoint> points;
    LinearFit theta_fit; ///< log deviation against log theta(|k|)
    LinearFit power_fit; ///< log deviation against log |k|
    double a = 0.0;      ///< -theta_fit.slope

    /// Each deviation at most (1 + ripple) times the previous one.
    bool nonincreasing(double ripple = 0.1) const {
        for (std::size_t i = 1; i < points.size(); ++i)
            if (points[i].deviation > (1.0 + ripple) * points[i - 1].deviation) return false;
        return true;
    }
};

/// Fits log deviation against log theta(|k|) (omega = |log r|^-beta) and against log |k|,
/// over the points that converged with a nonzero deviation and |k| > 1.
inline void fit_decay(DecayProfile& prof, double beta = 1.2) {
    const ThetaWeight theta(ModulusSpec::log_power(beta));
    std::vector<double> lt, lk, ld;
    for (const auto& p : prof.points)
        if (p.ok && p.deviation > 0.0 && p.k_abs > 1.0) {
            lt.push_back(std::log(theta(p.k_abs)));
            lk.push_back(std::log(p.k_abs));
            ld.push_back(std::log(p.deviation));
        }
    prof.theta_fit = fit_line(lt, ld);
    prof.power_fit = fit_line(lk, ld);
    prof.a = prof.theta_fit.valid ? -prof.theta_fit.slope : 0.0;
}

inline DecayProfile cgo_decay_profile(const BeltramiCoefficient& mu, std::span<const cplx> ks, CgoKind which,
                                      const SolverConfig& cfg = {}, double beta = 1.2) {
    DecayProfile prof;
    for (cplx k : ks) {
        if (k == 0.0) throw std::invalid_argument("cgo_decay_profile: k must be nonzero");
        DecayPoint p;
        p.k_abs = std::abs(k);
        try {
            if (which == CgoKind::Linear) {
                const auto s = solve_linear_cgo(mu, k, cfg);
                p.deviation = s.sup_deviation;
                p.residual = s.residual;
                p.ok = s.converged;
                p.status = s.status;
            } else {
                const auto s = solve_nonlinear_cgo(mu, k, cfg);
                p.deviation = s.sup_deviation;
                p.residual = s.residual;
                p.ok = s.converged;
                p.status = s.status;
            }
        } catch (const std::exception& e) {
            p.ok = false;
            p.status = e.what();
        }
        prof.points.push_back(p);
    }
    fit_decay(prof, beta);
    return prof;
}

// --- regularity and recovery --------------------------------------------------------------

struct RegularityReport {
    double c1sigma_norm = 0.0; ///< sup|f| + sup|df| + sup|dbar f| + [df]_sigma + [dbar f]_sigma on the unit disk
    double jacobian_min = 0.0; ///< inf over the unit disk of |df|^2 - |dbar f|^2
    double sup_f = 0.0, sup_df = 0.0, sup_dbar_f = 0.0;
    double seminorm_df = 0.0, seminorm_dbar_f = 0.0;
};

/// Derivatives of f = e^{ik phi}: df = ik f (1 + d eps), dbar f = ik f dbar eps.
inline std::pair<Field, Field> cgo_f_derivatives(const CgoPhase& p) {
    const auto& g = p.phi.grid();
    Field df(g), dbf(g);
    for (std::size_t i = 0; i < p.disk_idx.size(); ++i) {
        const std::size_t a = p.disk_idx[i];
        const cplx f = std::exp(I * p.k * p.phi[a]);
        df[a] = I * p.k * f * (1.0 + p.d_eps[i]);
        dbf[a] = I * p.k * f * p.dbar_eps[i];
    }
    return {std::move(df), std::move(dbf)};
}

inline RegularityReport cgo_regularity_check(const CgoPhase& p, const ModulusSpec& sigma, std::uint64_t seed = 0) {
    const auto& g = p.phi.grid();
    const auto [df, dbf] = cgo_f_derivatives(p);
    RegularityReport r;
    r.jacobian_min = INFINITY;
    for (std::size_t a : p.disk_idx) {
        const cplx z = g.point(static_cast<int>(a % g.n), static_cast<int>(a / g.n));
        if (std::abs(z) > 1.0) continue;
        r.sup_f = std::max(r.sup_f, std::abs(std::exp(I * p.k * p.phi[a])));
        r.sup_df = std::max(r.sup_df, std::abs(df[a]));
        r.sup_dbar_f = std::max(r.sup_dbar_f, std::abs(dbf[a]));
        r.jacobian_min = std::min(r.jacobian_min, std::norm(df[a]) - std::norm(dbf[a]));
    }
    const auto method = default_seminorm_method(g);
    r.seminorm_df = c_modulus_seminorm(df, sigma, method, seed, 1.0).value;
    r.seminorm_dbar_f = c_modulus_seminorm(dbf, sigma, method, seed, 1.0).value;
    r.c1sigma_norm = r.sup_f + r.sup_df + r.sup_dbar_f + r.seminorm_df + r.seminorm_dbar_f;
    return r;
}

struct RecoveredMu {
    Field mu;
    std::vector<char> suppressed; ///< 1 where the quotient was not formed
};

/// mu = dbar f / conj(d f) where |d f| >= floor.  With k given, f is first divided by
/// exp(ikz) so the spectral derivatives see a bounded factor:
///   dbar f = exp(ikz) dbar u,   d f = exp(ikz) (ik u + d u).
/// Derivatives are taken of W u with W = 1 on |z| <= inner and 0 beyond outer; points
/// outside the inner disk are suppressed.
inline RecoveredMu recover_mu(const Field& f, double floor, cplx k = 0.0, double inner = 1.0,
                              double outer = detail::check_outer) {
    const auto& g = f.grid();
    Field u = f;
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) u(j, m) *= std::exp(-I * k * g.point(j, m));
    u *= window(g, inner, outer);
    const Field dbu = d_bar(u), du = d(u);
    RecoveredMu r{Field(g), std::vector<char>(g.size(), 1)};
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) {
            const std::size_t i = static_cast<std::size_t>(m) * g.n + j;
            const cplx z = g.point(j, m);
            if (std::abs(z) > inner) continue;
            const cplx e = std::exp(I * k * z);
            const cplx df = e * (I * k * u[i] + du[i]);
            if (std::abs(df) < floor) continue;
            r.mu[i] = e * dbu[i] / std::conj(df);
            r.suppressed[i] = 0;
        }
    return r;
}

} // namespace cgolab
