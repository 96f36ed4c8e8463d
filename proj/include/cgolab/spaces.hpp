#pragma once

// Norms, seminorms and the analytic checks attached to the weighted space
// W^{theta,2}: L2 modulus, theta-weighted spectral norms, the I0/theta
// comparison, discrete C^omega seminorms, the interpolation inequality for
// derivatives, the oscillatory integral int_0^pi cos(2 pi s cos t) dt, and the
// Fourier decay of the cut-off Cauchy kernel.

#include "cgolab/field.hpp"
#include "cgolab/modulus.hpp"
#include "cgolab/quadrature.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace cgolab {

// --- L2 modulus -----------------------------------------------------------

namespace detail {
inline int lattice_steps(double v, double h) {
    const double q = v / h, r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
        throw std::invalid_argument("l2_modulus: shift is not a lattice vector");
    return static_cast<int>(r);
}
} // namespace detail

/// ||f(. + y) - f||_2 with periodic shift; y must be a lattice vector.
inline double l2_modulus(const Field& f, cplx y) {
    const double h = f.grid().spacing();
    const int dj = detail::lattice_steps(y.real(), h), dm = detail::lattice_steps(y.imag(), h);
    return (f.shifted(dj, dm) - f).norm();
}

/// Same quantity through Plancherel: ||(e^{2 pi i y.xi} - 1) f^||.
inline double l2_modulus_spectral(const Field& f, cplx y) {
    const auto& g = f.grid();
    detail::lattice_steps(y.real(), g.spacing());
    detail::lattice_steps(y.imag(), g.spacing());
    const auto s = to_spectral(f);
    double sum = 0.0;
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) {
            const cplx z = g.zeta(j, m);
            const double phase = 2.0 * PI * (y.real() * z.real() + y.imag() * z.imag());
            sum += std::norm((std::polar(1.0, phase) - 1.0) * s(j, m));
        }
    return g.spacing() * std::sqrt(sum);
}

// --- weighted spectral norms ----------------------------------------------

/// sqrt( int |f^|^2 (1 + theta(|xi|)) dxi ), discretized as h^2 sum |c|^2 (...).
inline double w_theta_norm(const Field& f, const ThetaWeight& w) {
    const auto& g = f.grid();
    const auto s = to_spectral(f);
    double sum = 0.0;
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) sum += std::norm(s(j, m)) * (1.0 + w(std::abs(g.zeta(j, m))));
    return g.spacing() * std::sqrt(sum);
}

/// int_{|xi| >= R0} |f^|^2 theta(|xi|)^nu dxi.
inline double spectral_tail(const Field& f, const ThetaWeight& w, double R0, double nu) {
    if (!(R0 > 1.0)) throw std::invalid_argument("spectral_tail: R0 must exceed 1");
    if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("spectral_tail: nu must lie in [0, 1]");
    const auto& g = f.grid();
    const auto s = to_spectral(f);
    double sum = 0.0;
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) {
            const double r = std::abs(g.zeta(j, m));
            if (r >= R0) sum += std::norm(s(j, m)) * (nu == 0.0 ? 1.0 : std::pow(w(r), nu));
        }
    return g.spacing() * g.spacing() * sum;
}

// --- I0 versus theta --------------------------------------------------------

enum class Axis { X, Y };

struct I0Point {
    double r = 0.0;
    double i0 = 0.0;
    double theta = 0.0;
    double ratio = 0.0; ///< I0 / theta (infinite when theta = 0)
    double error = 0.0;
    bool converged = true;
};

struct I0Profile {
    std::vector<I0Point> points;
    double ratio_min = 0.0, ratio_max = 0.0;
    /// Largest c with c <= I0/theta <= 1/c on the profile.
    double band = 0.0;
};

namespace detail {

// Above this radius the angular integral is replaced by its closed form
// 4 pi (1 - J0(2 pi t)).
inline constexpr double i0_angular_cutoff = 50.0;

inline double angular_integral(double t, Axis axis, double tol) {
    auto f = [&](double phi) {
        const double c = axis == Axis::X ? std::cos(phi) : std::sin(phi);
        return 2.0 * (1.0 - std::cos(2.0 * PI * t * c));
    };
    const int panels = 4 + 4 * static_cast<int>(std::ceil(t));
    QuadResult q;
    for (int p = 0; p < panels; ++p)
        q += integrate(f, 2.0 * PI * p / panels, 2.0 * PI * (p + 1) / panels, tol, 200, 1e-15);
    return q.value;
}

// int_a^b J0(2 pi t) g(t) dt for smooth g: unit panels near a, then one
// integration by parts, d/dt[t J1(2 pi t)] = 2 pi t J0(2 pi t), whose
// remainder is O(t^-5/2) and dropped.
template <class G>
double oscillatory_j0(G&& g, double a, double b) {
    constexpr double direct_span = 2000.0;
    auto f = [&](double t) { return boost::math::cyl_bessel_j(0, 2.0 * PI * t) * g(t); };
    auto boundary = [&](double t) { return boost::math::cyl_bessel_j(1, 2.0 * PI * t) * g(t) / (2.0 * PI); };
    if (std::isfinite(b) && b - a <= 2.0 * direct_span)
        return gauss_legendre_panels(f, a, b, std::max(4, static_cast<int>(std::ceil(b - a))));
    const double c = a + direct_span;
    double v = gauss_legendre_panels(f, a, c, static_cast<int>(direct_span));
    v -= boundary(c);
    if (std::isfinite(b)) v += boundary(b);
    return v;
}

} // namespace detail

/// I0(r) = int_{R^2} |e^{-2 pi i xi.y} - 1|^2 / (|y|^2 tilde_omega(|y|)^2) dy at xi = r * axis.
/// With t = r|y| the integrand becomes A(t) / (t tilde_omega(t/r)^2), A the
/// angular integral, computed adaptively for t below the cutoff.
inline QuadResult i0_value(const ThetaWeight& w, double r, Axis axis = Axis::X, double tol = 1e-6) {
    if (!(r > 0.0)) throw std::invalid_argument("i0_value: r must be positive");
    const ModulusSpec& om = w.base();
    const double T0 = detail::i0_angular_cutoff;
    auto g = [&](double t) {
        const double o = eval_tilde_omega(om, t / r);
        return 1.0 / (t * o * o);
    };
    std::vector<double> knots = {0.0, r / 2, r, 2 * r, T0};
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    QuadResult total;
    const double itol = 0.1 * tol;
    // Two-dimensional part: t in (0, T0).
    auto inner = [&](double t) { return detail::angular_integral(t, axis, 1e-11) * g(t); };
    for (std::size_t i = 0; i + 1 < knots.size() && knots[i] < T0; ++i)
        total += integrate(inner, knots[i], knots[i + 1], itol, 4000);

    // Closed-form angular part: t >= T0, split as 4 pi g - 4 pi J0 g.
    std::vector<double> outer = {T0};
    for (double k : knots)
        if (k > T0) outer.push_back(k);
    const double last = outer.back();
    for (std::size_t i = 0; i + 1 < outer.size(); ++i) {
        total += integrate([&](double t) { return 4.0 * PI * g(t); }, outer[i], outer[i + 1], itol, 4000);
        total.value -= 4.0 * PI * detail::oscillatory_j0(g, outer[i], outer[i + 1]);
    }
    // Beyond max(2r, T0): t = r e^u, g dt = omega(e^-u)^2 du.
    const double u0 = std::log(last / r);
    auto tail = [&](double u) {
        const double o = om.at_neg_log(u);
        return 4.0 * PI * o * o;
    };
    total += integrate_to_infinity(tail, u0, itol);
    total.value -= 4.0 * PI * detail::oscillatory_j0(g, last, INFINITY);
    return total;
}

inline I0Profile i0_profile(const ThetaWeight& w, std::span<const double> r_list, double tol = 1e-6) {
    I0Profile out;
    out.ratio_min = INFINITY;
    out.ratio_max = 0.0;
    for (double r : r_list) {
        I0Point p;
        p.r = r;
        const auto q = i0_value(w, r, Axis::X, tol);
        p.i0 = q.value;
        p.error = q.error;
        p.converged = q.converged;
        const auto th = eval_theta(w, r);
        p.theta = th.value;
        p.converged = p.converged && th.converged;
        p.ratio = p.theta > 0.0 ? p.i0 / p.theta : INFINITY;
        if (p.theta > 0.0) {
            out.ratio_min = std::min(out.ratio_min, p.ratio);
            out.ratio_max = std::max(out.ratio_max, p.ratio);
        }
        out.points.push_back(p);
    }
    if (out.ratio_max > 0.0) out.band = std::min(out.ratio_min, 1.0 / out.ratio_max);
    return out;
}

// --- C^omega seminorm ----------------------------------------------------------

enum class SeminormMethod { FullPairScan, SampledPairs };

inline const char* to_string(SeminormMethod m) {
    return m == SeminormMethod::FullPairScan ? "full-pair-scan" : "sampled-pairs";
}

struct SeminormReport {
    double value = 0.0;
    SeminormMethod method = SeminormMethod::SampledPairs;
    std::uint64_t sample_seed = 0;
    std::size_t pair_count = 0;
};

inline constexpr int full_scan_limit = 64;
inline constexpr std::size_t seminorm_samples = 1'000'000;

/// sup_{x != y} |f(x) - f(y)| / omega(|x - y|) over lattice pairs (no wrap-around).
/// region_radius > 0 restricts both points to the closed disk of that radius.
inline SeminormReport c_modulus_seminorm(const Field& f, const ModulusSpec& spec,
                                         SeminormMethod method = SeminormMethod::SampledPairs,
                                         std::uint64_t seed = 0, double region_radius = 0.0) {
    const auto& g = f.grid();
    const int n = g.n;
    const double h = g.spacing();
    SeminormReport rep;
    rep.method = method;
    rep.sample_seed = seed;
    std::vector<char> inside(g.size(), 1);
    if (region_radius > 0.0)
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j) inside[static_cast<std::size_t>(m) * n + j] = std::abs(g.point(j, m)) <= region_radius;
    auto pair = [&](int j, int m, int dj, int dm, double inv_w) {
        const int j2 = j + dj, m2 = m + dm;
        if (j2 < 0 || j2 >= n || m2 < 0 || m2 >= n) return;
        const std::size_t a = static_cast<std::size_t>(m) * n + j, b = static_cast<std::size_t>(m2) * n + j2;
        if (!inside[a] || !inside[b]) return;
        ++rep.pair_count;
        rep.value = std::max(rep.value, std::abs(f[a] - f[b]) * inv_w);
    };
    auto inv_omega = [&](int dj, int dm) { return 1.0 / spec(h * std::hypot(dj, dm)); };

    if (method == SeminormMethod::FullPairScan) {
        if (n > full_scan_limit) throw std::invalid_argument("c_modulus_seminorm: full scan needs N <= 64");
        for (int dm = 0; dm < n; ++dm)
            for (int dj = (dm == 0 ? 1 : -n + 1); dj < n; ++dj) {
                const double iw = inv_omega(dj, dm);
                for (int m = 0; m < n - dm; ++m)
                    for (int j = std::max(0, -dj); j < std::min(n, n - dj); ++j) pair(j, m, dj, dm, iw);
            }
        return rep;
    }

    for (auto [dj, dm] : {std::pair{1, 0}, {0, 1}, {1, 1}, {1, -1}}) {
        const double iw = inv_omega(dj, dm);
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j) pair(j, m, dj, dm, iw);
    }
    // Seeded pairs, stratified by dyadic distance 2^l <= |offset| / h < 2^(l+1).
    std::mt19937_64 rng(seed);
    const int levels = std::bit_width(static_cast<unsigned>(n)); // up to 2^levels > n
    std::uniform_int_distribution<int> level(0, levels - 1), coord(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t s = 0; s < seminorm_samples; ++s) {
        const int l = level(rng);
        const double len = std::ldexp(1.0 + unit(rng), l), ang = 2.0 * PI * unit(rng);
        const int dj = static_cast<int>(std::lround(len * std::cos(ang)));
        const int dm = static_cast<int>(std::lround(len * std::sin(ang)));
        const int j = coord(rng), m = coord(rng);
        if (dj == 0 && dm == 0) continue;
        pair(j, m, dj, dm, inv_omega(dj, dm));
    }
    return rep;
}

/// FullPairScan when allowed, sampled otherwise.
inline SeminormMethod default_seminorm_method(const GridSpec& g) {
    return g.n <= full_scan_limit ? SeminormMethod::FullPairScan : SeminormMethod::SampledPairs;
}

// --- interpolation inequality --------------------------------------------------

/// Solves r * sigma(r) = x for r (r sigma(r) is strictly increasing and onto).
inline double invert_r_sigma(const ModulusSpec& sigma, double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("invert_r_sigma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    const double cap = ModulusSpec::cap_radius;
    if (x >= cap * sigma.cap_value()) return x / sigma.cap_value();
    // Bisection in u = -log r on (log 2, upper], r sigma(r) decreasing in u.
    double lo = -std::log(cap), hi = lo;
    auto zeta_u = [&](double u) { return std::exp(-u) * sigma.at_neg_log(u); };
    while (zeta_u(hi) > x) hi = 2.0 * hi + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (zeta_u(mid) > x ? lo : hi) = mid;
    }
    return std::exp(-0.5 * (lo + hi));
}

struct InterpolationCheck {
    double lhs = 0.0;       ///< sup |f_{x_i}|
    double rhs = 0.0;       ///< 2 sigma(zeta^-1(|f|_0 / [f_{x_i}]_sigma)) [f_{x_i}]_sigma
    double seminorm = 0.0;  ///< [f_{x_i}]_sigma
    double sup_f = 0.0;
    bool holds() const { return lhs <= rhs; }
};

/// Spectral partial derivative along x (axis X) or y (axis Y).
inline Field partial(const Field& f, Axis axis) {
    return apply_multiplier(f, [axis](cplx z) { return 2.0 * PI * I * (axis == Axis::X ? z.real() : z.imag()); });
}

inline InterpolationCheck interpolation_bound(const Field& f, const ModulusSpec& sigma, Axis axis = Axis::X,
                                              SeminormMethod method = SeminormMethod::SampledPairs,
                                              std::uint64_t seed = 0) {
    InterpolationCheck c;
    const Field fx = partial(f, axis);
    c.lhs = fx.sup();
    c.sup_f = f.sup();
    c.seminorm = c_modulus_seminorm(fx, sigma, method, seed).value;
    if (c.seminorm == 0.0) return c;
    const double r = invert_r_sigma(sigma, c.sup_f / c.seminorm);
    c.rhs = 2.0 * sigma(r) * c.seminorm;
    return c;
}

// --- oscillatory integral ---------------------------------------------------------

/// F(s) = int_0^pi cos(2 pi s cos t) dt by adaptive quadrature on pre-split panels.
inline QuadResult oscillatory_integral(double s) {
    if (!(s >= 1.0)) throw std::invalid_argument("oscillatory_integral: s must be >= 1");
    auto f = [s](double t) { return std::cos(2.0 * PI * s * std::cos(t)); };
    const int panels = 4 + 4 * static_cast<int>(std::ceil(s));
    QuadResult q;
    for (int p = 0; p < panels; ++p) q += integrate(f, PI * p / panels, PI * (p + 1) / panels, 1e-13, 200, 1e-16);
    return q;
}

/// int_{-pi}^{pi} (1 - cos(2 pi s cos t)) dt = 2 pi - 2 F(s).
inline double oscillatory_gap(double s) { return 2.0 * PI - 2.0 * oscillatory_integral(s).value; }

// --- Fourier decay of the cut-off Cauchy kernel ----------------------------------------

struct DecaySample {
    double xi;      ///< |xi|
    double value;   ///< max |K^_z| over lattice frequencies in the shell
};

struct KernelDecayReport {
    double sup_ratio = 0.0;  ///< sup |K^_z(xi)| |xi| / log |xi| over 2 <= |xi| <= xi_max
    double at_zero = 0.0;    ///< |K^_z(0)|
    double l1_norm = 0.0;    ///< ||K_z||_1
    double xi_max = 0.0;     ///< upper end actually used (clipped to the lattice Nyquist)
    std::vector<DecaySample> profile; ///< shell maxima, unit-width shells
};

/// ||K_z||_1 = (1/pi) int_0^inf int_0^2pi chi(|z + rho e^{i phi}|) dphi drho (polar about z).
inline double cauchy_kernel_l1(cplx z) {
    auto inner = [&](double rho) {
        auto f = [&](double phi) { return radial_cutoff(std::abs(z + std::polar(rho, phi))); };
        return integrate_panels(f, std::vector<double>{0, PI / 2, PI, 1.5 * PI, 2 * PI}, 1e-11).value;
    };
    const double R = std::abs(z) + 1.5;
    std::vector<double> pts{0.0};
    if (std::abs(z) > 1.5) pts.push_back(std::abs(z) - 1.5);
    if (std::abs(z) > 1.0) pts.push_back(std::abs(z) - 1.0);
    pts.push_back(std::abs(std::abs(z) - 1.0));
    pts.push_back(std::abs(z) + 1.0);
    pts.push_back(R);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return integrate_panels(inner, pts, 1e-9).value / PI;
}

/// Samples of K_z(y) = chi(|y|) / (pi (z - y)) on the grid.  The cell containing
/// z gets its cell average: 0 when z is a lattice point (principal value),
/// otherwise a refined midpoint average over the cell.
inline Field cauchy_kernel_samples(cplx z, const GridSpec& g) {
    const double h = g.spacing();
    auto K = [&](cplx y) { return radial_cutoff(std::abs(y)) / (PI * (z - y)); };
    Field out = Field::sample(g, K);
    const double jz = (z.real() + g.half_width) / h, mz = (z.imag() + g.half_width) / h;
    const int j0 = static_cast<int>(std::lround(jz)), m0 = static_cast<int>(std::lround(mz));
    if (j0 < 0 || j0 >= g.n || m0 < 0 || m0 >= g.n) return out;
    if (std::abs(jz - j0) < 1e-12 && std::abs(mz - m0) < 1e-12) {
        out(j0, m0) = 0.0;
        return out;
    }
    const cplx c = g.point(j0, m0);
    constexpr int sub = 64;
    cplx avg = 0.0;
    for (int b = 0; b < sub; ++b)
        for (int a = 0; a < sub; ++a) avg += K(c + h * cplx((a + 0.5) / sub - 0.5, (b + 0.5) / sub - 0.5));
    out(j0, m0) = avg / double(sub * sub);
    return out;
}

inline KernelDecayReport kernel_fourier_decay(cplx z, double xi_max, const GridSpec& g) {
    const double L = g.half_width;
    if (z.real() < -L || z.real() >= L || z.imag() < -L || z.imag() >= L)
        throw std::invalid_argument("kernel_fourier_decay: z outside the grid cell");
    KernelDecayReport rep;
    rep.xi_max = std::min(xi_max, g.nyquist());
    const auto s = to_spectral(cauchy_kernel_samples(z, g));
    const double scale = g.spacing() * g.spacing() * g.n; // |K^(xi)| = h^2 N |c|
    const int shells = static_cast<int>(std::ceil(std::sqrt(2.0) * g.nyquist())) + 1;
    rep.profile.resize(shells);
    for (int i = 0; i < shells; ++i) rep.profile[i] = {static_cast<double>(i), 0.0};
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) {
            const double r = std::abs(g.zeta(j, m)), v = std::abs(s(j, m)) * scale;
            auto& shell = rep.profile[static_cast<int>(std::lround(r))];
            shell.value = std::max(shell.value, v);
            if (r >= 2.0 && r <= rep.xi_max) rep.sup_ratio = std::max(rep.sup_ratio, v * r / std::log(r));
        }
    rep.at_zero = std::abs(s(0, 0)) * scale;
    rep.l1_norm = cauchy_kernel_l1(z);
    return rep;
}

} // namespace cgolab
