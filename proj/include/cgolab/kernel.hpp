#pragma once

// Cauchy and Beurling transforms built from the truncated kernel
//   K(x) = chi(|x| / rho) / (pi x),   chi = 1 on [0, 1], 0 beyond 3/2,
// whose Fourier transform is R(|xi|) / (pi i zeta) with the radial factor
//   R(s) = 1 + int chi'(r / rho) / rho * J0(2 pi s r) dr.
// For data supported in the unit disk, K * f equals the full Cauchy transform
// on the disk of radius rho - 1, so nothing depends on the zero mode or on
// periodic images as long as 2L >= 1 + 1.5 rho + (rho - 1).
//
// The "shifted" operators act on the slowly varying factor of e_eta(z) X(z):
// T(e_eta X) = e_eta T_eta X where T_eta has symbol T^(xi + eta).  Working on
// X keeps oscillations at frequency |eta| off the grid entirely.

#include "cgolab/field.hpp"
#include "cgolab/quadrature.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <mutex>
#include <vector>

namespace cgolab {

inline constexpr double kernel_radius = 2.5;

namespace detail {

// R(s) on [0, s_max): Chebyshev interpolants of fixed degree on unit
// intervals, each built on first use.  R is entire of exponential type
// 2 pi * 1.5 rho, so a unit interval needs only a modest degree.  Beyond
// s_max, |R - 1| < 1e-15.
class RadialFactor {
public:
    static constexpr int degree = 34;
    static constexpr double s_max = 80.0;

    static const RadialFactor& instance() {
        static RadialFactor r;
        return r;
    }

    /// Direct quadrature (used to build the table and by tests).
    static double direct(double s) {
        const double rho = kernel_radius, a = rho, b = 1.5 * rho;
        const int panels = 24 + static_cast<int>(1.5 * s);
        auto g = [&](double r) {
            const double t = (r / rho - 1.0) / 0.5;
            return smooth_step_down_deriv(t) / (0.5 * rho) * boost::math::cyl_bessel_j(0, 2.0 * PI * s * r);
        };
        return 1.0 + gauss_legendre_panels(g, a, b, panels);
    }

    double operator()(double s) const {
        if (s >= s_max) return 1.0;
        const int i = static_cast<int>(s);
        const double x = 2.0 * (s - i) - 1.0;
        std::call_once(built_[i], [this, i] { build(i); });
        const double* c = &coef_[static_cast<std::size_t>(i) * (degree + 1)];
        double b1 = 0.0, b2 = 0.0;
        for (int k = degree; k >= 1; --k) {
            const double t = 2.0 * x * b1 - b2 + c[k];
            b2 = b1;
            b1 = t;
        }
        return x * b1 - b2 + c[0];
    }

private:
    static constexpr int intervals = static_cast<int>(s_max);

    RadialFactor() : coef_(static_cast<std::size_t>(intervals) * (degree + 1), 0.0) {}

    void build(int i) const {
        constexpr int n = degree + 1;
        double vals[n];
        for (int j = 0; j < n; ++j) vals[j] = direct(i + 0.5 * (std::cos(PI * (j + 0.5) / n) + 1.0));
        for (int k = 0; k < n; ++k) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) sum += vals[j] * std::cos(PI * k * (j + 0.5) / n);
            coef_[static_cast<std::size_t>(i) * n + k] = (k == 0 ? 1.0 : 2.0) * sum / n;
        }
    }

    mutable std::vector<double> coef_;
    mutable std::once_flag built_[intervals];
};

} // namespace detail

/// Radial factor of the truncated kernel's transform.
inline double kernel_radial_factor(double s) { return detail::RadialFactor::instance()(s); }

namespace symbols {
inline cplx cauchy_local(cplx z) {
    const double s = std::abs(z);
    return s == 0.0 ? cplx(0.0) : kernel_radial_factor(s) / (PI * I * z);
}
inline cplx beurling_local(cplx z) {
    const double s = std::abs(z);
    return s == 0.0 ? cplx(0.0) : kernel_radial_factor(s) * std::conj(z) / z;
}
} // namespace symbols

enum class ShiftedKind { Beurling, Cauchy, DBar, D };

inline cplx shifted_symbol(ShiftedKind kind, cplx z) {
    switch (kind) {
    case ShiftedKind::Beurling: return symbols::beurling_local(z);
    case ShiftedKind::Cauchy: return symbols::cauchy_local(z);
    case ShiftedKind::DBar: return symbols::d_bar(z);
    case ShiftedKind::D: return symbols::d(z);
    }
    return 0.0;
}

/// A multiplier evaluated at zeta + shift, tabulated on the grid once.
class ShiftedOperator {
public:
    ShiftedOperator() = default;
    ShiftedOperator(const GridSpec& g, ShiftedKind kind, cplx shift) : grid_(g), kind_(kind), shift_(shift) {
        sym_.resize(g.size());
        for (int m = 0; m < g.n; ++m)
            for (int j = 0; j < g.n; ++j)
                sym_[static_cast<std::size_t>(m) * g.n + j] = shifted_symbol(kind, g.zeta(j, m) + shift);
    }

    Field operator()(const Field& f) const {
        auto s = to_spectral(f);
        auto& c = s.coefficients();
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= sym_[i];
        return from_spectral(s);
    }

    cplx shift() const { return shift_; }
    ShiftedKind kind() const { return kind_; }

private:
    GridSpec grid_;
    ShiftedKind kind_ = ShiftedKind::Beurling;
    cplx shift_ = 0.0;
    std::vector<cplx> sym_;
};

/// One-off application without tabulating the symbol.
inline Field apply_shifted(const Field& f, ShiftedKind kind, cplx shift) {
    return apply_multiplier(f, [&](cplx z) { return shifted_symbol(kind, z + shift); });
}

/// Frequency shift that carries e_{m k}: e_{mk}(z) = exp(2 pi i Re(z * conj(m conj(k) / pi))).
inline cplx harmonic_shift(cplx k, int m) { return static_cast<double>(m) * std::conj(k) / PI; }

/// Truncated-kernel Cauchy transform (exact on the disk of radius 1.5 for data in the unit disk).
inline Field cauchy_local(const Field& f) { return apply_multiplier(f, symbols::cauchy_local); }
inline Field beurling_local(const Field& f) { return apply_multiplier(f, symbols::beurling_local); }

} // namespace cgolab
