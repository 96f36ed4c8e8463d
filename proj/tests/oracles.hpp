#pragma once

// Independent reference values used by the tests.  Nothing here calls into
// the library's numerical routines.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

/// theta for omega = |log r|^-beta (capped at 1/2), integrated by hand:
/// for r >= 2 the integrand in u = log s is (log r - u)^(2 beta) up to
/// log r - log 2 and the constant (log 2)^(2 beta) afterwards.
inline double theta_log_power(double beta, double r) {
    if (r <= 1.0) return 0.0;
    const double l2 = std::log(2.0), lr = std::log(r), p = 2 * beta;
    if (r <= 2.0) return std::pow(l2, p) * lr;
    return (std::pow(lr, p + 1) - std::pow(l2, p + 1)) / (p + 1) + std::pow(l2, p + 1);
}

/// Closed form of the square-Dini constant for log-power moduli.
inline double square_dini_constant(double alpha, double beta) {
    const double l2 = std::log(2.0);
    const double d = 2 * (alpha - beta);
    return std::pow(l2, 1 - d) / (d - 1)          // (0, 1/2]
           + std::pow(l2, 1 - d)                  // [1/2, 1]
           + std::pow(l2, 1 - 2 * alpha - 2 * beta) // [1, 2]
           + std::pow(l2, -2 * alpha) * std::pow(l2, 1 - 2 * beta) / (2 * beta - 1); // [2, inf)
}

/// J0 by power series (x <= 12, long double) or Hankel asymptotics (x > 12).
inline double bessel_j0(double x) {
    x = std::abs(x);
    if (x <= 12.0) {
        long double term = 1.0L, sum = 1.0L;
        const long double q = -(long double)x * x / 4.0L;
        for (int k = 1; k < 200; ++k) {
            term *= q / ((long double)k * k);
            sum += term;
            if (std::abs(term) < 1e-22L) break;
        }
        return static_cast<double>(sum);
    }
    // P ~ sum (-1)^m a_{2m} / x^{2m}, Q ~ sum (-1)^m a_{2m+1} / x^{2m+1} with
    // a_k = prod_{j=1..k} (4*0 - (2j-1)^2) / (k! 8^k).
    double P = 0.0, Q = 0.0, a = 1.0, xp = 1.0, prev = INFINITY;
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            a *= -(double)((2 * k - 1) * (2 * k - 1)) / (k * 8.0);
            xp *= x;
        }
        const double t = a / xp;
        if (std::abs(t) > prev) break; // past the smallest term
        prev = std::abs(t);
        switch (k % 4) {
        case 0: P += t; break;
        case 1: Q += t; break;
        case 2: P -= t; break;
        case 3: Q -= t; break;
        }
        if (std::abs(t) < 1e-17) break;
    }
    const double chi = x - std::numbers::pi / 4;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (P * std::cos(chi) - Q * std::sin(chi));
}

/// DtN eigenvalue of a radial conductivity for the mode e^{in theta}: shoot
/// y1 = u, y2 = r gamma u' through y1' = y2 / (r gamma), y2' = n^2 gamma y1 / r
/// from r0, where gamma must be constant on [0, r0] so that u = r^|n| there.
inline double radial_dtn(const std::function<double(double)>& gamma, int n, double r0 = 0.05) {
    namespace ode = boost::numeric::odeint;
    n = std::abs(n);
    if (n == 0) return 0.0;
    using State = std::array<double, 2>;
    State y{std::pow(r0, n), gamma(0.0) * n * std::pow(r0, n)};
    auto rhs = [&](const State& s, State& ds, double r) {
        const double gm = gamma(r);
        ds[0] = s[1] / (r * gm);
        ds[1] = n * n * gm * s[0] / r;
    };
    ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>()), rhs, y, r0, 1.0,
                            1e-4);
    return y[1] / y[0]; // gamma u_r at r = 1 per unit boundary value
}

} // namespace oracle
