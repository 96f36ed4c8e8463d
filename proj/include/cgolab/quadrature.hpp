#pragma once

// Adaptive quadrature helpers.  All integrals in the library go through
// these so convergence is reported uniformly.

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace cgolab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

inline QuadResult& operator+=(QuadResult& a, const QuadResult& b) {
    a.value += b.value;
    a.error += b.error;
    a.converged = a.converged && b.converged;
    return a;
}

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment kronrod15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = fc * kWgk[7], resg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double s = f(c - x) + f(c + x);
        resk += kWgk[j] * s;
        if (j % 2 == 1) resg += kWg[j / 2] * s;
    }
    return {a, b, resk * h, std::abs((resk - resg) * h)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval: the segment
/// with the largest error estimate is bisected until the summed estimate
/// drops below rel_tol * |value| (or abs_tol).
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-10, int max_segments = 2000,
                     double abs_tol = 1e-300) {
    QuadResult r;
    if (a == b) return r;
    std::priority_queue<detail::Segment> heap;
    heap.push(detail::kronrod15(f, a, b));
    double value = heap.top().value, error = heap.top().error;
    int segments = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(value)) && segments < max_segments) {
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::kronrod15(f, worst.a, mid);
        const auto right = detail::kronrod15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++segments;
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    value = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    r.value = value;
    r.error = error;
    r.converged = std::isfinite(value) && error <= std::max(abs_tol, rel_tol * std::abs(value)) * 1.0001;
    return r;
}

/// Integrate over consecutive panels [pts[i], pts[i+1]].
template <class F>
QuadResult integrate_panels(F&& f, std::span<const double> pts, double rel_tol = 1e-10) {
    QuadResult total;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += integrate(f, pts[i], pts[i + 1], rel_tol);
    return total;
}

/// Half-infinite interval [a, inf) via the exp-sinh rule (suited to algebraic tails).
template <class F>
QuadResult integrate_to_infinity(F&& f, double a, double rel_tol = 1e-10) {
    QuadResult r;
    boost::math::quadrature::exp_sinh<double> rule;
    double err = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    try {
        r.value = rule.integrate(f, a, std::numeric_limits<double>::infinity(), rel_tol, &err, &l1, &levels);
    } catch (const std::exception&) {
        r.value = std::numeric_limits<double>::quiet_NaN();
        r.converged = false;
        return r;
    }
    r.error = err;
    r.converged = std::isfinite(r.value) && err <= std::max(rel_tol * 100.0, 1e-12) * std::max(std::abs(r.value), l1);
    return r;
}

/// Fixed-order Gauss-Legendre on [a,b] split into `panels` equal panels; used
/// where the integrand is smooth but oscillatory and the panel count is known.
template <class F>
double gauss_legendre_panels(F&& f, double a, double b, int panels) {
    static constexpr double x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                    0.9445750230732326, 0.9894009349916499};
    static constexpr double w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                    0.0622535239386479, 0.0271524594117541};
    const double hp = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * hp, half = 0.5 * hp;
        for (int i = 0; i < 8; ++i) sum += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
    }
    return sum * 0.5 * hp;
}

} // namespace cgolab
