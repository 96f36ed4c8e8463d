#pragma once

// Moduli of continuity and the quantities derived from them: the extended
// modulus on (0, inf), the Fourier weight theta and the square-Dini constant.

#include "cgolab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgolab {

enum class ModulusKind { LogPower, IntegratedLogPower, Holder };

inline std::string to_string(ModulusKind k) {
    switch (k) {
    case ModulusKind::LogPower: return "log-power";
    case ModulusKind::IntegratedLogPower: return "integrated-log-power";
    case ModulusKind::Holder: return "holder";
    }
    return "?";
}

/// A modulus of continuity of one of three closed forms on (0, 1/2], held
/// constant from the cap radius on:
///   log-power             |log r|^-p
///   integrated-log-power  |log r|^(1-p) / (p-1)      (requires p > 1)
///   holder                r^p                        (0 < p <= 1)
class ModulusSpec {
public:
    static constexpr double cap_radius = 0.5;

    ModulusSpec(ModulusKind kind, double exponent) : kind_(kind), exponent_(exponent) {
        if (!(exponent > 0.0) || !std::isfinite(exponent))
            throw std::invalid_argument("modulus exponent must be positive");
        if (kind == ModulusKind::IntegratedLogPower && exponent <= 1.0)
            throw std::invalid_argument("integrated-log-power modulus needs exponent > 1");
        cap_value_ = branch(cap_radius);
    }

    static ModulusSpec log_power(double alpha) { return {ModulusKind::LogPower, alpha}; }
    static ModulusSpec integrated(double alpha) { return {ModulusKind::IntegratedLogPower, alpha}; }
    static ModulusSpec holder(double g) { return {ModulusKind::Holder, g}; }

    ModulusKind kind() const { return kind_; }
    double exponent() const { return exponent_; }
    double cap_value() const { return cap_value_; }

    /// Value with the cap rule; value(0) = 0.
    double operator()(double r) const {
        if (r <= 0.0) return 0.0;
        if (r >= cap_radius) return cap_value_;
        return branch(r);
    }

    /// Value at r = exp(-u); stays accurate where exp(-u) underflows.
    double at_neg_log(double u) const {
        if (u <= -std::log(cap_radius)) return cap_value_;
        switch (kind_) {
        case ModulusKind::LogPower: return std::pow(u, -exponent_);
        case ModulusKind::IntegratedLogPower: return std::pow(u, 1.0 - exponent_) / (exponent_ - 1.0);
        case ModulusKind::Holder: return std::exp(-exponent_ * u);
        }
        return 0.0;
    }

private:
    double branch(double r) const {
        switch (kind_) {
        case ModulusKind::LogPower: return std::pow(-std::log(r), -exponent_);
        case ModulusKind::IntegratedLogPower: return std::pow(-std::log(r), 1.0 - exponent_) / (exponent_ - 1.0);
        case ModulusKind::Holder: return std::pow(r, exponent_);
        }
        return 0.0;
    }

    ModulusKind kind_;
    double exponent_;
    double cap_value_ = 0.0;
};

inline double eval_modulus(const ModulusSpec& spec, double r) {
    if (r < 0.0) throw std::invalid_argument("eval_modulus: r must be nonnegative");
    return spec(r);
}

/// omega(r) below 1, 1/omega(1/r) above; the left value at r = 1.
inline double eval_tilde_omega(const ModulusSpec& spec, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("eval_tilde_omega: r must be positive");
    if (r <= 1.0) return spec(r);
    return 1.0 / spec(1.0 / r);
}

namespace detail {

// Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson).
class MonotoneTable {
public:
    MonotoneTable() = default;
    MonotoneTable(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        d_.assign(n, 0.0);
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        d_[0] = delta[0];
        d_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                d_[i] = 0.0;
            } else {
                const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
                const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
                d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
    }
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    double operator()(double x) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - x_.begin()), 1, x_.size() - 1) - 1;
        const double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
               (t3 - t2) * h * d_[i + 1];
    }

private:
    std::vector<double> x_, y_, d_;
};

} // namespace detail

/// The Fourier weight
///   theta(r) = int_1^r ds / (s omega(s/r)^2)  for r > 1,   0 otherwise,
/// evaluated by adaptive quadrature in u = log s.  Repeated evaluations go
/// through a lazily built log-spaced table (thread-safe, built once).
class ThetaWeight {
public:
    explicit ThetaWeight(ModulusSpec base, double rel_tol = 1e-8) : base_(base), rel_tol_(rel_tol) {}

    const ModulusSpec& base() const { return base_; }
    double tolerance() const { return rel_tol_; }

    /// Direct quadrature of the defining integral.
    QuadResult integrate(double r) const {
        QuadResult res;
        if (r <= 1.0) return res;
        const double lr = std::log(r);
        auto integrand = [&](double u) {
            const double w = base_(std::exp(u - lr));
            return 1.0 / (w * w);
        };
        // omega(s/r) is constant once s/r reaches the cap radius.
        const double split = std::max(0.0, lr + std::log(ModulusSpec::cap_radius));
        if (split > 0.0) res += cgolab::integrate(integrand, 0.0, split, rel_tol_ * 0.1);
        res += cgolab::integrate(integrand, split, lr, rel_tol_ * 0.1);
        return res;
    }

    /// Memoized evaluation; exact quadrature outside the tabulated range.
    double operator()(double r) const {
        if (r <= 1.0) return 0.0;
        const double x = std::log(r);
        const auto& t = table();
        if (x > t.back()) return integrate(r).value;
        return t(x);
    }

    static constexpr double table_log_max = 16.0; // r up to ~8.9e6

private:
    const detail::MonotoneTable& table() const {
        std::call_once(memo_->once, [this] {
            constexpr int n = 4001;
            std::vector<double> xs(n), ys(n);
            for (int i = 0; i < n; ++i) xs[i] = table_log_max * i / (n - 1);
            // theta'' jumps where r crosses 1/cap_radius; put a knot there.
            const double kink = -std::log(ModulusSpec::cap_radius);
            xs[static_cast<int>(std::lround(kink / table_log_max * (n - 1)))] = kink;
            for (int i = 0; i < n; ++i) ys[i] = integrate(std::exp(xs[i])).value;
            memo_->table = detail::MonotoneTable(std::move(xs), std::move(ys));
        });
        return memo_->table;
    }

    struct Memo {
        std::once_flag once;
        detail::MonotoneTable table;
    };

    ModulusSpec base_;
    double rel_tol_;
    std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

struct ThetaValue {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

/// Quadrature value of theta with its error flag.
inline ThetaValue eval_theta(const ThetaWeight& w, double r) {
    if (r < 0.0) throw std::invalid_argument("eval_theta: r must be nonnegative");
    const auto q = w.integrate(r);
    return {q.value, q.error, q.converged};
}

struct DiniConstant {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

/// C_{alpha,beta} = int_0^inf varpi(r)^2 / (r tilde_omega(r)^2) dr with
/// varpi = |log r|^-alpha and omega = |log r|^-beta, 1 < beta < alpha - 1/2.
inline DiniConstant square_dini_constant(double alpha, double beta) {
    if (!(alpha > 1.5) || !(beta > 1.0) || !(beta < alpha - 0.5))
        throw std::domain_error("square_dini_constant: need 1 < beta < alpha - 1/2");
    const auto varpi = ModulusSpec::log_power(alpha);
    const auto omega = ModulusSpec::log_power(beta);
    auto integrand_r = [&](double r) {
        const double num = varpi(r), den = eval_tilde_omega(omega, r);
        return num * num / (r * den * den);
    };
    auto sq = [](double x) { return x * x; };
    DiniConstant out;
    auto add = [&](const QuadResult& q) {
        out.value += q.value;
        out.error += q.error;
        out.converged = out.converged && q.converged;
    };
    // (0, 1/2]: r = e^-u, dr/r = du.
    add(integrate_to_infinity([&](double u) { return sq(varpi.at_neg_log(u) / omega.at_neg_log(u)); },
                              std::log(2.0), 1e-10));
    add(integrate(integrand_r, 0.5, 1.0, 1e-12));
    add(integrate(integrand_r, 1.0, 2.0, 1e-12));
    // [2, inf): r = e^u, tilde_omega(r) = 1/omega(e^-u).
    add(integrate_to_infinity([&](double u) { return sq(varpi.cap_value() * omega.at_neg_log(u)); },
                              std::log(2.0), 1e-10));
    if (!out.converged || !std::isfinite(out.value))
        throw std::runtime_error("square_dini_constant: tail quadrature did not converge");
    return out;
}

} // namespace cgolab
