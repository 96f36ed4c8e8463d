#pragma once

// Test conductivities whose deviation from 1 attains a log-power modulus.

#include "cgolab/forward.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace cgolab {

struct DiniBumpSpec {
    double alpha = 2.0;
    double amplitude = 0.1; ///< t in gamma = 1 + t eta
    cplx centre = {0.1, 0.05};
    double r_in = 0.25;  ///< eta = varpi(|z - centre|) up to here
    double r_out = 0.8;  ///< eta = 0 from here on
};

/// eta(z) = varpi(min(r, r_in)) * cutoff(r; r_in, r_out), r = |z - centre|.  It vanishes at
/// the centre and grows there exactly like varpi, so the modulus is attained.
inline double dini_bump_profile(const DiniBumpSpec& s, cplx z) {
    const auto varpi = ModulusSpec::log_power(s.alpha);
    const double r = std::abs(z - s.centre);
    if (r >= s.r_out) return 0.0;
    return varpi(std::min(r, s.r_in)) * radial_cutoff(r, s.r_in, s.r_out);
}

inline Conductivity make_dini_conductivity(const DiniBumpSpec& s, const GridSpec& g, std::uint64_t seed = 0) {
    if (!(s.alpha > 0.0)) throw std::invalid_argument("make_dini_conductivity: alpha must be positive");
    if (!(s.r_in > 0.0 && s.r_in < s.r_out)) throw std::invalid_argument("make_dini_conductivity: need 0 < r_in < r_out");
    const double reach = std::abs(s.centre) + s.r_out;
    if (!(reach < 1.0)) throw std::invalid_argument("make_dini_conductivity: support must stay inside the unit disk");
    const double peak = ModulusSpec::log_power(s.alpha)(s.r_in);
    if (!(1.0 + s.amplitude * peak > 0.0))
        throw std::invalid_argument("make_dini_conductivity: amplitude makes gamma nonpositive");
    auto profile = [s](cplx z) { return 1.0 + s.amplitude * dini_bump_profile(s, z); };
    Field gamma = Field::sample(g, [&](cplx z) { return cplx(profile(z)); });
    return make_conductivity(std::move(gamma), 0.5 * (reach + 1.0), s.alpha, profile, seed);
}

/// Amplitude t at which sup |mu| = kappa for mu = (1 - gamma) / (1 + gamma), gamma = 1 + t eta.
inline double amplitude_for_kappa(const DiniBumpSpec& s, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("amplitude_for_kappa: need 0 < kappa < 1");
    const double peak = ModulusSpec::log_power(s.alpha)(s.r_in);
    // |t eta / (2 + t eta)| = kappa at the peak
    return 2.0 * kappa / ((1.0 - kappa) * peak);
}

/// Five bumps used for sweeps over coefficients: three contrasts at the default
/// shape, a slower modulus and a shifted, narrower bump.
inline std::vector<DiniBumpSpec> dini_test_family() {
    std::vector<DiniBumpSpec> fam;
    for (double kappa : {0.1, 0.3, 0.5}) {
        DiniBumpSpec s;
        s.amplitude = amplitude_for_kappa(s, kappa);
        fam.push_back(s);
    }
    DiniBumpSpec slow;
    slow.alpha = 1.5;
    slow.amplitude = amplitude_for_kappa(slow, 0.3);
    fam.push_back(slow);
    DiniBumpSpec shifted;
    shifted.alpha = 3.0;
    shifted.centre = {-0.15, 0.1};
    shifted.r_in = 0.15;
    shifted.r_out = 0.6;
    shifted.amplitude = amplitude_for_kappa(shifted, 0.4);
    fam.push_back(shifted);
    return fam;
}

/// Three random Gaussians (centres in [-0.6, 0.6]^2, widths 0.15 to 0.5, weights in
/// [-1, 1]) under a cutoff that vanishes from |z| = 1.8 on.
inline Field random_bump_field(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.15, 0.5);
    struct Bump {
        cplx c;
        double a, s;
    };
    std::vector<Bump> bumps;
    for (int i = 0; i < 3; ++i) bumps.push_back({cplx(0.6 * u(rng), 0.6 * u(rng)), u(rng), w(rng)});
    return Field::sample(g, [&](cplx z) {
        double v = 0.0;
        for (const auto& b : bumps) v += b.a * std::exp(-std::norm(z - b.c) / (b.s * b.s));
        return cplx(v * radial_cutoff(std::abs(z), 1.0, 1.8));
    });
}

} // namespace cgolab
