#include "cgolab/spaces.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cgolab;

namespace {

// Nonnegative profile attaining the log-power modulus at c, cut off smoothly by r = 0.8.
Field dini_bump(const GridSpec& g, double alpha, cplx c = 0.0) {
    const auto varpi = ModulusSpec::log_power(alpha);
    return Field::sample(g, [&](cplx z) {
        const double r = std::abs(z - c);
        return cplx(varpi(std::min(r, 0.25)) * radial_cutoff(r, 0.4, 0.8));
    });
}

Field random_smooth(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.15, 0.5);
    struct B {
        cplx c;
        double a, s;
    };
    std::vector<B> bs;
    for (int i = 0; i < 3; ++i) bs.push_back({cplx(0.6 * u(rng), 0.6 * u(rng)), u(rng), w(rng)});
    return Field::sample(g, [&](cplx z) {
        double v = 0.0;
        for (auto& b : bs) v += b.a * std::exp(-std::norm(z - b.c) / (b.s * b.s));
        return cplx(v * radial_cutoff(std::abs(z), 1.0, 1.8));
    });
}

} // namespace

TEST(L2Modulus, ZeroShiftAndLatticeCheck) {
    const GridSpec g(64, 4.0);
    const auto f = dini_bump(g, 2.0);
    EXPECT_EQ(l2_modulus(f, 0.0), 0.0);
    EXPECT_THROW(l2_modulus(f, cplx(0.01, 0.0)), std::invalid_argument);
}

TEST(L2Modulus, DirectEqualsSpectral) {
    const GridSpec g(64, 4.0);
    const auto f = e_k(g, cplx(1.7, -0.4)) * dini_bump(g, 2.0);
    for (cplx y : {cplx(0.125, 0), cplx(0, -0.5), cplx(1.25, 0.375)})
        EXPECT_NEAR(l2_modulus(f, y), l2_modulus_spectral(f, y), 1e-12 * f.norm());
    const auto ek = e_k(g, cplx(PI / 8, 0.0)); // one of the lattice frequencies
    EXPECT_NEAR(l2_modulus(ek, cplx(0.25, 0.125)), l2_modulus_spectral(ek, cplx(0.25, 0.125)), 1e-12 * ek.norm());
}

TEST(L2Modulus, TriangleBound) {
    const GridSpec g(64, 4.0);
    std::mt19937_64 rng(3);
    const auto f = random_smooth(g, rng);
    for (int dj = -20; dj <= 20; dj += 5)
        for (int dm = -20; dm <= 20; dm += 7) EXPECT_LE(l2_modulus(f, g.spacing() * cplx(dj, dm)), 2.0 * f.norm() * (1 + 1e-14));
}

// M2(f, y) <= sqrt(|D_2|) varpi(|y|) [f]_varpi for |y| <= 1 (support in D_1).
TEST(L2Modulus, BoundedByModulus) {
    const GridSpec g(64, 4.0);
    const auto varpi = ModulusSpec::log_power(2.0);
    const auto f = dini_bump(g, 2.0);
    const double gamma = c_modulus_seminorm(f, varpi, SeminormMethod::FullPairScan).value;
    const double C = std::sqrt(4.0 * PI);
    int checked = 0;
    for (int dj = 1; dj <= 8 && checked < 20; ++dj)
        for (int dm = 0; dm <= 3 && checked < 20; ++dm, ++checked) {
            const cplx y = g.spacing() * cplx(dj, dm);
            EXPECT_LE(l2_modulus(f, y), C * varpi(std::abs(y)) * gamma);
        }
    EXPECT_EQ(checked, 20);
}

TEST(WTheta, BandlimitedAndZero) {
    const GridSpec g(64, 4.0);
    const ThetaWeight w(ModulusSpec::log_power(1.2));
    EXPECT_EQ(w_theta_norm(Field(g), w), 0.0);
    // frequencies n/(2L) with |n| <= 8 satisfy |xi| <= 1
    const auto f = Field::sample(g, [](cplx z) {
        return std::exp(I * PI * (3.0 * z.real() + 2.0 * z.imag()) / 4.0) + 0.5 * std::exp(-I * PI * 5.0 * z.imag() / 4.0);
    });
    EXPECT_NEAR(w_theta_norm(f, w), f.norm(), 1e-12 * f.norm());
}

TEST(WTheta, DominatesL2AndMonotoneInWeight) {
    const GridSpec g(128, 4.0);
    const auto f = dini_bump(g, 2.0);
    const ThetaWeight weak(ModulusSpec::holder(0.3)), strong(ModulusSpec::holder(0.6));
    for (double r : {1.5, 3.0, 10.0, 40.0}) ASSERT_GE(strong(r), weak(r));
    EXPECT_GE(w_theta_norm(f, weak), f.norm());
    EXPECT_GT(w_theta_norm(f, strong), w_theta_norm(f, weak));
}

// ||mu||_W^2 <= ||mu||^2 + (1 / min I0/theta) * 2 pi * |D_2| * C_{alpha,beta} * Gamma^2,
// Gamma = sup|mu| + [mu]_varpi.
TEST(WTheta, BoundedBySquareDiniConstant) {
    const double alpha = 2.0, beta = 1.2;
    const GridSpec g(64, 4.0);
    const ThetaWeight w(ModulusSpec::log_power(beta));
    auto mu = dini_bump(g, alpha);
    mu *= 0.3 / mu.sup();
    const double gamma = mu.sup() + c_modulus_seminorm(mu, ModulusSpec::log_power(alpha), SeminormMethod::FullPairScan).value;
    const std::vector<double> rs = {1.5, 3, 10, 100, 1e3, 1e4};
    const auto prof = i0_profile(w, rs);
    const double lhs = std::pow(w_theta_norm(mu, w), 2);
    const double rhs = std::pow(mu.norm(), 2) + 2 * PI * 4 * PI * square_dini_constant(alpha, beta).value * gamma * gamma / prof.ratio_min;
    EXPECT_LE(lhs, rhs);
}

TEST(SpectralTail, BoundsAndZero) {
    const GridSpec g(128, 4.0);
    const ThetaWeight w(ModulusSpec::log_power(1.2));
    const auto gauss = Field::sample(g, [](cplx z) { return cplx(std::exp(-std::norm(z))); });
    const double W2 = std::pow(w_theta_norm(gauss, w), 2);
    EXPECT_LE(spectral_tail(gauss, w, 4.0, 0.0), W2 / w(4.0));
    EXPECT_LE(spectral_tail(gauss, w, 4.0, 1.0), W2);
    const auto low = Field::sample(g, [](cplx z) { return std::exp(I * PI * z.real() / 4.0); });
    EXPECT_LT(spectral_tail(low, w, 2.0, 0.5), 1e-24 * std::pow(low.norm(), 2));
    EXPECT_THROW(spectral_tail(gauss, w, 1.0, 0.5), std::invalid_argument);
    EXPECT_THROW(spectral_tail(gauss, w, 2.0, 1.5), std::invalid_argument);
}

TEST(SpectralTail, LemmaHoldsOnRandomInputs) {
    const GridSpec g(64, 4.0);
    const ThetaWeight w(ModulusSpec::log_power(1.5));
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> R(1.1, 8.0), nu(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const auto f = random_smooth(g, rng) + dini_bump(g, 2.0, 0.2);
        const double r0 = R(rng), v = nu(rng);
        EXPECT_LE(spectral_tail(f, w, r0, v), std::pow(w_theta_norm(f, w), 2) / std::pow(w(r0), 1 - v) * (1 + 1e-12));
    }
}

TEST(I0, RotationInvariantAndFiniteAtOne) {
    const ThetaWeight w(ModulusSpec::log_power(1.2));
    for (double r : {1.0, 7.0, 120.0}) {
        const auto x = i0_value(w, r, Axis::X), y = i0_value(w, r, Axis::Y);
        EXPECT_TRUE(x.converged);
        EXPECT_NEAR(x.value, y.value, 1e-6 * x.value) << r;
    }
    const auto one = i0_value(w, 1.0);
    EXPECT_TRUE(std::isfinite(one.value));
    EXPECT_GT(one.value, 0.0);
}

// For t beyond the angular cutoff the closed form is used directly; below it
// the nested quadrature must agree with 4 pi (1 - J0(2 pi t)).
TEST(I0, AngularIntegralMatchesBessel) {
    for (double t : {0.3, 1.0, 7.5, 33.0})
        EXPECT_NEAR(detail::angular_integral(t, Axis::X, 1e-11), 4 * PI * (1 - oracle::bessel_j0(2 * PI * t)), 1e-9);
}

TEST(I0, RatioBandedOverRange) {
    const ThetaWeight w(ModulusSpec::log_power(1.2));
    std::vector<double> rs;
    for (double r = 10; r <= 1e4 * 1.001; r *= std::sqrt(10.0)) rs.push_back(r);
    const auto p = i0_profile(w, rs);
    EXPECT_GT(p.band, 0.0);
    for (const auto& pt : p.points) {
        EXPECT_TRUE(pt.converged) << pt.r;
        EXPECT_GE(pt.ratio, p.band);
        EXPECT_LE(pt.ratio, 1.0 / p.band);
    }
}

TEST(Seminorm, ConstantLinearAndRefusal) {
    const GridSpec g(64, 4.0), big(128, 4.0);
    const auto spec = ModulusSpec::log_power(2.0);
    EXPECT_EQ(c_modulus_seminorm(Field(g, 2.0), spec, SeminormMethod::FullPairScan).value, 0.0);
    EXPECT_EQ(c_modulus_seminorm(Field(g, 2.0), spec).value, 0.0);
    const auto f = dini_bump(g, 2.0);
    const double a = c_modulus_seminorm(f, spec, SeminormMethod::FullPairScan).value;
    const double b = c_modulus_seminorm(f * cplx(0.0, -3.0), spec, SeminormMethod::FullPairScan).value;
    EXPECT_NEAR(b, 3.0 * a, 1e-12 * a);
    EXPECT_THROW(c_modulus_seminorm(Field(big), spec, SeminormMethod::FullPairScan), std::invalid_argument);
}

TEST(Seminorm, SampledNeverExceedsFullAndIsDeterministic) {
    const GridSpec g(64, 4.0);
    std::mt19937_64 rng(5);
    const auto f = random_smooth(g, rng);
    const auto spec = ModulusSpec::log_power(1.0);
    const auto full = c_modulus_seminorm(f, spec, SeminormMethod::FullPairScan);
    const auto s1 = c_modulus_seminorm(f, spec, SeminormMethod::SampledPairs, 42);
    const auto s2 = c_modulus_seminorm(f, spec, SeminormMethod::SampledPairs, 42);
    EXPECT_LE(s1.value, full.value);
    EXPECT_GE(s1.value, 0.9 * full.value);
    EXPECT_EQ(s1.value, s2.value);
    EXPECT_EQ(s1.pair_count, s2.pair_count);
    EXPECT_EQ(full.pair_count, (64u * 64u) * (64u * 64u - 1u) / 2u);
    EXPECT_EQ(s1.method, SeminormMethod::SampledPairs);
}

TEST(Interpolation, ZeroField) {
    const auto c = interpolation_bound(Field(GridSpec(32, 2.0)), ModulusSpec::integrated(2.0), Axis::X,
                                       SeminormMethod::FullPairScan);
    EXPECT_EQ(c.lhs, 0.0);
    EXPECT_EQ(c.rhs, 0.0);
}

// sigma = r^a: sigma(zeta^-1(x)) = x^(a / (1 + a)).
TEST(Interpolation, HolderExponent) {
    for (double a : {0.25, 0.5, 0.8})
        for (double x : {1e-3, 1e-6, 1e-9}) {
            const double got = std::log(ModulusSpec::holder(a)(invert_r_sigma(ModulusSpec::holder(a), x))) / std::log(x);
            EXPECT_NEAR(got, a / (1 + a), 1e-12);
        }
    const auto s = ModulusSpec::integrated(2.0);
    for (double x : {1e-12, 1e-4, 0.01, 0.3, 5.0}) {
        const double r = invert_r_sigma(s, x);
        EXPECT_NEAR(r * s(r), x, 1e-14 * std::max(1.0, x));
    }
}

TEST(Interpolation, HoldsForRandomBumps) {
    const GridSpec g(64, 2.0);
    std::mt19937_64 rng(2024);
    int pass = 0;
    for (int i = 0; i < 100; ++i) {
        const auto f = random_smooth(g, rng);
        const auto c = interpolation_bound(f, ModulusSpec::integrated(2.0), i % 2 ? Axis::Y : Axis::X,
                                           SeminormMethod::FullPairScan);
        pass += c.holds();
    }
    EXPECT_EQ(pass, 100);
}

TEST(Oscillatory, MatchesBesselOracle) {
    for (double s : {1.0, 2.0, 5.0, 10.0}) {
        const auto q = oscillatory_integral(s);
        EXPECT_TRUE(q.converged);
        EXPECT_NEAR(q.value, PI * oracle::bessel_j0(2 * PI * s), 1e-8);
    }
    EXPECT_THROW(oscillatory_integral(0.5), std::invalid_argument);
}

TEST(Oscillatory, EnvelopeDecays) {
    // local maxima of |F| over unit windows follow s^-1/2
    double prev = INFINITY;
    for (double s0 : {2.0, 8.0, 32.0}) {
        double m = 0.0;
        for (double s = s0; s < s0 + 1.0; s += 0.01) m = std::max(m, std::abs(oscillatory_integral(s).value));
        EXPECT_LT(m, prev);
        // pi * sqrt(2 / (pi * 2 pi s)) = s^-1/2
        EXPECT_NEAR(m * std::sqrt(s0), 1.0, 0.05);
        prev = m;
    }
}

TEST(Oscillatory, GapBoundedBelow) {
    double lo = INFINITY;
    for (int i = 0; i <= 980; ++i) lo = std::min(lo, oscillatory_gap(1.0 + 0.05 * i));
    EXPECT_GE(lo, 4.3);
}

TEST(KernelDecay, L1BoundsTransformAtZero) {
    const GridSpec g(256, 4.0);
    for (cplx z : {cplx(0), cplx(1), cplx(0, 2)}) {
        const auto rep = kernel_fourier_decay(z, 1e9, g);
        EXPECT_LE(rep.at_zero, rep.l1_norm);
        EXPECT_GT(rep.sup_ratio, 0.0);
        EXPECT_TRUE(std::isfinite(rep.sup_ratio));
    }
    EXPECT_THROW(kernel_fourier_decay(cplx(4, 0), 10, g), std::invalid_argument);
}

TEST(KernelDecay, L1NormClosedFormAtOrigin) {
    // chi(|y|)/(pi|y|) integrates to 2 int_0^inf chi = 2 (1 + int_1^1.5 chi)
    const double tail = integrate([](double r) { return radial_cutoff(r); }, 1.0, 1.5, 1e-13).value;
    EXPECT_NEAR(cauchy_kernel_l1(0.0), 2.0 * (1.0 + tail), 1e-8);
}

TEST(KernelDecay, FarPointDecaysRapidly) {
    const GridSpec g(256, 4.0);
    const auto rep = kernel_fourier_decay(cplx(-4, 0), 1e9, g);
    // |K^| * |xi|^p keeps shrinking between shells 4 and 16 for every tested p
    for (int p = 1; p <= 4; ++p) {
        double mid = 0, hi = 0;
        for (const auto& s : rep.profile) {
            if (s.xi >= 4 && s.xi <= 6) mid = std::max(mid, s.value * std::pow(s.xi, p));
            if (s.xi >= 14 && s.xi <= 16) hi = std::max(hi, s.value * std::pow(s.xi, p));
        }
        EXPECT_LT(hi, mid) << p;
    }
}
