#include "cgolab/field.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace cgolab;

namespace {

Field random_field(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    Field f(g);
    for (auto& v : f.samples()) v = {n01(rng), n01(rng)};
    return f;
}

// Sum over the nearest lattice images so the sample is truly periodic.
template <class F>
Field periodized(const GridSpec& g, F&& f) {
    const double P = 2.0 * g.half_width;
    return Field::sample(g, [&](cplx z) {
        cplx s = 0.0;
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b) s += f(z + cplx(a * P, b * P));
        return s;
    });
}

Field gaussian(const GridSpec& g) {
    return periodized(g, [](cplx z) { return cplx(std::exp(-std::norm(z))); });
}

} // namespace

TEST(Grid, Validation) {
    EXPECT_THROW(GridSpec(48, 4.0), std::invalid_argument);
    EXPECT_THROW(GridSpec(16, 4.0), std::invalid_argument);
    EXPECT_THROW(GridSpec(64, 1.0), std::invalid_argument);
    const GridSpec g(64, 4.0);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.125);
    EXPECT_EQ(g.point(0, 0), cplx(-4.0, -4.0));
    EXPECT_EQ(g.point(32, 40), cplx(0.0, 1.0));
    EXPECT_EQ(g.freq(31), 31);
    EXPECT_EQ(g.freq(32), -32);
}

TEST(Field, SizeMismatchRejected) {
    EXPECT_THROW(Field(GridSpec(32, 4.0), std::vector<cplx>(10)), std::invalid_argument);
    EXPECT_THROW(Field(GridSpec(32, 4.0)) + Field(GridSpec(64, 4.0)), std::invalid_argument);
}

TEST(Spectral, ConstantHasOnlyZeroMode) {
    const GridSpec g(64, 4.0);
    const auto s = to_spectral(Field(g, 1.0));
    EXPECT_NEAR(std::abs(s.at_frequency(0, 0)), 64.0, 1e-12);
    double rest = 0.0;
    for (int m = 0; m < 64; ++m)
        for (int j = 0; j < 64; ++j)
            if (j || m) rest += std::abs(s(j, m));
    EXPECT_LT(rest, 1e-10);
}

TEST(Spectral, RoundTripAndPlancherel) {
    const GridSpec g(128, 4.0);
    const auto f = random_field(g, 7);
    const auto s = to_spectral(f);
    EXPECT_LE(relative_l2_error(from_spectral(s), f), 1e-12);
    EXPECT_NEAR(f.norm() / g.spacing(), s.norm2(), 1e-12 * s.norm2());
}

TEST(Spectral, SingleModeLandsAtItsFrequency) {
    const GridSpec g(64, 4.0);
    const int n1 = 5, n2 = -3;
    const auto f = Field::sample(g, [&](cplx z) {
        return std::exp(2.0 * PI * I * (n1 * z.real() + n2 * z.imag()) / (2.0 * g.half_width));
    });
    const auto s = to_spectral(f);
    EXPECT_NEAR(std::abs(s.at_frequency(n1, n2)), 64.0, 1e-10);
    EXPECT_NEAR(s.norm2(), 64.0, 1e-10);
}

TEST(Derivatives, GaussianCalculus) {
    const GridSpec g(256, 4.0);
    const auto u = gaussian(g);
    const auto want_dbar = periodized(g, [](cplx z) { return -z * std::exp(-std::norm(z)); });
    const auto want_d = periodized(g, [](cplx z) { return -std::conj(z) * std::exp(-std::norm(z)); });
    EXPECT_LE(relative_l2_error(d_bar(u), want_dbar), 1e-8);
    EXPECT_LE(relative_l2_error(d(u), want_d), 1e-8);
    // Without the images the edge value e^-16 leaves a derivative jump; a wider cell removes it.
    const GridSpec wide(256, 5.0);
    const auto raw = Field::sample(wide, [](cplx z) { return cplx(std::exp(-std::norm(z))); });
    const auto raw_want = Field::sample(wide, [](cplx z) { return -z * std::exp(-std::norm(z)); });
    EXPECT_LE(relative_l2_error(d_bar(raw), raw_want), 1e-8);
    EXPECT_LT(d_bar(Field(g, 3.0)).sup(), 1e-12);
    EXPECT_LT(d(Field(g, 3.0)).sup(), 1e-12);
}

TEST(Beurling, IntertwinesDerivatives) {
    const GridSpec g(256, 4.0);
    const auto u = gaussian(g);
    EXPECT_LE(relative_l2_error(beurling_T(d_bar(u)), d(u)), 1e-8);
}

TEST(Beurling, IsometryOnZeroMean) {
    const GridSpec g(128, 4.0);
    auto f = random_field(g, 11);
    f += -f.mean();
    EXPECT_NEAR(beurling_T(f).norm(), f.norm(), 1e-10 * f.norm());
    auto h = random_field(g, 12);
    h += cplx(5.0, 0.0);
    EXPECT_LT(beurling_T(h).norm(), h.norm());
}

TEST(Beurling, DiagonalOnSingleMode) {
    const GridSpec g(64, 4.0);
    const int n1 = 3, n2 = 4;
    const auto f = Field::sample(g, [&](cplx z) {
        return std::exp(2.0 * PI * I * (n1 * z.real() + n2 * z.imag()) / (2.0 * g.half_width));
    });
    const cplx zeta = cplx(n1, n2) / (2.0 * g.half_width);
    const cplx symbol = std::conj(zeta) / zeta;
    EXPECT_LE(relative_l2_error(beurling_T(f), f * symbol), 1e-12);
}

TEST(Cauchy, InvertsDbar) {
    const GridSpec g(256, 4.0);
    const auto u = gaussian(g);
    auto want = u;
    want += -u.mean();
    EXPECT_LE(relative_l2_error(cauchy_P(d_bar(u)), want), 1e-8);
    EXPECT_EQ(cauchy_P(Field(g)).sup(), 0.0);
}

TEST(Cauchy, DbarAfterPIsIdentityMinusMean) {
    const GridSpec g(128, 4.0);
    const auto f = random_field(g, 3);
    auto want = f;
    want += -f.mean();
    EXPECT_LE(relative_l2_error(d_bar(cauchy_P(f)), want), 1e-12);
}

TEST(Operators, CommuteWithTranslation) {
    const GridSpec g(64, 4.0);
    const auto f = random_field(g, 5);
    EXPECT_LE(relative_l2_error(beurling_T(f.shifted(1, 0)), beurling_T(f).shifted(1, 0)), 1e-12);
    EXPECT_LE(relative_l2_error(cauchy_P(f.shifted(0, 1)), cauchy_P(f).shifted(0, 1)), 1e-12);
}

// sup|P b| for b(z) = b1(z / eps) scales like eps while the L^4 norm scales
// like eps^(1/2), so the ratio stays bounded as the support shrinks.
TEST(Cauchy, BoundedOnShrinkingBumps) {
    const GridSpec g(512, 4.0);
    double prev = INFINITY;
    for (double eps : {1.0, 0.5, 0.25}) {
        const auto b = Field::sample(g, [eps](cplx z) { return cplx(radial_cutoff(std::abs(z) / eps, 0.0, 1.0)); });
        double l4 = 0.0;
        for (auto v : b.samples()) l4 += std::pow(std::abs(v), 4);
        l4 = std::pow(l4 * g.spacing() * g.spacing(), 0.25);
        const double ratio = cauchy_P(b).sup() / l4;
        EXPECT_LT(ratio, 1.2 * prev);
        prev = ratio;
    }
}

// Mean-free data: the periodic Cauchy transform converges as the cell grows.
TEST(Cauchy, ConvergesUnderCellDoubling) {
    auto probe = [](double L) {
        const GridSpec g(static_cast<int>(16 * L), L);
        const auto b = Field::sample(g, [](cplx z) { return z.real() * std::exp(-4.0 * std::norm(z)); });
        const auto p = cauchy_P(b);
        const int c = g.n / 2;
        return std::vector<cplx>{p(c, c), p(c + 8, c), p(c, c + 8), p(c + 12, c - 4)};
    };
    const auto a = probe(4), b = probe(8), c = probe(16);
    double d1 = 0, d2 = 0;
    for (int i = 0; i < 4; ++i) {
        d1 = std::max(d1, std::abs(a[i] - b[i]));
        d2 = std::max(d2, std::abs(b[i] - c[i]));
    }
    EXPECT_LT(d2, 0.5 * d1);
}

TEST(Ek, Properties) {
    const GridSpec g(64, 4.0);
    EXPECT_LT((e_k(g, 0.0) - Field(g, 1.0)).sup(), 1e-15);
    const cplx k(2.3, -1.7);
    const auto ek = e_k(g, k);
    for (auto v : ek.samples()) EXPECT_NEAR(std::abs(v), 1.0, 1e-14);
    EXPECT_LT((ek * e_k(g, -k) - Field(g, 1.0)).sup(), 1e-14);
}

TEST(Cutoff, Plateaus) {
    EXPECT_EQ(radial_cutoff(0.3), 1.0);
    EXPECT_EQ(radial_cutoff(1.0), 1.0);
    EXPECT_EQ(radial_cutoff(1.5), 0.0);
    EXPECT_NEAR(radial_cutoff(1.25), 0.5, 1e-15);
    const double h = 1e-6;
    for (double t : {0.1, 0.4, 0.77})
        EXPECT_NEAR(smooth_step_down_deriv(t), (smooth_step_down(t + h) - smooth_step_down(t - h)) / (2 * h), 1e-6);
}

TEST(Dealias, ProductMatchesExactForBandlimited) {
    const GridSpec g(32, 4.0);
    auto wave = [&](int n1, int n2) {
        return Field::sample(g, [=](cplx z) {
            return std::exp(2.0 * PI * I * (n1 * z.real() + n2 * z.imag()) / (2.0 * g.half_width));
        });
    };
    // 10 + 10 exceeds the Nyquist index 16: the plain product aliases, the padded one drops it.
    const auto a = wave(10, 0), b = wave(10, 0);
    EXPECT_LT(multiply_dealiased(a, b).sup(), 1e-12);
    EXPECT_NEAR((a * b).sup(), 1.0, 1e-12);
    const auto c = wave(3, 1), e = wave(-5, 2);
    EXPECT_LT((multiply_dealiased(c, e) - c * e).sup(), 1e-12);
}

TEST(Dump, RoundTrip) {
    const GridSpec g(32, 4.0);
    const auto f = random_field(g, 9);
    std::stringstream ss;
    write_field(ss, f, "gamma");
    std::string kind;
    const auto back = read_field(ss, &kind);
    EXPECT_EQ(kind, "gamma");
    EXPECT_EQ(back.grid(), g);
    EXPECT_EQ((back - f).sup(), 0.0);
    const auto raw = [&] {
        std::stringstream s2;
        write_field(s2, f, "x");
        return s2.str();
    }();
    EXPECT_EQ(raw.substr(0, 7), "32 4 x\n");
    EXPECT_EQ(raw.size(), 7 + 32u * 32u * 16u);
}
