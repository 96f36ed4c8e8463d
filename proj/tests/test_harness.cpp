#include "cgolab/harness.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace cgolab;

namespace {

ExperimentConfig small_decay() {
    ExperimentConfig c;
    c.grid = GridSpec(128, 4.0);
    c.decay.kappas = {0.0, 0.3};
    c.decay.ks = {2.0, 4.0, 8.0};
    c.threads = 1;
    return c;
}

ExperimentConfig small_stability() {
    ExperimentConfig c;
    c.stability.grid = GridSpec(128, 4.0);
    c.stability.amplitudes = {0.4, 0.2, 0.1, 0.05};
    c.stability.mesh = {64, 128};
    c.stability.modes = 8;
    c.threads = 1;
    return c;
}

std::string body(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

std::string after_config(const std::string& csv) {
    const auto at = csv.find("# config ");
    return csv.substr(csv.find('\n', at) + 1);
}

std::size_t header_columns(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line) && line.starts_with("#")) {}
    return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

} // namespace

TEST(Config, DefaultsRoundTrip) {
    const ExperimentConfig d;
    const json j = to_json(d);
    EXPECT_EQ(to_json(config_from_json(j)).dump(), j.dump());
    EXPECT_EQ(to_json(config_from_json(json::object())).dump(), j.dump());
    EXPECT_EQ(j["stability"]["amplitudes"].size(), 6u);
    EXPECT_EQ(j["stability"]["grid"]["n"], 512);
    EXPECT_EQ(j["stability"]["modes"], 32);
}

TEST(Config, OverridesAndComplexValues) {
    const auto c = config_from_json(json::parse(R"({
        "grid": {"n": 128},
        "decay": {"ks": [3, [1.5, -2]]},
        "stability": {"probe_k": [0, 1], "mesh": [32, 64]},
        "solver": {"method": "fixed-point", "outer_tol": 1e-9},
        "seed": 7
    })"));
    EXPECT_EQ(c.grid.n, 128);
    EXPECT_EQ(c.grid.half_width, 4.0);
    ASSERT_EQ(c.decay.ks.size(), 2u);
    EXPECT_EQ(c.decay.ks[1], cplx(1.5, -2));
    EXPECT_EQ(c.stability.probe_k, cplx(0, 1));
    EXPECT_EQ(c.stability.mesh.angular, 64);
    EXPECT_EQ(c.solver.phase_method, PhaseMethod::FixedPoint);
    EXPECT_EQ(c.solver.outer_tol, 1e-9);
    EXPECT_EQ(c.seed, 7u);
}

TEST(Config, RejectsBadInput) {
    for (const char* bad : {R"({"grdi": {}})", R"({"grid": {"n": 100}})", R"({"decay": {"kappas": [1.0]}})",
                            R"({"decay": {"ks": [0]}})", R"({"decay": {"ks": [[1, 2, 3]]}})",
                            R"({"solver": {"method": "newton"}})", R"({"solver": {"tol": -1}})",
                            R"({"stability": {"amplitudes": [0.1, 0]}})", R"({"family": {"r_out": 1.2}})",
                            R"({"threads": -2})", R"({"grid": 5})"})
        EXPECT_THROW(config_from_json(json::parse(bad)), std::invalid_argument) << bad;
}

TEST(Pool, VisitsEachIndexOnceAndRethrows) {
    std::vector<int> hits(97, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("seven");
                              }),
                 std::runtime_error);
    EXPECT_GE(resolve_threads(0), 1);
    EXPECT_EQ(resolve_threads(5), 5);
}

TEST(DecayExperiment, ZeroMemberRowsAreZeroAndOutputIsDeterministic) {
    auto cfg = small_decay();
    const auto a = run_decay_experiment(cfg);
    cfg.threads = 3;
    const auto b = run_decay_experiment(cfg);
    ASSERT_EQ(a.rows.size(), 6u);
    for (std::size_t j = 0; j < 3; ++j) {
        const auto& r = a.rows[j];
        EXPECT_EQ(r.kappa, 0.0);
        EXPECT_EQ(r.linear_deviation, 0.0);
        EXPECT_EQ(r.phase_deviation, 0.0);
        EXPECT_EQ(r.lowfreq_mass, 0.0);
        EXPECT_EQ(r.g_norm, 0.0);
    }
    for (std::size_t j = 3; j < 6; ++j) {
        EXPECT_NEAR(a.rows[j].kappa, 0.3, 1e-2);
        EXPECT_GT(a.rows[j].phase_deviation, 0.0);
        EXPECT_TRUE(a.rows[j].linear_ok && a.rows[j].phase_ok) << a.rows[j].status;
        EXPECT_LE(a.rows[j].mass_theta, a.rows[j].mass_bound);
    }
    // threads only change who computes what; the echoed config records the count
    std::ostringstream x, y;
    write_decay_csv(x, a, false);
    write_decay_csv(y, b, false);
    EXPECT_EQ(after_config(x.str()), after_config(y.str()));
    std::ostringstream again;
    write_decay_csv(again, run_decay_experiment(small_decay()), false);
    EXPECT_EQ(again.str(), x.str());
    std::ostringstream xs, ys;
    write_decay_csv(xs, a);
    write_decay_csv(ys, b);
    EXPECT_TRUE(xs.str().starts_with("# generated "));
    EXPECT_EQ(body(xs.str()), x.str());
    EXPECT_EQ(header_columns(x.str()), decay_columns().size());
    // the resolved configuration is embedded
    EXPECT_NE(x.str().find("# config " + to_json(small_decay()).dump()), std::string::npos);
    ASSERT_EQ(a.fits.size(), 4u);
    EXPECT_FALSE(a.fits[0].checked);
    EXPECT_TRUE(a.fits[2].checked);
    EXPECT_GT(a.fits[2].a, 0.0);
    EXPECT_TRUE(a.fits[2].preferred == "dini" || a.fits[2].preferred == "holder");
    std::ostringstream f;
    write_decay_fits_csv(f, a, false);
    EXPECT_EQ(header_columns(f.str()), decay_fit_columns().size());
}

TEST(DecayExperiment, SolverFailuresAreRecordedNotFatal) {
    auto cfg = small_decay();
    cfg.decay.kappas = {0.3};
    cfg.solver.krylov_max = 1;
    cfg.solver.n_max = 2;
    const auto r = run_decay_experiment(cfg);
    ASSERT_EQ(r.rows.size(), 3u);
    for (const auto& row : r.rows) {
        EXPECT_FALSE(row.linear_ok);
        EXPECT_FALSE(row.phase_ok);
        EXPECT_FALSE(row.status.empty());
    }
    EXPECT_FALSE(r.passed());
    std::ostringstream os;
    write_decay_csv(os, r, false);
    EXPECT_NE(os.str().find(",0,"), std::string::npos);
}

TEST(StabilityFit, DegenerateBelowFourPoints) {
    const auto f = fit_stability({0.1, 0.01, 0.001}, {0.5, 0.1, 0.01}, {0.5, 1.0}, 1.2);
    EXPECT_FALSE(f.valid);
    EXPECT_EQ(f.usable, 3);
    EXPECT_FALSE(f.note.empty());
    // zeros and rho >= 1 are not usable either
    EXPECT_FALSE(fit_stability({0.0, 2.0, 0.1, 0.01, 0.001}, {0.0, 1.0, 0.5, 0.1, 0.01}, {0.5}, 1.2).valid);
}

TEST(StabilityFit, RecoversExactModel) {
    const ThetaWeight theta(ModulusSpec::log_power(1.2));
    const double c1 = 3.0, c2 = 0.5, a = 0.7;
    std::vector<double> rho, d;
    for (double r : {1e-2, 1e-3, 1e-4, 1e-6, 1e-8}) {
        rho.push_back(r);
        d.push_back(c1 * std::pow(theta(std::abs(std::log(r)) / c2), -a));
    }
    const auto f = fit_stability(rho, d, {0.1, 0.5, 2.0}, 1.2);
    ASSERT_TRUE(f.valid);
    EXPECT_EQ(f.c2, 0.5);
    EXPECT_NEAR(f.a, a, 1e-9);
    EXPECT_NEAR(f.c1_ls, c1, 1e-8);
    EXPECT_NEAR(f.c1, c1, 1e-8);
    EXPECT_TRUE(f.dominated);
    // a point pushed above the least-squares curve lifts c1
    d[2] *= 1.5;
    const auto g = fit_stability(rho, d, {0.5}, 1.2);
    EXPECT_GT(g.c1, g.c1_ls);
    EXPECT_FALSE(g.dominated_ls);
    EXPECT_TRUE(g.dominated);
    for (std::size_t i = 0; i < rho.size(); ++i) EXPECT_LE(d[i], g(theta, rho[i]) * (1 + 1e-12));
}

TEST(StabilityExperiment, SmallFamily) {
    const auto r = run_stability_experiment(small_stability());
    ASSERT_EQ(r.records.size(), 5u);
    const auto& id = r.records.front();
    EXPECT_EQ(id.t, 0.0);
    EXPECT_EQ(id.rho, 0.0);
    EXPECT_EQ(id.sup_gamma_diff, 0.0);
    EXPECT_EQ(id.sup_u_diff, 0.0);
    EXPECT_TRUE(r.monotone);
    for (const auto& x : r.records) {
        EXPECT_TRUE(x.ok) << x.status;
        EXPECT_TRUE(x.interp_holds || x.interp_lhs == 0.0);
        EXPECT_GE(x.sup_u_diff, 0.0);
    }
    ASSERT_TRUE(r.fit.valid) << r.fit.note;
    EXPECT_GT(r.fit.a, 0.0);
    EXPECT_TRUE(r.fit.dominated);
    EXPECT_TRUE(r.passed());
    std::ostringstream os;
    write_stability_csv(os, r, false);
    EXPECT_EQ(header_columns(os.str()), stability_columns().size());
}

TEST(Oracles, ReducedSweepReport) {
    ExperimentConfig c;
    c.oracles.s_max = 5.0;
    c.oracles.r_max = 1e3;
    c.oracles.r_extended = 1e4;
    c.oracles.kernel_n = 128;
    c.oracles.interpolation_trials = 10;
    c.threads = 2;
    const auto r = run_appendix_oracles(c);
    EXPECT_TRUE(r.passed());
    for (const char* key : {"oscillatory", "kernel_decay", "i0_theta", "interpolation", "config"})
        EXPECT_TRUE(r.report.contains(key)) << key;
    EXPECT_EQ(r.report["interpolation"]["passed"], 10);
    EXPECT_EQ(r.report["oscillatory"]["samples"], 81);
    EXPECT_EQ(r.report["i0_theta"].size(), 2u);
}

TEST(Files, SaveWritesSchemaAndData) {
    const auto dir = std::filesystem::temp_directory_path() / "cgolab_harness_files";
    std::filesystem::remove_all(dir);
    auto cfg = small_decay();
    cfg.decay.kappas = {0.0};
    cfg.decay.ks = {2.0};
    save_decay(dir, run_decay_experiment(cfg));
    for (const char* f : {"decay.csv", "decay_fits.csv", "decay.schema.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    std::ifstream is(dir / "decay.schema.json");
    const auto schema = json::parse(is);
    EXPECT_EQ(schema["schema"], decay_schema);
    EXPECT_EQ(schema["columns"].size(), decay_columns().size());
    std::filesystem::remove_all(dir);
}
