// Command-line front end: decay, stability, oracles, dtn, gen.
// Exit codes: 0 all checks passed, 1 runtime failure, 2 a check failed.

#include "cgolab/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace cgolab;

namespace {

void report(const std::string& what, const std::vector<std::string>& failures, const std::filesystem::path& dir) {
    std::cout << what << ": " << (failures.empty() ? "all checks passed" : "checks failed") << " (output in "
              << dir.string() << ")\n";
    for (const auto& f : failures) std::cout << "  FAIL " << f << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CGO decay and conductivity stability experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    int threads = -1;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);

    auto* decay = app.add_subcommand("decay", "CGO deviation against |k| for the generator family");
    auto* stability = app.add_subcommand("stability", "DtN distance against conductivity distance");
    auto* oracles = app.add_subcommand("oracles", "quadrature and property oracles from the appendix");
    auto* dtn = app.add_subcommand("dtn", "assemble one DtN matrix");
    auto* gen = app.add_subcommand("gen", "write one conductivity field");

    double amplitude = 0.1;
    int modes = 32;
    std::vector<int> mesh{256, 512};
    for (auto* sub : {dtn, gen}) sub->add_option("--amplitude", amplitude, "generator amplitude t");
    dtn->add_option("--modes", modes, "boundary modes N_b");
    dtn->add_option("--mesh", mesh, "radial and angular mesh counts")->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        ExperimentConfig cfg = config_path.empty() ? config_from_json(json::object()) : load_config(config_path);
        if (!out_dir.empty()) cfg.out = out_dir;
        if (threads >= 0) cfg.threads = threads;
        if (*seed_opt) cfg.seed = seed;
        const std::filesystem::path dir(cfg.out);

        if (*decay) {
            const auto r = run_decay_experiment(cfg);
            save_decay(dir, r);
            report("decay", r.failures, dir);
            return r.passed() ? 0 : 2;
        }
        if (*stability) {
            const auto r = run_stability_experiment(cfg);
            save_stability(dir, r);
            if (r.fit.valid)
                std::cout << "fit: a = " << r.fit.a << ", c2 = " << r.fit.c2 << ", c1 = " << r.fit.c1
                          << " (least squares " << r.fit.c1_ls << ")\n";
            report("stability", r.failures, dir);
            return r.passed() ? 0 : 2;
        }
        if (*oracles) {
            const auto r = run_appendix_oracles(cfg);
            save_oracles(dir, r);
            report("oracles", r.failures, dir);
            return r.passed() ? 0 : 2;
        }
        if (*dtn) {
            const auto c = make_dini_conductivity(cfg.family.member(amplitude), cfg.grid, cfg.seed);
            const auto A = dtn_assemble(c, modes, {mesh[0], mesh[1]});
            std::filesystem::create_directories(dir);
            save_dtn((dir / "dtn.bin").string(), A);
            const double asym = dtn_asymmetry(A);
            std::cout << "dtn: " << A.size() << " modes written to " << (dir / "dtn.bin").string()
                      << ", asymmetry " << asym << "\n";
            return asym <= 1e-2 ? 0 : 2;
        }
        if (*gen) {
            const auto c = make_dini_conductivity(cfg.family.member(amplitude), cfg.grid, cfg.seed);
            std::filesystem::create_directories(dir);
            save_field((dir / "gamma.field").string(), c.gamma, "gamma");
            std::cout << "gen: seminorm " << c.seminorm.value << " for t = " << amplitude << ", written to "
                      << (dir / "gamma.field").string() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
