#include "ulam/errors.hpp"
#include "ulam/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

// Precedence: --out, then ULAMLAB_OUT_DIR, then output.dir in the config, then "out".
std::filesystem::path output_dir(const Options& o, const ulam::ExperimentConfig& cfg)
{
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("ULAMLAB_OUT_DIR"); env && *env) return env;
    if (cfg.output_dir) {
        const std::filesystem::path p = *cfg.output_dir;
        return p.is_absolute() ? p : cfg.base_dir / p;
    }
    return "out";
}

int execute(const Options& o, unsigned stages)
{
    ulam::ExperimentConfig cfg = ulam::load_config(o.config);
    if (o.seed) cfg.samples.seed = *o.seed;
    if (o.tol) {
        if (!(*o.tol > 0.0)) throw ulam::ConfigError("--tol must be positive");
        cfg.tol.extraction = *o.tol;
        cfg.tol.fixpoint = *o.tol;
    }
    if ((stages & ulam::stage::sweep) && !cfg.sweep_r) cfg.sweep_r = std::vector<double>{0.5, 0.9, 1.1, 1.5, 2.5, 3.0};
    const std::filesystem::path dir = output_dir(o, cfg);
    const ulam::RunResult res = ulam::run_scenario(cfg, dir, stages);
    std::cout << "entries: " << res.report.entries().size() << "  pass: " << res.report.count(ulam::Status::pass)
              << "  fail: " << res.report.count(ulam::Status::fail)
              << "  flagged: " << res.report.count(ulam::Status::flagged)
              << "  refused: " << res.report.count(ulam::Status::refused) << "\n";
    for (const auto& f : res.files) std::cout << "wrote " << f.string() << "\n";
    std::cout << "exit " << res.exit_code << "\n";
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ulamlab: numerical checks for additive-quadratic stability estimates"};
    app.require_subcommand(1);
    Options opts;

    const std::pair<const char*, unsigned> commands[] = {
        {"axioms", ulam::stage::axioms},   {"series", ulam::stage::series}, {"extract", ulam::stage::extract},
        {"fixpoint", ulam::stage::fixpoint}, {"bound", ulam::stage::bound},   {"audit", ulam::stage::audit},
        {"sweep", ulam::stage::sweep},     {"run", ulam::stage::all},
    };
    unsigned selected = 0;
    for (const auto& [name, stages] : commands) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
        sub->add_option("--config", opts.config, "experiment config (JSON)")->required();
        sub->add_option("--out", opts.out, "output directory");
        sub->add_option("--seed", opts.seed, "seed for random samples (overrides config)");
        sub->add_option("--tol", opts.tol, "extraction and fixed-point tolerance");
        sub->callback([&selected, s = stages] { selected = s; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        return execute(opts, selected);
    } catch (const ulam::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
