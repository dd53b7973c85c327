// Command-line front end: solve, converge, oracle, mesh-info.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "platesim/error.hpp"
#include "platesim/harness.hpp"

namespace fs = std::filesystem;
using namespace platesim;

namespace {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfigError = 2,
    kSolverError = 3,
    kOracleMismatch = 4,
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> probes;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<int> m_per_edge;
    std::optional<int> refinements;
    bool no_polish = false;
};

RunConfig load(const std::string& path, const Overrides& o) {
    RunConfig cfg = load_config(path);
    if (o.seed) cfg.sim.seed = *o.seed;
    if (o.probes) cfg.sim.probes = *o.probes;
    if (o.alpha) cfg.sim.alpha = *o.alpha;
    if (o.beta) cfg.sim.beta = *o.beta;
    if (o.m_per_edge) cfg.sim.m_per_edge = *o.m_per_edge;
    if (o.refinements) cfg.refinements = *o.refinements;
    if (o.no_polish) cfg.polish = false;
    try {
        cfg.sim.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

std::ofstream open_output(const fs::path& dir, const std::string& file) {
    fs::create_directories(dir);
    std::ofstream out(dir / file);
    if (!out) throw Error(fmt::format("cannot write '{}'", (dir / file).string()));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eigenvalues of clamped plates carrying spring-mass oscillators"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", o.seed, "probe vector seed");
        sub->add_option("--probes", o.probes, "number of probe vectors")->check(CLI::PositiveNumber);
        sub->add_option("--alpha", o.alpha, "indicator threshold");
        sub->add_option("--beta", o.beta, "terminal half-width relative to the initial box");
        sub->add_option("--m-per-edge", o.m_per_edge, "quadrature nodes per box edge");
    };
    auto* solve = app.add_subcommand("solve", "locate eigenvalues on the initial mesh");
    auto* converge = app.add_subcommand("converge", "mesh-refinement study");
    auto* oracle = app.add_subcommand("oracle", "compare SIM with the dense linearized eigenproblem");
    auto* mesh_info = app.add_subcommand("mesh-info", "print mesh statistics for every level");
    for (auto* sub : {solve, converge, oracle, mesh_info}) add_common(sub);
    for (auto* sub : {solve, converge}) sub->add_flag("--no-polish", o.no_polish, "report SIM box centres only");
    converge->add_option("--refinements", o.refinements, "override the number of refinements");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const RunConfig cfg = load(config_path, o);
        const fs::path dir(out_dir);
        if (*solve) {
            const SolveReport rep = run_solve(cfg, &std::cerr);
            auto csv = open_output(dir, cfg.name + "_solve.csv");
            write_solve_csv(csv, rep);
            write_solve_csv(std::cout, rep);
        } else if (*converge) {
            const ConvergenceReport rep = run_convergence(cfg, &std::cerr);
            auto csv = open_output(dir, cfg.name + "_convergence.csv");
            write_csv(csv, rep.table);
            auto dat = open_output(dir, cfg.name + "_convergence.dat");
            write_gnuplot_data(dat, rep.table);
            auto svg = open_output(dir, cfg.name + "_convergence.svg");
            write_svg(svg, rep.table, fmt::format("{}: relative error vs. degrees of freedom", cfg.name));
            write_text(std::cout, rep.table);
        } else if (*oracle) {
            const OracleReport rep = run_oracle_check(cfg, &std::cerr);
            write_oracle_report(std::cout, rep);
            if (!rep.passed()) return kOracleMismatch;
        } else if (*mesh_info) {
            write_mesh_info(std::cout, cfg);
        }
    } catch (const ConfigError& e) {
        fmt::print(std::cerr, "configuration error: {}\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kSolverError;
    }
    return kOk;
}
