// Experiment harness: runs one desk-scale experiment and writes its table.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sstep/errors.hpp"
#include "sstep/experiments.hpp"

using namespace sstep::experiments;

int main(int argc, char** argv) {
    CLI::App app{"s-step CG / FGS Gram solver / AMG coarse-solve experiments"};
    app.require_subcommand(1, 1);

    ExperimentConfig cfg;
    std::vector<std::size_t> grid{32, 32, 32};
    std::string format = "csv";
    std::string precond = "jacobi";

    const std::map<std::string, Experiment> commands{
        {"conditioning", Experiment::Conditioning}, {"nu-sweep", Experiment::NuSweep},
        {"equivalence", Experiment::Equivalence},   {"amg-coarse", Experiment::AmgCoarse},
        {"baseline", Experiment::Baseline},
    };
    const std::map<std::string, std::string> help{
        {"conditioning", "Gram conditioning, ||L||_F and off-diagonal decay per s and basis kind"},
        {"nu-sweep", "outer iterations versus FGS sweep count nu, with a Cholesky reference"},
        {"equivalence", "randomized MGS (A-norm) versus first FGS sweep coefficients"},
        {"amg-coarse", "V-cycle counts and memory for direct / assembled FGS / streaming FGS coarse solves"},
        {"baseline", "classical PCG, AMG-PCG and s-step CG on the manufactured Poisson problem"},
    };

    for (const auto& [name, experiment] : commands) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--grid", grid, "grid dimensions NX NY NZ")->expected(3)->capture_default_str();
        sub->add_option("--s", cfg.s_values, "block sizes")->capture_default_str();
        sub->add_option("--nu", cfg.nu_values, "FGS sweep counts")->capture_default_str();
        sub->add_option("--tol", cfg.tol, "relative residual target")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
        sub->add_option("--out", cfg.output_path, "output file (default: stdout)");
        sub->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        sub->add_option("--precond", precond, "jacobi or amg (nu-sweep)")
            ->check(CLI::IsMember({"jacobi", "amg"}))
            ->capture_default_str();
        sub->add_option("--max-outer", cfg.max_outer, "outer iteration cap")->capture_default_str();
        sub->add_option("--target-coarse", cfg.target_coarse, "AMG coarsest size target")->capture_default_str();
        sub->add_option("--nu-coarse", cfg.nu_coarse, "FGS sweeps at the coarsest AMG level")->capture_default_str();
        sub->add_option("--instances", cfg.instances, "randomized instances (equivalence)")->capture_default_str();
        sub->add_flag("--parallel", cfg.parallel, "run independent (s, nu) cells concurrently");
        sub->callback([&cfg, experiment = experiment] { cfg.experiment = experiment; });
    }

    CLI11_PARSE(app, argc, argv);

    cfg.grid = {grid[0], grid[1], grid[2]};
    cfg.format = format == "json" ? Format::Json : Format::Csv;
    cfg.precond = precond == "amg" ? PrecondKind::Amg : PrecondKind::Jacobi;

    try {
        const auto start = std::chrono::steady_clock::now();
        const Table table = run(cfg);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

        if (cfg.output_path.empty()) {
            write_table(std::cout, table, cfg);
        } else {
            std::ofstream out(cfg.output_path);
            if (!out) {
                std::cerr << "cannot open " << cfg.output_path << '\n';
                return 2;
            }
            write_table(out, table, cfg);
        }

        std::cerr << table.experiment << ": " << table.rows.size() << " rows in " << elapsed.count() << " s\n";
        for (const auto& c : table.checks)
            std::cerr << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name << "  " << c.detail << '\n';
        return table.passed() ? 0 : 1;
    } catch (const sstep::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
