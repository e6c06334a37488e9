#pragma once

// Desk-scale experiment drivers shared by the CLI and the acceptance suite.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sstep/amg.hpp"
#include "sstep/operators.hpp"
#include "sstep/rng.hpp"

namespace sstep::experiments {

enum class Experiment { Conditioning, NuSweep, Equivalence, AmgCoarse, Baseline };
enum class Format { Csv, Json };
enum class PrecondKind { Jacobi, Amg };

const char* to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

struct ExperimentConfig {
    Experiment experiment = Experiment::Conditioning;
    std::array<std::size_t, 3> grid{32, 32, 32};
    std::vector<std::size_t> s_values{10, 20};
    std::vector<std::size_t> nu_values{6, 15, 30};
    double tol = 1e-6;
    std::uint64_t seed = 42;
    std::string output_path;
    Format format = Format::Csv;
    PrecondKind precond = PrecondKind::Jacobi;
    std::size_t max_outer = 2000;
    std::size_t target_coarse = 500;
    std::size_t nu_coarse = 20;
    std::size_t instances = 200;
    bool parallel = false;

    void validate() const;
    /// Stable key=value rendering of every field that affects results.
    std::string canonical() const;
    std::uint64_t hash() const;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Table {
    std::string experiment;
    std::string config_hash;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<Check> checks;

    bool passed() const;
};

/// Manufactured problem on the configured grid: b = A x*, x* uniform in [-1, 1].
struct PoissonProblem {
    SparseMatrix a;
    Vector x_star;
    Vector b;
};
PoissonProblem make_poisson_problem(const std::array<std::size_t, 3>& grid, std::uint64_t seed);

/// diag(linspace(1, 100, n)): kappa = 100.
SparseMatrix synthetic_kappa100(std::size_t n = 1000);

/// Random sparse symmetric, strictly diagonally dominant matrix with positive diagonal.
SparseMatrix random_spd_matrix(Rng& rng, std::size_t n, std::size_t offdiag_per_row = 4);

/// ||x - x*||_A / ||x*||_A
double a_norm_error(const SparseMatrix& a, std::span<const double> x, std::span<const double> x_star);

std::string format_number(double v);

Table run_conditioning(const ExperimentConfig& cfg);
Table run_nu_sweep(const ExperimentConfig& cfg);
Table run_equivalence(const ExperimentConfig& cfg);
Table run_amg_coarse(const ExperimentConfig& cfg);
Table run_baseline(const ExperimentConfig& cfg);
Table run(const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const Table& table);
void write_json(std::ostream& out, const Table& table, const ExperimentConfig& cfg);
void write_table(std::ostream& out, const Table& table, const ExperimentConfig& cfg);

} // namespace sstep::experiments
