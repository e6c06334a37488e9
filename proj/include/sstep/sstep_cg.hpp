#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "sstep/basis.hpp"
#include "sstep/operators.hpp"

namespace sstep {

enum class GramMode { Fgs, Cholesky };

const char* to_string(GramMode mode);

struct SStepConfig {
    std::size_t s = 10;
    std::size_t nu = 30;
    GramMode gram_mode = GramMode::Fgs;
    BasisKind basis_kind = BasisKind::Chebyshev;
    double tol = 1e-6;
    std::size_t max_outer = 500;
    std::size_t lanczos_iters = 10;
    double lanczos_margin = 0.10;
    std::optional<double> early_exit_delta;
    /// Re-estimate the spectral bounds every k outer iterations; 0 keeps the setup estimate.
    std::size_t bounds_refresh_interval = 0;
    /// Record kappa(G_k) each outer iteration (dense eigensolve per step).
    bool record_kappa = false;

    void validate() const;
};

struct SolveStats {
    std::size_t outer_iterations = 0;
    std::vector<double> residual_history; ///< ||r_k|| / ||r_0||, entry 0 is the initial residual
    std::vector<double> delta_history;    ///< relative Gram residual of each inner solve
    std::vector<double> basis_norm_history; ///< ||P~_k||_F
    std::vector<double> kappa_g_history;
    double norm_a_estimate = 0.0;
    double budget = 0.0; ///< sum_k delta_k ||A|| ||P_k||
    bool converged = false;
    bool breakdown = false;
    SpectralBounds bounds;
};

struct SStepResult {
    Vector x;
    SolveStats stats;
};

/// Restarted s-step CG: each outer step builds an s-column basis from the current
/// residual, solves G alpha = P~^T r, sets x += P~ alpha and recomputes r = b - Ax.
SStepResult sstep_cg_solve(const SparseMatrix& a, const Preconditioner& m, std::span<const double> b,
                           std::span<const double> x0, const SStepConfig& cfg);

struct CgResult {
    Vector x;
    std::size_t iterations = 0;
    std::vector<double> residual_history; ///< ||r_k|| / ||r_0||
    bool converged = false;
};

/// Preconditioned CG. Stops on the true residual b - Ax, not only the recurrence.
CgResult classical_cg(const SparseMatrix& a, const Preconditioner& m, std::span<const double> b,
                      std::span<const double> x0, double tol, std::size_t max_iter);

/// sum_k delta_k * norm_a * norm_p[k]
double inexactness_budget(std::span<const double> delta_history, double norm_a_estimate,
                          std::span<const double> norm_p_history);

nlohmann::json to_json(const SStepConfig& cfg);
nlohmann::json to_json(const SolveStats& stats, const SStepConfig& cfg);

} // namespace sstep
