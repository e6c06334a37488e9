#pragma once

// Aggregation AMG with symmetric Gauss-Seidel smoothing and three coarse-grid
// solvers: dense Cholesky, forward Gauss-Seidel on the assembled Galerkin
// operator, and forward Gauss-Seidel that never forms the coarse operator.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sstep/dense.hpp"
#include "sstep/operators.hpp"
#include "sstep/sstep_cg.hpp"

namespace sstep {

enum class CoarseMode { Direct, FgsAssembled, FgsStreaming };

const char* to_string(CoarseMode mode);

/// Unsmoothed (piecewise-constant) prolongator: fine dof i belongs to coarse dof aggregate[i].
struct Prolongator {
    std::size_t n_coarse = 0;
    std::vector<Index> aggregate;

    std::size_t n_fine() const noexcept { return aggregate.size(); }
    static Prolongator identity(std::size_t n);

    /// P x_c
    Vector prolong(std::span<const double> coarse) const;
    /// P^T x_f
    Vector restrict_to_coarse(std::span<const double> fine) const;
    /// Number of fine dofs per aggregate.
    std::vector<std::size_t> aggregate_sizes() const;
};

/// Row-compressed rectangular block, used for the cached products P^T A_f.
struct RowBlock {
    std::vector<std::size_t> offsets{0};
    std::vector<Index> cols;
    std::vector<double> values;

    std::size_t bytes() const noexcept {
        return offsets.size() * sizeof(std::size_t) + cols.size() * sizeof(Index) + values.size() * sizeof(double);
    }
};

struct AmgLevel {
    std::size_t n = 0;
    /// Level operator; left empty for the coarsest level in FgsStreaming mode.
    SparseMatrix a;
    /// Map to the next coarser level; unused on the coarsest level.
    Prolongator p;
};

/// Data for the matrix-free coarse solve. Products with A_c are formed as
/// P^T (A_f (P v)) from the next-finer operator and the last prolongator.
struct StreamingCoarse {
    std::size_t fine_level = 0;
    Prolongator chain;
    std::vector<std::size_t> member_offsets;
    std::vector<Index> members;
    Vector diagonal;
    bool cached = false;
    RowBlock products; ///< rows of P^T A_f when cached

    std::size_t bytes() const noexcept;
};

struct AmgOptions {
    double strength = 0.08;
    std::size_t smoother_sweeps = 1;
    /// Cache A_f P e_j per coarse column; off recomputes the products every sweep.
    bool cache_streaming_products = true;
};

struct AmgHierarchy {
    std::vector<AmgLevel> levels;
    CoarseMode coarse_mode = CoarseMode::Direct;
    std::size_t nu_coarse = 20;
    std::size_t smoother_sweeps = 1;
    dense::Matrix coarsest_factor; ///< lower Cholesky factor, Direct mode only
    StreamingCoarse streaming;     ///< FgsStreaming mode only

    std::size_t coarse_size() const { return levels.back().n; }
    /// Memory held exclusively by the coarse solver.
    std::size_t coarse_solve_bytes() const;
};

struct VcycleStats {
    std::size_t cycles = 0;
    std::vector<double> residual_history; ///< ||b - Ax|| / ||b - Ax0||, entry 0 is 1
    std::size_t coarse_solve_bytes = 0;
    bool converged = false;
};

/// Greedy aggregation in natural order over the strong-connection graph
/// |a_ij| >= strength * sqrt(m_i m_j), m_i the largest off-diagonal magnitude of row i.
Prolongator aggregate(const SparseMatrix& a, double strength);

/// P^T A P for a piecewise-constant P.
SparseMatrix galerkin_product(const SparseMatrix& a, const Prolongator& p);

AmgHierarchy amg_setup(const SparseMatrix& a, std::size_t target_coarse, CoarseMode coarse_mode,
                       std::size_t nu_coarse, const AmgOptions& options = {});

/// One V(s,s) cycle starting from x: forward GS pre-smoothing, backward GS post-smoothing.
Vector vcycle(const AmgHierarchy& h, std::span<const double> b, std::span<const double> x);

/// Coarsest-level solve as dispatched inside the V-cycle, from a zero initial guess.
Vector coarse_solve(const AmgHierarchy& h, std::span<const double> rhs_c);

/// nu forward Gauss-Seidel sweeps on an assembled CSR operator, starting from x.
void forward_gauss_seidel(const SparseMatrix& a, std::span<const double> b, std::span<double> x, std::size_t sweeps);
void backward_gauss_seidel(const SparseMatrix& a, std::span<const double> b, std::span<double> x, std::size_t sweeps);

/// nu FGS sweeps on A_c from zero, A_c never formed. Requires FgsStreaming mode.
Vector coarse_solve_fgs_streaming(const AmgHierarchy& h, std::span<const double> rhs_c, std::size_t nu);
/// nu FGS sweeps on the assembled coarsest operator from zero. Requires FgsAssembled mode.
Vector coarse_solve_fgs_assembled(const AmgHierarchy& h, std::span<const double> rhs_c, std::size_t nu);

/// Galerkin operator of the coarsest level, formed on demand (for diagnostics in streaming mode).
SparseMatrix coarsest_operator(const AmgHierarchy& h);

/// Stationary iteration x <- vcycle(x) until ||b - Ax|| / ||b - Ax0|| < tol.
struct VcycleSolve {
    Vector x;
    VcycleStats stats;
};
VcycleSolve vcycle_solve(const AmgHierarchy& h, std::span<const double> b, std::span<const double> x0, double tol,
                         std::size_t max_cycles);

/// CG preconditioned by one V-cycle per iteration.
CgResult amg_pcg(const SparseMatrix& a, std::shared_ptr<const AmgHierarchy> h, std::span<const double> b, double tol,
                 std::size_t max_iter);

} // namespace sstep
