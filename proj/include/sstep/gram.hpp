#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sstep/basis.hpp"
#include "sstep/dense.hpp"

namespace sstep {

/// G = D + L + L^T, with the strictly lower part L stored explicitly.
struct GramSystem {
    std::size_t s = 0;
    dense::Matrix g;
    dense::Matrix l_strict;
    bool unit_diagonal = false;

    static GramSystem from_matrix(const dense::Matrix& g, bool unit_diagonal = false);
};

struct FgsReport {
    std::vector<double> alpha;
    std::vector<double> residual_norms; ///< ||rhs - G alpha^(v)||_2 for v = 0..sweeps
    std::size_t sweeps = 0;
    double delta = 0.0; ///< residual_norms.back() / ||rhs||_2
};

struct FgsOptions {
    /// Stop once the relative residual drops below this; unset runs exactly nu sweeps.
    std::optional<double> early_exit_delta;
};

/// G = P~^T A P~ from a column-scaled basis, symmetrised by averaging g_ij and g_ji.
GramSystem assemble_gram(const KrylovBasis& basis, const SparseMatrix& a);

/// One forward Gauss-Seidel sweep: solves (D + L) alpha_out = rhs - L^T alpha_in.
std::vector<double> fgs_sweep(const GramSystem& g, std::span<const double> rhs, std::span<const double> alpha_in);

/// nu sweeps from alpha^(0) = 0, recording the residual after each.
FgsReport fgs_solve(const GramSystem& g, std::span<const double> rhs, std::size_t nu, const FgsOptions& options = {});

std::vector<double> cholesky_solve(const GramSystem& g, std::span<const double> rhs);

/// ||T||_2 for the iteration matrix T = -(D + L)^{-1} L^T.
double iteration_matrix_two_norm(const GramSystem& g);

struct GramDiagnostics {
    double cond = 0.0;            ///< lambda_max / lambda_min; +inf when not SPD
    double l_frob = 0.0;          ///< ||L||_F
    double l_two = 0.0;           ///< ||L||_2
    std::vector<double> decay;    ///< decay[k-1] = max_{|i-j| = k} |g_ij|
};

GramDiagnostics gram_diagnostics(const GramSystem& g);

/// Normwise backward error of one forward-substitution sweep (infinity norms):
/// ||(D+L) alpha - b|| / (||b|| + ||D+L|| ||alpha||), with b = rhs - L^T alpha_in.
/// An empty alpha_in means alpha_in = 0.
double backward_error_check(const GramSystem& g, std::span<const double> rhs, std::span<const double> alpha,
                            std::span<const double> alpha_in = {});

/// Constant c in the per-sweep bound c * s * eps used by the test suites.
inline constexpr double kBackwardErrorConstant = 8.0;

} // namespace sstep
