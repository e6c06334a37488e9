#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sstep/operators.hpp"

namespace sstep {

inline constexpr std::size_t kMaxBlockSize = 64;

enum class BasisKind { Chebyshev, Monomial };

const char* to_string(BasisKind kind);

/// What a basis builder does when column j collapses: throw BreakdownError, or
/// return the j columns built so far (they span an invariant subspace).
enum class OnBreakdown { Throw, Truncate };

/// n x s block of Krylov vectors, stored column-major in one contiguous array.
struct KrylovBasis {
    std::size_t n = 0;
    std::size_t s = 0;
    std::vector<double> columns;
    BasisKind kind = BasisKind::Chebyshev;
    double theta = 0.0; ///< 2 / (lambda_max - lambda_min); Chebyshev only
    double sigma = 0.0; ///< (lambda_max + lambda_min) / 2; Chebyshev only
    std::vector<double> scaling;
    bool is_scaled = false;

    std::span<const double> column(std::size_t j) const { return {columns.data() + j * n, n}; }
    std::span<double> column(std::size_t j) { return {columns.data() + j * n, n}; }

    /// P alpha
    Vector combine(std::span<const double> alpha) const;
    /// P^T v
    Vector project(std::span<const double> v) const;
    double frobenius_norm() const;
};

/// p0 = r, p1 = theta (M^{-1}A - sigma I) p0, p_{j+1} = 2 theta (M^{-1}A - sigma I) p_j - p_{j-1}.
KrylovBasis chebyshev_basis(const SparseMatrix& a, const Preconditioner& m, std::span<const double> r, std::size_t s,
                            const SpectralBounds& bounds, OnBreakdown on_breakdown = OnBreakdown::Throw);

/// p_j = (M^{-1}A)^j r.
KrylovBasis monomial_basis(const SparseMatrix& a, const Preconditioner& m, std::span<const double> r, std::size_t s,
                           OnBreakdown on_breakdown = OnBreakdown::Throw);

/// Returns a copy with every column scaled to unit A-norm, d_i = (p_i^T A p_i)^{-1/2}.
KrylovBasis scale_columns_anorm(const KrylovBasis& basis, const SparseMatrix& a);

} // namespace sstep
