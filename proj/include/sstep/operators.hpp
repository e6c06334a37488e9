#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "sstep/dense.hpp"
#include "sstep/vector_ops.hpp"

namespace sstep {

using Index = std::int32_t;
using vec::Vector;

/// Square sparse matrix in CSR form. Both triangles are stored for symmetric operators.
///
/// The constructor checks the structural invariants (offsets, sorted unique columns in
/// range). Symmetry and the positive diagonal are properties of the SPD operators the
/// solvers expect; query them with `is_symmetric()` / `has_positive_diagonal()`.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t n, std::vector<std::size_t> row_offsets, std::vector<Index> col_indices,
                 std::vector<double> values);

    struct Triplet {
        Index row;
        Index col;
        double value;
    };
    /// Duplicate (row, col) entries are summed.
    static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);
    static SparseMatrix identity(std::size_t n);
    static SparseMatrix diagonal(std::span<const double> diag);

    std::size_t n() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return values_.size(); }
    bool empty() const noexcept { return n_ == 0; }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const Index> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const Index> row_cols(std::size_t i) const {
        return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }
    std::span<const double> row_values(std::size_t i) const {
        return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    /// Stored value at (i, j), 0 when not stored.
    double at(std::size_t i, std::size_t j) const;
    Vector diagonal_values() const;

    bool is_symmetric(double rel_tol = 0.0) const;
    bool has_positive_diagonal() const;

    /// Storage footprint of the CSR arrays.
    std::size_t bytes() const noexcept;

    dense::Matrix to_dense() const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

struct SpectralBounds {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
};

struct AmgHierarchy;

/// M in M^{-1} A. Identity, Jacobi (inverse diagonal) or one AMG V-cycle.
class Preconditioner {
public:
    enum class Kind { Identity, Jacobi, Amg };

    static Preconditioner identity(std::size_t n);
    static Preconditioner jacobi(const SparseMatrix& a);
    static Preconditioner amg(std::shared_ptr<const AmgHierarchy> hierarchy);

    Kind kind() const noexcept { return kind_; }
    std::size_t n() const noexcept { return n_; }
    std::span<const double> inverse_diagonal() const noexcept { return inv_diag_; }
    const AmgHierarchy* hierarchy() const noexcept { return amg_.get(); }

    /// z = M^{-1} r
    Vector apply(std::span<const double> r) const;

private:
    Kind kind_ = Kind::Identity;
    std::size_t n_ = 0;
    Vector inv_diag_;
    std::shared_ptr<const AmgHierarchy> amg_;
};

/// 27-point stencil on an nx*ny*nz interior grid, homogeneous Dirichlet boundary:
/// centre 26, every one of the 26 neighbours -1. Lexicographic ordering, x fastest.
SparseMatrix build_poisson_27pt(std::size_t nx, std::size_t ny, std::size_t nz);

/// y = A x
Vector spmv(const SparseMatrix& a, std::span<const double> x);
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);

/// b - A x
Vector residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x);

/// Lanczos on M^{-1}A in the M inner product, without reorthogonalisation.
/// The extreme Ritz values are widened multiplicatively by `margin`.
/// An empty `start` selects a fixed pseudo-random start vector.
SpectralBounds lanczos_extreme_eigs(const SparseMatrix& a, const Preconditioner& m, std::size_t iters,
                                    double margin, std::span<const double> start = {});

inline Vector apply_preconditioner(const Preconditioner& m, std::span<const double> r) { return m.apply(r); }

// Matrix Market coordinate I/O (real; symmetric or general).
void write_matrix_market(std::ostream& out, const SparseMatrix& a, bool symmetric = true);
SparseMatrix read_matrix_market(std::istream& in);

} // namespace sstep
