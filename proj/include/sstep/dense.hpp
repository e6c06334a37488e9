#pragma once

// Small dense kernels for s x s Gram work (s <= 64) and coarse-grid solves.

#include <cstddef>
#include <span>
#include <vector>

namespace sstep::dense {

/// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    Matrix transposed() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
std::vector<double> multiply(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& a);
double inf_norm(const Matrix& a);

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
std::vector<double> symmetric_eigenvalues(const Matrix& a);

/// Largest singular value, via the eigenvalues of A^T A.
double two_norm(const Matrix& a);

/// Lower-triangular Cholesky factor. Throws NotSpdError on a non-positive pivot.
Matrix cholesky_factor(const Matrix& a);

/// Solves L L^T x = b given the lower factor L.
std::vector<double> cholesky_substitute(const Matrix& lower, std::span<const double> b);

} // namespace sstep::dense
