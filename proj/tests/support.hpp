#pragma once

// Eigen-backed dense oracles shared by the unit tests.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "sstep/basis.hpp"
#include "sstep/dense.hpp"
#include "sstep/gram.hpp"
#include "sstep/experiments.hpp"
#include "sstep/operators.hpp"
#include "sstep/rng.hpp"

namespace oracle {

inline Eigen::MatrixXd dense(const sstep::SparseMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.n(), a.n());
    for (std::size_t i = 0; i < a.n(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) m(i, cols[k]) = vals[k];
    }
    return m;
}

inline Eigen::MatrixXd dense(const sstep::dense::Matrix& a) {
    Eigen::MatrixXd m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    return m;
}

inline Eigen::MatrixXd block(const sstep::KrylovBasis& b) {
    Eigen::MatrixXd m(b.n, b.s);
    for (std::size_t j = 0; j < b.s; ++j)
        for (std::size_t i = 0; i < b.n; ++i) m(i, j) = b.column(j)[i];
    return m;
}

inline Eigen::VectorXd vec(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline sstep::dense::Matrix to_dense(const Eigen::MatrixXd& m) {
    sstep::dense::Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

/// Ascending eigenvalues of a symmetric matrix.
inline Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

inline double max_rel_diff(std::span<const double> a, std::span<const double> b) {
    double scale = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        scale = std::max(scale, std::abs(b[i]));
        diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

/// A scaled Chebyshev Gram system on a random sparse SPD matrix, with rhs = P~^T A r.
struct RandomGram {
    sstep::SparseMatrix a;
    sstep::KrylovBasis basis;
    sstep::GramSystem g;
    std::vector<double> r;
    std::vector<double> rhs;
};

inline RandomGram random_chebyshev_gram(sstep::Rng& rng, std::size_t s) {
    RandomGram out;
    const std::size_t n = rng.index(std::max<std::size_t>(3 * s, 20), 100);
    out.a = sstep::experiments::random_spd_matrix(rng, n);
    const auto seed = rng.normal_vector(n);
    out.r = rng.normal_vector(n);
    const auto id = sstep::Preconditioner::identity(n);
    const auto bounds = sstep::lanczos_extreme_eigs(out.a, id, 10, 0.10, seed);
    out.basis = sstep::scale_columns_anorm(sstep::chebyshev_basis(out.a, id, seed, s, bounds), out.a);
    out.g = sstep::assemble_gram(out.basis, out.a);
    out.rhs = out.basis.project(sstep::spmv(out.a, out.r));
    return out;
}

} // namespace oracle
