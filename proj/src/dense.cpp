#include "sstep/dense.hpp"

#include "sstep/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sstep::dense {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("dense multiply: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw DimensionError("dense matvec: length mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) sum += a(i, j) * x[j];
        y[i] = sum;
    }
    return y;
}

double frobenius_norm(const Matrix& a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v * v;
    return std::sqrt(sum);
}

double inf_norm(const Matrix& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) row += std::abs(a(i, j));
        best = std::max(best, row);
    }
    return best;
}

std::vector<double> symmetric_eigenvalues(const Matrix& input) {
    if (input.rows() != input.cols()) throw DimensionError("eigenvalues: matrix not square");
    const std::size_t n = input.rows();
    Matrix a = input;

    // Cyclic Jacobi rotations; quadratically convergent once off-diagonal mass is small.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                total += a(i, j) * a(i, j);
                if (i != j) off += a(i, j) * a(i, j);
            }
        if (off <= 1e-32 * total || off == 0.0) break;

        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double two_norm(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const Matrix gram = multiply(a.transposed(), a);
    const auto eig = symmetric_eigenvalues(gram);
    return std::sqrt(std::max(0.0, eig.back()));
}

Matrix cholesky_factor(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix not square");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = a(j, j);
        for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
        if (!(pivot > 0.0)) throw NotSpdError("cholesky: non-positive pivot at index " + std::to_string(j));
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / ljj;
        }
    }
    return l;
}

std::vector<double> cholesky_substitute(const Matrix& lower, std::span<const double> b) {
    const std::size_t n = lower.rows();
    if (b.size() != n) throw DimensionError("cholesky solve: length mismatch");
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) y[i] -= lower(i, k) * y[k];
        y[i] /= lower(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) y[i] -= lower(k, i) * y[k];
        y[i] /= lower(i, i);
    }
    return y;
}

} // namespace sstep::dense
