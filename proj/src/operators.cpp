#include "sstep/operators.hpp"

#include "sstep/amg.hpp"
#include "sstep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sstep {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::size_t> row_offsets, std::vector<Index> col_indices,
                           std::vector<double> values)
    : n_(n), row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices)), values_(std::move(values)) {
    if (n_ > static_cast<std::size_t>(std::numeric_limits<Index>::max()))
        throw SizeError("sparse matrix: dimension exceeds index range");
    if (row_offsets_.size() != n_ + 1) throw DimensionError("sparse matrix: row_offsets must have n+1 entries");
    if (row_offsets_.front() != 0 || row_offsets_.back() != col_indices_.size())
        throw DimensionError("sparse matrix: row_offsets do not span the column array");
    if (col_indices_.size() != values_.size()) throw DimensionError("sparse matrix: cols/values length mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        if (row_offsets_[i] > row_offsets_[i + 1]) throw DimensionError("sparse matrix: row_offsets decrease");
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            const Index c = col_indices_[k];
            if (c < 0 || static_cast<std::size_t>(c) >= n_) throw DimensionError("sparse matrix: column out of range");
            if (k > row_offsets_[i] && col_indices_[k - 1] >= c)
                throw DimensionError("sparse matrix: columns unsorted or duplicated in row " + std::to_string(i));
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
    for (const auto& t : triplets)
        if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n || static_cast<std::size_t>(t.col) >= n)
            throw DimensionError("from_triplets: index out of range");
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const auto& t = triplets[k];
        if (!cols.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
            vals.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        vals.push_back(t.value);
        ++offsets[static_cast<std::size_t>(t.row) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    const std::vector<double> ones(n, 1.0);
    return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
    const std::size_t n = diag.size();
    std::vector<std::size_t> offsets(n + 1);
    std::vector<Index> cols(n);
    for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
    for (std::size_t i = 0; i < n; ++i) cols[i] = static_cast<Index>(i);
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::vector<double>(diag.begin(), diag.end()));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<Index>(j));
    if (it == cols.end() || *it != static_cast<Index>(j)) return 0.0;
    return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
}

Vector SparseMatrix::diagonal_values() const {
    Vector d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const auto cols = row_cols(i);
        const auto vals = row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto j = static_cast<std::size_t>(cols[k]);
            if (j <= i) continue;
            const auto tcols = row_cols(j);
            const auto it = std::lower_bound(tcols.begin(), tcols.end(), static_cast<Index>(i));
            if (it == tcols.end() || *it != static_cast<Index>(i)) return false;
            const double other = row_values(j)[static_cast<std::size_t>(it - tcols.begin())];
            if (std::abs(other - vals[k]) > rel_tol * std::max(std::abs(other), std::abs(vals[k]))) return false;
        }
    }
    return true;
}

bool SparseMatrix::has_positive_diagonal() const {
    for (std::size_t i = 0; i < n_; ++i)
        if (!(at(i, i) > 0.0)) return false;
    return true;
}

std::size_t SparseMatrix::bytes() const noexcept {
    return row_offsets_.size() * sizeof(std::size_t) + col_indices_.size() * sizeof(Index) +
           values_.size() * sizeof(double);
}

dense::Matrix SparseMatrix::to_dense() const {
    dense::Matrix d(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
        const auto cols = row_cols(i);
        const auto vals = row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) d(i, static_cast<std::size_t>(cols[k])) = vals[k];
    }
    return d;
}

// ---------------------------------------------------------------------------

Preconditioner Preconditioner::identity(std::size_t n) {
    Preconditioner m;
    m.kind_ = Kind::Identity;
    m.n_ = n;
    return m;
}

Preconditioner Preconditioner::jacobi(const SparseMatrix& a) {
    Preconditioner m;
    m.kind_ = Kind::Jacobi;
    m.n_ = a.n();
    m.inv_diag_ = a.diagonal_values();
    for (auto& d : m.inv_diag_) {
        if (!(d > 0.0)) throw NotSpdError("jacobi: non-positive diagonal entry");
        d = 1.0 / d;
    }
    return m;
}

Preconditioner Preconditioner::amg(std::shared_ptr<const AmgHierarchy> hierarchy) {
    if (!hierarchy || hierarchy->levels.empty()) throw HierarchyError("amg preconditioner: empty hierarchy");
    Preconditioner m;
    m.kind_ = Kind::Amg;
    m.n_ = hierarchy->levels.front().n;
    m.amg_ = std::move(hierarchy);
    return m;
}

Vector Preconditioner::apply(std::span<const double> r) const {
    if (r.size() != n_) throw DimensionError("preconditioner: length mismatch");
    switch (kind_) {
    case Kind::Identity:
        return Vector(r.begin(), r.end());
    case Kind::Jacobi: {
        Vector z(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
        return z;
    }
    case Kind::Amg: {
        const Vector zero(r.size(), 0.0);
        return vcycle(*amg_, r, zero);
    }
    }
    return {};
}

// ---------------------------------------------------------------------------

SparseMatrix build_poisson_27pt(std::size_t nx, std::size_t ny, std::size_t nz) {
    if (nx == 0 || ny == 0 || nz == 0) throw SizeError("poisson: grid dimensions must be positive");
    constexpr auto limit = static_cast<std::size_t>(std::numeric_limits<Index>::max());
    if (nx > limit || ny > limit / nx || nz > limit / (nx * ny)) throw SizeError("poisson: grid too large");
    const std::size_t n = nx * ny * nz;
    if (n > limit / 27) throw SizeError("poisson: nonzero count exceeds index range");

    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(n * 27);
    vals.reserve(n * 27);

    const auto inside = [](std::size_t c, int d, std::size_t extent) {
        const auto v = static_cast<std::ptrdiff_t>(c) + d;
        return v >= 0 && v < static_cast<std::ptrdiff_t>(extent);
    };

    std::size_t row = 0;
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i, ++row) {
                for (int dz = -1; dz <= 1; ++dz) {
                    if (!inside(k, dz, nz)) continue;
                    for (int dy = -1; dy <= 1; ++dy) {
                        if (!inside(j, dy, ny)) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (!inside(i, dx, nx)) continue;
                            const std::size_t col = (i + dx) + nx * ((j + dy) + ny * (k + dz));
                            cols.push_back(static_cast<Index>(col));
                            vals.push_back(dx == 0 && dy == 0 && dz == 0 ? 26.0 : -1.0);
                        }
                    }
                }
                offsets[row + 1] = cols.size();
            }
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.n() || y.size() != a.n()) throw DimensionError("spmv: length mismatch");
    const auto offsets = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (std::size_t i = 0; i < a.n(); ++i) {
        double sum = 0.0;
        for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) sum += vals[k] * x[static_cast<std::size_t>(cols[k])];
        y[i] = sum;
    }
}

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
    Vector y(a.n());
    spmv(a, x, y);
    return y;
}

Vector residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x) {
    if (b.size() != a.n()) throw DimensionError("residual: length mismatch");
    Vector r = spmv(a, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return r;
}

// ---------------------------------------------------------------------------

SpectralBounds lanczos_extreme_eigs(const SparseMatrix& a, const Preconditioner& m, std::size_t iters, double margin,
                                    std::span<const double> start) {
    const std::size_t n = a.n();
    if (iters == 0) throw SpectralError("lanczos: iters must be >= 1");
    if (!(margin >= 0.0 && margin < 1.0)) throw SpectralError("lanczos: margin must lie in [0, 1)");
    if (m.n() != n) throw DimensionError("lanczos: preconditioner size mismatch");
    if (!start.empty() && start.size() != n) throw DimensionError("lanczos: start vector length mismatch");

    // r_j holds M v_j (unnormalised), z_j = M^{-1} r_j; <v, v>_M = r^T z.
    Vector r;
    if (start.empty()) {
        std::mt19937_64 gen(0x5eedULL);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        r.resize(n);
        for (auto& v : r) v = dist(gen);
    } else {
        r.assign(start.begin(), start.end());
    }
    Vector z = m.apply(r);
    double beta = std::sqrt(std::max(0.0, vec::dot(r, z)));
    if (!(beta > 0.0)) throw SpectralError("lanczos: start vector has zero M-norm");

    Vector v(n), w(n), w_prev(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = z[i] / beta;
        w[i] = r[i] / beta;
    }

    std::vector<double> alphas;
    std::vector<double> betas;
    double beta_prev = 0.0;
    Vector av(n);
    for (std::size_t k = 0; k < iters; ++k) {
        spmv(a, v, av);
        const double alpha = vec::dot(v, av);
        alphas.push_back(alpha);
        if (k + 1 == iters) break;

        for (std::size_t i = 0; i < n; ++i) r[i] = av[i] - alpha * w[i] - beta_prev * w_prev[i];
        z = m.apply(r);
        const double rz = vec::dot(r, z);
        if (rz < 0.0) throw SpectralError("lanczos: preconditioner is not positive definite");
        beta = std::sqrt(rz);
        if (beta <= 1e-12 * (std::abs(alpha) + beta_prev)) break; // invariant subspace reached
        betas.push_back(beta);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = z[i] / beta;
            w_prev[i] = w[i];
            w[i] = r[i] / beta;
        }
        beta_prev = beta;
    }

    const std::size_t k = alphas.size();
    dense::Matrix t(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        t(i, i) = alphas[i];
        if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = betas[i];
    }
    const auto ritz = dense::symmetric_eigenvalues(t);
    if (!(ritz.front() > 0.0)) throw SpectralError("lanczos: non-positive Ritz value, operator not SPD");

    SpectralBounds bounds;
    bounds.lambda_min = ritz.front() * (1.0 - margin);
    bounds.lambda_max = ritz.back() * (1.0 + margin);
    if (!(bounds.lambda_min > 0.0)) bounds.lambda_min = std::numeric_limits<double>::min();
    return bounds;
}

} // namespace sstep
