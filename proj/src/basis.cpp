#include "sstep/basis.hpp"

#include "sstep/errors.hpp"

#include <cmath>
#include <limits>

namespace sstep {

const char* to_string(BasisKind kind) {
    return kind == BasisKind::Chebyshev ? "chebyshev" : "monomial";
}

Vector KrylovBasis::combine(std::span<const double> alpha) const {
    if (alpha.size() != s) throw DimensionError("basis combine: coefficient length mismatch");
    Vector x(n, 0.0);
    for (std::size_t j = 0; j < s; ++j) vec::axpy(alpha[j], column(j), x);
    return x;
}

Vector KrylovBasis::project(std::span<const double> v) const {
    if (v.size() != n) throw DimensionError("basis project: vector length mismatch");
    Vector out(s);
    for (std::size_t j = 0; j < s; ++j) out[j] = vec::dot(column(j), v);
    return out;
}

double KrylovBasis::frobenius_norm() const { return vec::norm2(columns); }

namespace {

void check_request(const SparseMatrix& a, const Preconditioner& m, std::span<const double> r, std::size_t s) {
    if (s == 0) throw DimensionError("basis: block size must be >= 1");
    if (s > kMaxBlockSize) throw DimensionError("basis: block size exceeds " + std::to_string(kMaxBlockSize));
    if (r.size() != a.n() || m.n() != a.n()) throw DimensionError("basis: dimension mismatch");
    if (vec::norm2(r) == 0.0) throw BreakdownError(0, "basis: starting vector is zero");
}

// Zero when ||p_j|| <= n eps ||p_{j-1}||; overflow is also a breakdown.
bool collapsed(std::span<const double> column, double previous_norm, std::size_t n) {
    const double norm = vec::norm2(column);
    if (!std::isfinite(norm)) return true;
    return norm <= static_cast<double>(n) * std::numeric_limits<double>::epsilon() * previous_norm;
}

// Handles a collapsed column j: either throws or truncates to j columns.
bool handle_breakdown(KrylovBasis& basis, std::size_t j, OnBreakdown policy, const char* what) {
    if (policy == OnBreakdown::Throw) throw BreakdownError(j, what);
    basis.s = j;
    basis.columns.resize(j * basis.n);
    return true;
}

} // namespace

KrylovBasis chebyshev_basis(const SparseMatrix& a, const Preconditioner& m, std::span<const double> r, std::size_t s,
                            const SpectralBounds& bounds, OnBreakdown on_breakdown) {
    check_request(a, m, r, s);
    if (!(bounds.lambda_max > bounds.lambda_min))
        throw SpectralError("chebyshev basis: degenerate spectral interval, theta undefined");

    const std::size_t n = a.n();
    KrylovBasis basis;
    basis.n = n;
    basis.s = s;
    basis.kind = BasisKind::Chebyshev;
    basis.theta = 2.0 / (bounds.lambda_max - bounds.lambda_min);
    basis.sigma = 0.5 * (bounds.lambda_max + bounds.lambda_min);
    basis.columns.assign(n * s, 0.0);
    std::copy(r.begin(), r.end(), basis.column(0).begin());

    Vector ap(n);
    for (std::size_t j = 1; j < s; ++j) {
        const auto prev = basis.column(j - 1);
        spmv(a, prev, ap);
        const Vector map = m.apply(ap);
        auto next = basis.column(j);
        if (j == 1) {
            for (std::size_t i = 0; i < n; ++i) next[i] = basis.theta * (map[i] - basis.sigma * prev[i]);
        } else {
            const auto prev2 = basis.column(j - 2);
            for (std::size_t i = 0; i < n; ++i)
                next[i] = 2.0 * basis.theta * (map[i] - basis.sigma * prev[i]) - prev2[i];
        }
        if (collapsed(next, vec::norm2(prev), n)) {
            handle_breakdown(basis, j, on_breakdown, "chebyshev basis: column collapsed");
            break;
        }
    }
    return basis;
}

KrylovBasis monomial_basis(const SparseMatrix& a, const Preconditioner& m, std::span<const double> r, std::size_t s,
                           OnBreakdown on_breakdown) {
    check_request(a, m, r, s);
    const std::size_t n = a.n();
    KrylovBasis basis;
    basis.n = n;
    basis.s = s;
    basis.kind = BasisKind::Monomial;
    basis.columns.assign(n * s, 0.0);
    std::copy(r.begin(), r.end(), basis.column(0).begin());

    Vector ap(n);
    for (std::size_t j = 1; j < s; ++j) {
        const auto prev = basis.column(j - 1);
        spmv(a, prev, ap);
        const Vector map = m.apply(ap);
        std::copy(map.begin(), map.end(), basis.column(j).begin());
        if (collapsed(basis.column(j), vec::norm2(prev), n)) {
            handle_breakdown(basis, j, on_breakdown, "monomial basis: column collapsed or overflowed");
            break;
        }
    }
    return basis;
}

KrylovBasis scale_columns_anorm(const KrylovBasis& basis, const SparseMatrix& a) {
    if (basis.n != a.n()) throw DimensionError("scale_columns_anorm: dimension mismatch");
    KrylovBasis scaled = basis;
    scaled.scaling.assign(basis.s, 1.0);
    Vector ap(basis.n);
    for (std::size_t j = 0; j < basis.s; ++j) {
        auto col = scaled.column(j);
        spmv(a, col, ap);
        const double energy = vec::dot(col, ap);
        if (!(energy > 0.0) || !std::isfinite(energy))
            throw BreakdownError(j, "scale_columns_anorm: p^T A p is not positive (non-SPD operator or breakdown)");
        const double d = 1.0 / std::sqrt(energy);
        scaled.scaling[j] = d;
        for (auto& v : col) v *= d;
    }
    scaled.is_scaled = true;
    return scaled;
}

} // namespace sstep
