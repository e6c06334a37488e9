#include "sstep/gram.hpp"

#include "sstep/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sstep {

GramSystem GramSystem::from_matrix(const dense::Matrix& g, bool unit_diagonal) {
    if (g.rows() != g.cols()) throw DimensionError("gram: matrix not square");
    GramSystem sys;
    sys.s = g.rows();
    sys.g = dense::Matrix(sys.s, sys.s);
    sys.l_strict = dense::Matrix(sys.s, sys.s);
    for (std::size_t i = 0; i < sys.s; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = i == j ? g(i, i) : 0.5 * (g(i, j) + g(j, i));
            if (!std::isfinite(v)) throw NumericalError("gram: non-finite entry");
            sys.g(i, j) = sys.g(j, i) = v;
            if (j < i) sys.l_strict(i, j) = v;
        }
    sys.unit_diagonal = unit_diagonal;
    return sys;
}

GramSystem assemble_gram(const KrylovBasis& basis, const SparseMatrix& a) {
    if (!basis.is_scaled) throw Error("assemble_gram: basis must be column-scaled");
    if (basis.n != a.n()) throw DimensionError("assemble_gram: dimension mismatch");
    const std::size_t s = basis.s;
    std::vector<double> ap(basis.n * s);
    for (std::size_t j = 0; j < s; ++j)
        spmv(a, basis.column(j), std::span<double>(ap.data() + j * basis.n, basis.n));

    dense::Matrix raw(s, s);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
            raw(i, j) = vec::dot(basis.column(i), std::span<const double>(ap.data() + j * basis.n, basis.n));
    return GramSystem::from_matrix(raw, true);
}

namespace {

void check_length(const GramSystem& g, std::span<const double> v, const char* what) {
    if (v.size() != g.s) throw DimensionError(std::string(what) + ": length must equal s");
}

} // namespace

std::vector<double> fgs_sweep(const GramSystem& g, std::span<const double> rhs, std::span<const double> alpha_in) {
    check_length(g, rhs, "fgs_sweep rhs");
    check_length(g, alpha_in, "fgs_sweep alpha_in");
    const std::size_t s = g.s;
    std::vector<double> alpha(s);
    for (std::size_t i = 0; i < s; ++i) {
        double b = rhs[i];
        for (std::size_t j = i + 1; j < s; ++j) b -= g.g(i, j) * alpha_in[j];
        for (std::size_t j = 0; j < i; ++j) b -= g.l_strict(i, j) * alpha[j];
        const double d = g.g(i, i);
        if (d == 0.0) throw SingularError("fgs_sweep: zero diagonal entry at " + std::to_string(i));
        alpha[i] = b / d;
    }
    return alpha;
}

namespace {

double gram_residual_norm(const GramSystem& g, std::span<const double> rhs, std::span<const double> alpha) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.s; ++i) {
        double r = rhs[i];
        for (std::size_t j = 0; j < g.s; ++j) r -= g.g(i, j) * alpha[j];
        sum += r * r;
    }
    return std::sqrt(sum);
}

} // namespace

FgsReport fgs_solve(const GramSystem& g, std::span<const double> rhs, std::size_t nu, const FgsOptions& options) {
    if (nu == 0) throw Error("fgs_solve: nu must be >= 1");
    check_length(g, rhs, "fgs_solve rhs");
    FgsReport report;
    report.alpha.assign(g.s, 0.0);
    const double rhs_norm = vec::norm2(rhs);
    report.residual_norms.push_back(rhs_norm);
    for (std::size_t v = 0; v < nu; ++v) {
        report.alpha = fgs_sweep(g, rhs, report.alpha);
        const double res = gram_residual_norm(g, rhs, report.alpha);
        if (!std::isfinite(res)) throw NumericalError("fgs_solve: residual diverged");
        report.residual_norms.push_back(res);
        ++report.sweeps;
        if (options.early_exit_delta && res <= *options.early_exit_delta * rhs_norm) break;
    }
    report.delta = rhs_norm > 0.0 ? report.residual_norms.back() / rhs_norm : 0.0;
    return report;
}

std::vector<double> cholesky_solve(const GramSystem& g, std::span<const double> rhs) {
    check_length(g, rhs, "cholesky_solve rhs");
    const auto factor = dense::cholesky_factor(g.g);
    return dense::cholesky_substitute(factor, rhs);
}

double iteration_matrix_two_norm(const GramSystem& g) {
    const std::size_t s = g.s;
    // Column k of T solves (D + L) t = -(L^T e_k).
    dense::Matrix t(s, s);
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t i = 0; i < s; ++i) {
            double b = i < k ? -g.g(i, k) : 0.0;
            for (std::size_t j = 0; j < i; ++j) b -= g.l_strict(i, j) * t(j, k);
            const double d = g.g(i, i);
            if (d == 0.0) throw SingularError("iteration matrix: D + L is singular");
            t(i, k) = b / d;
        }
    }
    return dense::two_norm(t);
}

GramDiagnostics gram_diagnostics(const GramSystem& g) {
    GramDiagnostics diag;
    const auto eig = dense::symmetric_eigenvalues(g.g);
    diag.cond = eig.front() > 0.0 ? eig.back() / eig.front() : std::numeric_limits<double>::infinity();
    diag.l_frob = dense::frobenius_norm(g.l_strict);
    diag.l_two = dense::two_norm(g.l_strict);
    diag.decay.assign(g.s > 0 ? g.s - 1 : 0, 0.0);
    for (std::size_t i = 0; i < g.s; ++i)
        for (std::size_t j = 0; j < i; ++j) diag.decay[i - j - 1] = std::max(diag.decay[i - j - 1], std::abs(g.g(i, j)));
    return diag;
}

double backward_error_check(const GramSystem& g, std::span<const double> rhs, std::span<const double> alpha,
                            std::span<const double> alpha_in) {
    check_length(g, rhs, "backward_error_check rhs");
    check_length(g, alpha, "backward_error_check alpha");
    if (!alpha_in.empty()) check_length(g, alpha_in, "backward_error_check alpha_in");
    const std::size_t s = g.s;

    // Extended precision so the check measures the sweep, not its own rounding.
    long double res_max = 0.0L, b_max = 0.0L, alpha_max = 0.0L, dl_norm = 0.0L;
    for (std::size_t i = 0; i < s; ++i) {
        long double b = rhs[i];
        if (!alpha_in.empty())
            for (std::size_t j = i + 1; j < s; ++j)
                b -= static_cast<long double>(g.g(i, j)) * static_cast<long double>(alpha_in[j]);
        long double lhs = 0.0L;
        long double row = 0.0L;
        for (std::size_t j = 0; j <= i; ++j) {
            lhs += static_cast<long double>(g.g(i, j)) * static_cast<long double>(alpha[j]);
            row += std::abs(static_cast<long double>(g.g(i, j)));
        }
        res_max = std::max(res_max, std::abs(lhs - b));
        b_max = std::max(b_max, std::abs(b));
        alpha_max = std::max(alpha_max, std::abs(static_cast<long double>(alpha[i])));
        dl_norm = std::max(dl_norm, row);
    }
    const long double denom = b_max + dl_norm * alpha_max;
    if (denom == 0.0L) return 0.0;
    return static_cast<double>(res_max / denom);
}

} // namespace sstep
