#include "sstep/sstep_cg.hpp"

#include "sstep/errors.hpp"
#include "sstep/gram.hpp"

#include <cmath>

namespace sstep {

const char* to_string(GramMode mode) { return mode == GramMode::Fgs ? "fgs" : "cholesky"; }

void SStepConfig::validate() const {
    if (s == 0 || s > kMaxBlockSize) throw Error("sstep config: s must lie in [1, 64]");
    if (gram_mode == GramMode::Fgs && nu == 0) throw Error("sstep config: nu must be >= 1 in FGS mode");
    if (!(tol > 0.0)) throw Error("sstep config: tol must be positive");
    if (lanczos_iters == 0) throw Error("sstep config: lanczos_iters must be >= 1");
    if (!(lanczos_margin >= 0.0 && lanczos_margin < 1.0)) throw Error("sstep config: margin must lie in [0, 1)");
}

SStepResult sstep_cg_solve(const SparseMatrix& a, const Preconditioner& m, std::span<const double> b,
                           std::span<const double> x0, const SStepConfig& cfg) {
    cfg.validate();
    if (b.size() != a.n() || x0.size() != a.n() || m.n() != a.n()) throw DimensionError("sstep_cg: dimension mismatch");
    if (!vec::all_finite(b)) throw NumericalError("sstep_cg: right-hand side is not finite");

    SStepResult result;
    result.x.assign(x0.begin(), x0.end());
    SolveStats& stats = result.stats;

    Vector r = residual(a, b, result.x);
    const double r0_norm = vec::norm2(r);
    stats.residual_history.push_back(1.0);
    if (r0_norm == 0.0) {
        stats.converged = true;
        return result;
    }

    // ||A|| is estimated by lambda_max even for the monomial basis.
    stats.bounds = lanczos_extreme_eigs(a, m, cfg.lanczos_iters, cfg.lanczos_margin, r);
    stats.norm_a_estimate = stats.bounds.lambda_max;

    double rel = 1.0;
    while (stats.outer_iterations < cfg.max_outer && !(rel < cfg.tol)) {
        if (cfg.bounds_refresh_interval > 0 && stats.outer_iterations > 0 &&
            stats.outer_iterations % cfg.bounds_refresh_interval == 0)
            stats.bounds = lanczos_extreme_eigs(a, m, cfg.lanczos_iters, cfg.lanczos_margin, r);

        const KrylovBasis raw = cfg.basis_kind == BasisKind::Chebyshev
                                    ? chebyshev_basis(a, m, r, cfg.s, stats.bounds, OnBreakdown::Truncate)
                                    : monomial_basis(a, m, r, cfg.s, OnBreakdown::Truncate);
        if (raw.s < cfg.s) stats.breakdown = true;

        KrylovBasis basis;
        GramSystem gram;
        try {
            basis = scale_columns_anorm(raw, a);
            gram = assemble_gram(basis, a);
        } catch (const BreakdownError&) {
            stats.breakdown = true;
            break;
        }
        const Vector rhs = basis.project(r);

        std::vector<double> alpha;
        double delta = 0.0;
        if (cfg.gram_mode == GramMode::Fgs) {
            FgsOptions options;
            options.early_exit_delta = cfg.early_exit_delta;
            FgsReport report = fgs_solve(gram, rhs, cfg.nu, options);
            alpha = std::move(report.alpha);
            delta = report.delta;
        } else {
            try {
                alpha = cholesky_solve(gram, rhs);
            } catch (const NotSpdError&) {
                // Numerically singular Gram matrix: the basis has lost rank.
                stats.breakdown = true;
                break;
            }
            const Vector g_alpha = dense::multiply(gram.g, alpha);
            const double rhs_norm = vec::norm2(rhs);
            delta = rhs_norm > 0.0 ? vec::norm2(vec::subtract(rhs, g_alpha)) / rhs_norm : 0.0;
        }
        if (cfg.record_kappa) stats.kappa_g_history.push_back(gram_diagnostics(gram).cond);

        const Vector update = basis.combine(alpha);
        vec::axpy(1.0, update, result.x);
        r = residual(a, b, result.x);
        rel = vec::norm2(r) / r0_norm;
        if (!std::isfinite(rel)) throw NumericalError("sstep_cg: residual is not finite");

        ++stats.outer_iterations;
        stats.residual_history.push_back(rel);
        stats.delta_history.push_back(delta);
        const double p_norm = basis.frobenius_norm();
        stats.basis_norm_history.push_back(p_norm);
        stats.budget += delta * stats.norm_a_estimate * p_norm;
        if (!std::isfinite(stats.budget)) throw NumericalError("sstep_cg: inexactness budget overflowed");
    }
    stats.converged = rel < cfg.tol;
    return result;
}

CgResult classical_cg(const SparseMatrix& a, const Preconditioner& m, std::span<const double> b,
                      std::span<const double> x0, double tol, std::size_t max_iter) {
    if (b.size() != a.n() || x0.size() != a.n() || m.n() != a.n()) throw DimensionError("cg: dimension mismatch");
    CgResult result;
    result.x.assign(x0.begin(), x0.end());
    Vector r = residual(a, b, result.x);
    const double r0_norm = vec::norm2(r);
    result.residual_history.push_back(1.0);
    if (r0_norm == 0.0) {
        result.converged = true;
        return result;
    }

    Vector z = m.apply(r);
    Vector p = z;
    double rz = vec::dot(r, z);
    Vector q(a.n());
    while (result.iterations < max_iter) {
        spmv(a, p, q);
        const double pq = vec::dot(p, q);
        if (!(pq > 0.0)) throw NotSpdError("cg: p^T A p <= 0, operator is indefinite");
        const double step = rz / pq;
        vec::axpy(step, p, result.x);
        vec::axpy(-step, q, r);
        ++result.iterations;

        double rel = vec::norm2(r) / r0_norm;
        if (rel < tol) {
            // Confirm against the true residual; continue from it if the recurrence drifted.
            r = residual(a, b, result.x);
            rel = vec::norm2(r) / r0_norm;
            if (rel < tol) {
                result.residual_history.push_back(rel);
                result.converged = true;
                break;
            }
        }
        result.residual_history.push_back(rel);

        z = m.apply(r);
        const double rz_next = vec::dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    return result;
}

double inexactness_budget(std::span<const double> delta_history, double norm_a_estimate,
                          std::span<const double> norm_p_history) {
    if (delta_history.size() != norm_p_history.size()) throw DimensionError("inexactness_budget: length mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < delta_history.size(); ++k) sum += delta_history[k] * norm_a_estimate * norm_p_history[k];
    return sum;
}

nlohmann::json to_json(const SStepConfig& cfg) {
    nlohmann::json j;
    j["s"] = cfg.s;
    j["nu"] = cfg.nu;
    j["gram_mode"] = to_string(cfg.gram_mode);
    j["basis_kind"] = to_string(cfg.basis_kind);
    j["tol"] = cfg.tol;
    j["max_outer"] = cfg.max_outer;
    j["lanczos_iters"] = cfg.lanczos_iters;
    j["lanczos_margin"] = cfg.lanczos_margin;
    j["early_exit_delta"] = cfg.early_exit_delta ? nlohmann::json(*cfg.early_exit_delta) : nlohmann::json(nullptr);
    j["bounds_refresh_interval"] = cfg.bounds_refresh_interval;
    return j;
}

nlohmann::json to_json(const SolveStats& stats, const SStepConfig& cfg) {
    nlohmann::json j;
    j["config"] = to_json(cfg);
    j["outer_iterations"] = stats.outer_iterations;
    j["converged"] = stats.converged;
    j["breakdown"] = stats.breakdown;
    j["residual_history"] = stats.residual_history;
    j["delta_history"] = stats.delta_history;
    j["budget"] = stats.budget;
    j["kappa_g_history"] = stats.kappa_g_history;
    j["bounds"] = {{"lambda_min", stats.bounds.lambda_min}, {"lambda_max", stats.bounds.lambda_max}};
    return j;
}

} // namespace sstep
