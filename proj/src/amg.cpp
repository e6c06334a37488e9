#include "sstep/amg.hpp"

#include "sstep/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sstep {

const char* to_string(CoarseMode mode) {
    switch (mode) {
    case CoarseMode::Direct: return "direct";
    case CoarseMode::FgsAssembled: return "fgs-assembled";
    case CoarseMode::FgsStreaming: return "fgs-streaming";
    }
    return "unknown";
}

Prolongator Prolongator::identity(std::size_t n) {
    Prolongator p;
    p.n_coarse = n;
    p.aggregate.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.aggregate[i] = static_cast<Index>(i);
    return p;
}

Vector Prolongator::prolong(std::span<const double> coarse) const {
    if (coarse.size() != n_coarse) throw DimensionError("prolong: length mismatch");
    Vector fine(aggregate.size());
    for (std::size_t i = 0; i < aggregate.size(); ++i) fine[i] = coarse[static_cast<std::size_t>(aggregate[i])];
    return fine;
}

Vector Prolongator::restrict_to_coarse(std::span<const double> fine) const {
    if (fine.size() != aggregate.size()) throw DimensionError("restrict: length mismatch");
    Vector coarse(n_coarse, 0.0);
    for (std::size_t i = 0; i < aggregate.size(); ++i) coarse[static_cast<std::size_t>(aggregate[i])] += fine[i];
    return coarse;
}

std::vector<std::size_t> Prolongator::aggregate_sizes() const {
    std::vector<std::size_t> sizes(n_coarse, 0);
    for (Index agg : aggregate) ++sizes[static_cast<std::size_t>(agg)];
    return sizes;
}

std::size_t StreamingCoarse::bytes() const noexcept {
    std::size_t total = member_offsets.size() * sizeof(std::size_t) + members.size() * sizeof(Index) +
                        diagonal.size() * sizeof(double);
    if (cached) total += products.bytes();
    return total;
}

std::size_t AmgHierarchy::coarse_solve_bytes() const {
    switch (coarse_mode) {
    case CoarseMode::Direct: return coarsest_factor.data().size() * sizeof(double);
    case CoarseMode::FgsAssembled: return levels.back().a.bytes();
    case CoarseMode::FgsStreaming: return streaming.bytes();
    }
    return 0;
}

// ---------------------------------------------------------------------------

Prolongator aggregate(const SparseMatrix& a, double strength) {
    const std::size_t n = a.n();
    constexpr Index kFree = -1;

    std::vector<double> row_max(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (static_cast<std::size_t>(cols[k]) != i) row_max[i] = std::max(row_max[i], std::abs(vals[k]));
    }
    const auto strong = [&](std::size_t i, std::size_t j, double v) {
        return i != j && std::abs(v) >= strength * std::sqrt(row_max[i] * row_max[j]) && v != 0.0;
    };

    Prolongator p;
    p.aggregate.assign(n, kFree);
    Index next = 0;

    // Phase 1: seed an aggregate at every node whose strong neighbourhood is untouched.
    for (std::size_t i = 0; i < n; ++i) {
        if (p.aggregate[i] != kFree) continue;
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        bool untouched = true;
        bool has_strong = false;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto j = static_cast<std::size_t>(cols[k]);
            if (!strong(i, j, vals[k])) continue;
            has_strong = true;
            if (p.aggregate[j] != kFree) {
                untouched = false;
                break;
            }
        }
        if (!untouched) continue;
        p.aggregate[i] = next;
        if (has_strong)
            for (std::size_t k = 0; k < cols.size(); ++k) {
                const auto j = static_cast<std::size_t>(cols[k]);
                if (strong(i, j, vals[k])) p.aggregate[j] = next;
            }
        ++next;
    }

    // Phase 2: attach leftovers to the aggregate of their strongest aggregated neighbour.
    std::vector<Index> phase2 = p.aggregate;
    for (std::size_t i = 0; i < n; ++i) {
        if (p.aggregate[i] != kFree) continue;
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        double best = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto j = static_cast<std::size_t>(cols[k]);
            if (!strong(i, j, vals[k]) || p.aggregate[j] == kFree) continue;
            if (std::abs(vals[k]) > best) {
                best = std::abs(vals[k]);
                phase2[i] = p.aggregate[j];
            }
        }
    }
    p.aggregate = std::move(phase2);

    // Phase 3: whatever is still free forms aggregates with its free strong neighbours.
    for (std::size_t i = 0; i < n; ++i) {
        if (p.aggregate[i] != kFree) continue;
        p.aggregate[i] = next;
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto j = static_cast<std::size_t>(cols[k]);
            if (strong(i, j, vals[k]) && p.aggregate[j] == kFree) p.aggregate[j] = next;
        }
        ++next;
    }
    p.n_coarse = static_cast<std::size_t>(next);
    return p;
}

SparseMatrix galerkin_product(const SparseMatrix& a, const Prolongator& p) {
    if (p.n_fine() != a.n()) throw DimensionError("galerkin: prolongator does not match operator");
    const std::size_t nc = p.n_coarse;

    // Group fine rows by aggregate.
    std::vector<std::size_t> offsets(nc + 1, 0);
    for (Index agg : p.aggregate) ++offsets[static_cast<std::size_t>(agg) + 1];
    for (std::size_t c = 0; c < nc; ++c) offsets[c + 1] += offsets[c];
    std::vector<Index> members(p.n_fine());
    {
        std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
        for (std::size_t i = 0; i < p.n_fine(); ++i)
            members[fill[static_cast<std::size_t>(p.aggregate[i])]++] = static_cast<Index>(i);
    }

    std::vector<std::size_t> row_offsets(nc + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    std::vector<double> accum(nc, 0.0);
    std::vector<char> touched(nc, 0);
    std::vector<Index> pattern;
    for (std::size_t c = 0; c < nc; ++c) {
        pattern.clear();
        for (std::size_t m = offsets[c]; m < offsets[c + 1]; ++m) {
            const auto i = static_cast<std::size_t>(members[m]);
            const auto rc = a.row_cols(i);
            const auto rv = a.row_values(i);
            for (std::size_t k = 0; k < rc.size(); ++k) {
                const Index cc = p.aggregate[static_cast<std::size_t>(rc[k])];
                if (!touched[static_cast<std::size_t>(cc)]) {
                    touched[static_cast<std::size_t>(cc)] = 1;
                    pattern.push_back(cc);
                }
                accum[static_cast<std::size_t>(cc)] += rv[k];
            }
        }
        std::sort(pattern.begin(), pattern.end());
        for (Index cc : pattern) {
            cols.push_back(cc);
            vals.push_back(accum[static_cast<std::size_t>(cc)]);
            accum[static_cast<std::size_t>(cc)] = 0.0;
            touched[static_cast<std::size_t>(cc)] = 0;
        }
        row_offsets[c + 1] = cols.size();
    }
    return SparseMatrix(nc, std::move(row_offsets), std::move(cols), std::move(vals));
}

namespace {

StreamingCoarse build_streaming(const SparseMatrix& fine, Prolongator chain, std::size_t fine_level, bool cache) {
    StreamingCoarse sc;
    sc.fine_level = fine_level;
    sc.chain = std::move(chain);
    const std::size_t nc = sc.chain.n_coarse;
    const auto& agg = sc.chain.aggregate;

    sc.member_offsets.assign(nc + 1, 0);
    for (Index c : agg) ++sc.member_offsets[static_cast<std::size_t>(c) + 1];
    for (std::size_t c = 0; c < nc; ++c) sc.member_offsets[c + 1] += sc.member_offsets[c];
    sc.members.resize(agg.size());
    std::vector<std::size_t> fill(sc.member_offsets.begin(), sc.member_offsets.end() - 1);
    for (std::size_t i = 0; i < agg.size(); ++i) sc.members[fill[static_cast<std::size_t>(agg[i])]++] = static_cast<Index>(i);

    // d_c = (P e_c)^T A_f (P e_c)
    sc.diagonal.assign(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t m = sc.member_offsets[c]; m < sc.member_offsets[c + 1]; ++m) {
            const auto i = static_cast<std::size_t>(sc.members[m]);
            const auto rc = fine.row_cols(i);
            const auto rv = fine.row_values(i);
            for (std::size_t k = 0; k < rc.size(); ++k)
                if (static_cast<std::size_t>(agg[static_cast<std::size_t>(rc[k])]) == c) sc.diagonal[c] += rv[k];
        }
        if (!(sc.diagonal[c] > 0.0))
            throw SingularError("streaming coarse solve: non-positive coarse diagonal for aggregate " + std::to_string(c));
    }

    sc.cached = cache;
    if (cache) {
        // Row c of P^T A_f is the sum of the fine rows in aggregate c (A_f symmetric).
        std::vector<double> accum(fine.n(), 0.0);
        std::vector<char> touched(fine.n(), 0);
        std::vector<Index> pattern;
        for (std::size_t c = 0; c < nc; ++c) {
            pattern.clear();
            for (std::size_t m = sc.member_offsets[c]; m < sc.member_offsets[c + 1]; ++m) {
                const auto i = static_cast<std::size_t>(sc.members[m]);
                const auto rc = fine.row_cols(i);
                const auto rv = fine.row_values(i);
                for (std::size_t k = 0; k < rc.size(); ++k) {
                    const auto j = static_cast<std::size_t>(rc[k]);
                    if (!touched[j]) {
                        touched[j] = 1;
                        pattern.push_back(rc[k]);
                    }
                    accum[j] += rv[k];
                }
            }
            std::sort(pattern.begin(), pattern.end());
            for (Index j : pattern) {
                sc.products.cols.push_back(j);
                sc.products.values.push_back(accum[static_cast<std::size_t>(j)]);
                accum[static_cast<std::size_t>(j)] = 0.0;
                touched[static_cast<std::size_t>(j)] = 0;
            }
            sc.products.offsets.push_back(sc.products.cols.size());
        }
    }
    return sc;
}

const SparseMatrix& streaming_fine_operator(const AmgHierarchy& h) { return h.levels[h.streaming.fine_level].a; }

// FGS sweeps on A_c x = rhs with A_c applied as P^T A_f P. y tracks A_f P x.
void streaming_fgs(const AmgHierarchy& h, std::span<const double> rhs, std::span<double> x, std::size_t nu) {
    const StreamingCoarse& sc = h.streaming;
    const SparseMatrix& fine = streaming_fine_operator(h);
    const std::size_t nc = sc.chain.n_coarse;

    Vector y(fine.n(), 0.0);
    if (vec::norm_inf(x) != 0.0) spmv(fine, sc.chain.prolong(x), y);

    for (std::size_t sweep = 0; sweep < nu; ++sweep) {
        for (std::size_t c = 0; c < nc; ++c) {
            double acx = 0.0;
            for (std::size_t m = sc.member_offsets[c]; m < sc.member_offsets[c + 1]; ++m)
                acx += y[static_cast<std::size_t>(sc.members[m])];
            const double delta = (rhs[c] - acx) / sc.diagonal[c];
            x[c] += delta;
            if (sc.cached) {
                for (std::size_t k = sc.products.offsets[c]; k < sc.products.offsets[c + 1]; ++k)
                    y[static_cast<std::size_t>(sc.products.cols[k])] += delta * sc.products.values[k];
            } else {
                for (std::size_t m = sc.member_offsets[c]; m < sc.member_offsets[c + 1]; ++m) {
                    const auto i = static_cast<std::size_t>(sc.members[m]);
                    const auto rc = fine.row_cols(i);
                    const auto rv = fine.row_values(i);
                    for (std::size_t k = 0; k < rc.size(); ++k) y[static_cast<std::size_t>(rc[k])] += delta * rv[k];
                }
            }
        }
    }
}

Vector coarse_solve_from(const AmgHierarchy& h, std::span<const double> b, std::span<const double> x0) {
    Vector x(x0.begin(), x0.end());
    switch (h.coarse_mode) {
    case CoarseMode::Direct:
        return dense::cholesky_substitute(h.coarsest_factor, b);
    case CoarseMode::FgsAssembled:
        forward_gauss_seidel(h.levels.back().a, b, x, h.nu_coarse);
        return x;
    case CoarseMode::FgsStreaming:
        streaming_fgs(h, b, x, h.nu_coarse);
        return x;
    }
    return x;
}

Vector cycle(const AmgHierarchy& h, std::size_t level, std::span<const double> b, Vector x) {
    if (level + 1 == h.levels.size()) return coarse_solve_from(h, b, x);
    const AmgLevel& lv = h.levels[level];
    forward_gauss_seidel(lv.a, b, x, h.smoother_sweeps);
    const Vector r = residual(lv.a, b, x);
    const Vector rc = lv.p.restrict_to_coarse(r);
    const Vector ec = cycle(h, level + 1, rc, Vector(rc.size(), 0.0));
    const Vector correction = lv.p.prolong(ec);
    vec::axpy(1.0, correction, x);
    backward_gauss_seidel(lv.a, b, x, h.smoother_sweeps);
    return x;
}

} // namespace

AmgHierarchy amg_setup(const SparseMatrix& a, std::size_t target_coarse, CoarseMode coarse_mode, std::size_t nu_coarse,
                       const AmgOptions& options) {
    if (target_coarse == 0) throw HierarchyError("amg_setup: target_coarse must be >= 1");
    if (coarse_mode != CoarseMode::Direct && nu_coarse == 0) throw HierarchyError("amg_setup: nu_coarse must be >= 1");
    if (!a.has_positive_diagonal()) throw NotSpdError("amg_setup: operator needs a positive diagonal");

    AmgHierarchy h;
    h.coarse_mode = coarse_mode;
    h.nu_coarse = nu_coarse;
    h.smoother_sweeps = options.smoother_sweeps;
    h.levels.push_back({a.n(), a, {}});

    while (h.levels.back().n > target_coarse) {
        AmgLevel& fine = h.levels.back();
        Prolongator p = aggregate(fine.a, options.strength);
        if (static_cast<double>(p.n_coarse) >= 0.9 * static_cast<double>(fine.n))
            throw HierarchyError("amg_setup: coarsening stagnated at n = " + std::to_string(fine.n));
        const std::size_t nc = p.n_coarse;
        const bool coarsest = nc <= target_coarse;
        fine.p = std::move(p);

        AmgLevel next;
        next.n = nc;
        if (!(coarsest && coarse_mode == CoarseMode::FgsStreaming)) next.a = galerkin_product(fine.a, fine.p);
        h.levels.push_back(std::move(next));
    }

    const std::size_t last = h.levels.size() - 1;
    switch (coarse_mode) {
    case CoarseMode::Direct:
        h.coarsest_factor = dense::cholesky_factor(h.levels[last].a.to_dense());
        break;
    case CoarseMode::FgsAssembled:
        if (!h.levels[last].a.has_positive_diagonal()) throw SingularError("amg_setup: zero coarse diagonal");
        break;
    case CoarseMode::FgsStreaming:
        if (last == 0)
            h.streaming = build_streaming(h.levels[0].a, Prolongator::identity(h.levels[0].n), 0,
                                          options.cache_streaming_products);
        else
            h.streaming = build_streaming(h.levels[last - 1].a, h.levels[last - 1].p, last - 1,
                                          options.cache_streaming_products);
        break;
    }
    return h;
}

void forward_gauss_seidel(const SparseMatrix& a, std::span<const double> b, std::span<double> x, std::size_t sweeps) {
    if (b.size() != a.n() || x.size() != a.n()) throw DimensionError("gauss-seidel: length mismatch");
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep)
        for (std::size_t i = 0; i < a.n(); ++i) {
            const auto cols = a.row_cols(i);
            const auto vals = a.row_values(i);
            double sum = b[i];
            double diag = 0.0;
            for (std::size_t k = 0; k < cols.size(); ++k) {
                const auto j = static_cast<std::size_t>(cols[k]);
                if (j == i)
                    diag = vals[k];
                else
                    sum -= vals[k] * x[j];
            }
            if (diag == 0.0) throw SingularError("gauss-seidel: zero diagonal at row " + std::to_string(i));
            x[i] = sum / diag;
        }
}

void backward_gauss_seidel(const SparseMatrix& a, std::span<const double> b, std::span<double> x, std::size_t sweeps) {
    if (b.size() != a.n() || x.size() != a.n()) throw DimensionError("gauss-seidel: length mismatch");
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep)
        for (std::size_t i = a.n(); i-- > 0;) {
            const auto cols = a.row_cols(i);
            const auto vals = a.row_values(i);
            double sum = b[i];
            double diag = 0.0;
            for (std::size_t k = 0; k < cols.size(); ++k) {
                const auto j = static_cast<std::size_t>(cols[k]);
                if (j == i)
                    diag = vals[k];
                else
                    sum -= vals[k] * x[j];
            }
            if (diag == 0.0) throw SingularError("gauss-seidel: zero diagonal at row " + std::to_string(i));
            x[i] = sum / diag;
        }
}

Vector vcycle(const AmgHierarchy& h, std::span<const double> b, std::span<const double> x) {
    if (h.levels.empty()) throw HierarchyError("vcycle: empty hierarchy");
    if (b.size() != h.levels.front().n || x.size() != h.levels.front().n) throw DimensionError("vcycle: length mismatch");
    return cycle(h, 0, b, Vector(x.begin(), x.end()));
}

Vector coarse_solve(const AmgHierarchy& h, std::span<const double> rhs_c) {
    if (rhs_c.size() != h.coarse_size()) throw DimensionError("coarse_solve: length mismatch");
    return coarse_solve_from(h, rhs_c, Vector(rhs_c.size(), 0.0));
}

Vector coarse_solve_fgs_streaming(const AmgHierarchy& h, std::span<const double> rhs_c, std::size_t nu) {
    if (h.coarse_mode != CoarseMode::FgsStreaming) throw HierarchyError("streaming coarse solve: wrong coarse mode");
    if (rhs_c.size() != h.coarse_size()) throw DimensionError("streaming coarse solve: length mismatch");
    Vector x(rhs_c.size(), 0.0);
    streaming_fgs(h, rhs_c, x, nu);
    return x;
}

Vector coarse_solve_fgs_assembled(const AmgHierarchy& h, std::span<const double> rhs_c, std::size_t nu) {
    if (h.levels.back().a.empty()) throw HierarchyError("assembled coarse solve: coarsest operator not assembled");
    if (rhs_c.size() != h.coarse_size()) throw DimensionError("assembled coarse solve: length mismatch");
    Vector x(rhs_c.size(), 0.0);
    forward_gauss_seidel(h.levels.back().a, rhs_c, x, nu);
    return x;
}

SparseMatrix coarsest_operator(const AmgHierarchy& h) {
    if (!h.levels.back().a.empty()) return h.levels.back().a;
    return galerkin_product(streaming_fine_operator(h), h.streaming.chain);
}

VcycleSolve vcycle_solve(const AmgHierarchy& h, std::span<const double> b, std::span<const double> x0, double tol,
                         std::size_t max_cycles) {
    const SparseMatrix& a = h.levels.front().a;
    VcycleSolve out;
    out.x.assign(x0.begin(), x0.end());
    out.stats.coarse_solve_bytes = h.coarse_solve_bytes();
    const double r0 = vec::norm2(residual(a, b, out.x));
    out.stats.residual_history.push_back(1.0);
    if (r0 == 0.0) {
        out.stats.converged = true;
        return out;
    }
    double rel = 1.0;
    while (out.stats.cycles < max_cycles && !(rel < tol)) {
        out.x = vcycle(h, b, out.x);
        rel = vec::norm2(residual(a, b, out.x)) / r0;
        if (!std::isfinite(rel)) throw NumericalError("vcycle iteration diverged");
        ++out.stats.cycles;
        out.stats.residual_history.push_back(rel);
    }
    out.stats.converged = rel < tol;
    return out;
}

CgResult amg_pcg(const SparseMatrix& a, std::shared_ptr<const AmgHierarchy> h, std::span<const double> b, double tol,
                 std::size_t max_iter) {
    if (h->levels.front().n != a.n()) throw DimensionError("amg_pcg: hierarchy does not match operator");
    const Preconditioner m = Preconditioner::amg(std::move(h));
    const Vector x0(a.n(), 0.0);
    return classical_cg(a, m, b, x0, tol, max_iter);
}

} // namespace sstep
