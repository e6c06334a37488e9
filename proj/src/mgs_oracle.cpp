#include "sstep/mgs_oracle.hpp"

#include "sstep/errors.hpp"

namespace sstep {

MgsResult mgs_anorm_coefficients(const KrylovBasis& basis, const SparseMatrix& a, std::span<const double> r) {
    if (!basis.is_scaled) throw Error("mgs oracle: basis must be column-scaled");
    if (basis.n != a.n() || r.size() != a.n()) throw DimensionError("mgs oracle: dimension mismatch");

    MgsResult result;
    result.residual.assign(r.begin(), r.end());
    result.gamma.resize(basis.s);
    Vector ap(basis.n);
    for (std::size_t j = 0; j < basis.s; ++j) {
        // A p~_j is recomputed per projection; no cached block.
        spmv(a, basis.column(j), ap);
        const double gamma = vec::dot(result.residual, ap);
        result.gamma[j] = gamma;
        vec::axpy(-gamma, basis.column(j), result.residual);
    }
    return result;
}

} // namespace sstep
