#pragma once

#include <span>
#include <vector>

#include "sstep/basis.hpp"

namespace sstep {

/// Modified Gram-Schmidt in the A inner product: w_0 = r,
/// gamma_j = w_{j-1}^T A p~_j, w_j = w_{j-1} - gamma_j p~_j.
struct MgsResult {
    std::vector<double> gamma;
    Vector residual; ///< w_s
};

MgsResult mgs_anorm_coefficients(const KrylovBasis& basis, const SparseMatrix& a, std::span<const double> r);

} // namespace sstep
