#include "doctest.h"

#include <cmath>

#include "sstep/errors.hpp"
#include "sstep/gram.hpp"
#include "sstep/mgs_oracle.hpp"
#include "sstep/rng.hpp"
#include "support.hpp"

using namespace sstep;

namespace {

double componentwise(std::span<const double> gamma, std::span<const double> alpha) {
    double d = 0.0;
    for (std::size_t j = 0; j < gamma.size(); ++j) {
        const double scale = std::max(std::abs(gamma[j]), std::abs(alpha[j]));
        if (scale > 0.0) d = std::max(d, std::abs(gamma[j] - alpha[j]) / scale);
    }
    return d;
}

double a_dot(const SparseMatrix& a, std::span<const double> x, std::span<const double> y) {
    return vec::dot(x, spmv(a, y));
}

} // namespace

TEST_CASE("self-projection of a single A-normalised column") {
    const std::vector<double> d{2.0, 5.0, 1.0};
    const auto a = SparseMatrix::diagonal(d);
    KrylovBasis b;
    b.n = 3;
    b.s = 1;
    b.columns = {1.0, -1.0, 2.0};
    const auto p = scale_columns_anorm(b, a);
    const auto res = mgs_anorm_coefficients(p, a, p.column(0));
    REQUIRE(res.gamma.size() == 1);
    CHECK(res.gamma[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(a_dot(a, res.residual, p.column(0))) <= 1e-13);
}

TEST_CASE("A-orthonormal columns decouple the projections") {
    const std::vector<double> d{4.0, 9.0, 1.0, 16.0};
    const auto a = SparseMatrix::diagonal(d);
    KrylovBasis b;
    b.n = 4;
    b.s = 3;
    b.columns = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1};
    const auto p = scale_columns_anorm(b, a);
    const std::vector<double> r{1.5, -2.0, 3.0, 0.25};
    const auto res = mgs_anorm_coefficients(p, a, r);
    for (std::size_t j = 0; j < 3; ++j) CHECK(res.gamma[j] == doctest::Approx(a_dot(a, p.column(j), r)).epsilon(1e-15));
}

TEST_CASE("mgs matches the first fgs sweep on diag(1,3)") {
    const std::vector<double> d{1.0, 3.0};
    const auto a = SparseMatrix::diagonal(d);
    const std::vector<double> r{1, 1};
    const auto p = scale_columns_anorm(chebyshev_basis(a, Preconditioner::identity(2), r, 2, {1.0, 3.0}), a);
    const auto g = assemble_gram(p, a);
    const auto alpha = fgs_sweep(g, p.project(spmv(a, r)), std::vector<double>{0, 0});
    const auto res = mgs_anorm_coefficients(p, a, r);
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(res.gamma[j] - alpha[j]) <= 1e-13);
}

TEST_CASE("mgs residual is r minus the projections") {
    Rng rng(31);
    const auto sys = oracle::random_chebyshev_gram(rng, 6);
    const auto res = mgs_anorm_coefficients(sys.basis, sys.a, sys.r);
    const auto combined = sys.basis.combine(res.gamma);
    for (std::size_t i = 0; i < sys.r.size(); ++i)
        CHECK(std::abs(res.residual[i] - (sys.r[i] - combined[i])) <= 1e-12 * vec::norm_inf(sys.r));
}

TEST_CASE("mgs and first fgs sweep agree on random instances") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t s = rng.index(1, 20);
        const auto sys = oracle::random_chebyshev_gram(rng, s);
        const auto alpha = fgs_sweep(sys.g, sys.rhs, std::vector<double>(s, 0.0));
        const auto res = mgs_anorm_coefficients(sys.basis, sys.a, sys.r);
        CHECK(componentwise(res.gamma, alpha) <= 1e-12);
    }
}

TEST_CASE("mgs residual carries the one-sweep gram residual") {
    // One pass over non-orthogonal columns leaves P~^T A w_s = -L^T gamma; only the last column is A-orthogonal.
    Rng rng(43);
    int tested = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t s = rng.index(1, 12);
        const auto sys = oracle::random_chebyshev_gram(rng, s);
        if (gram_diagnostics(sys.g).cond > 1e4) continue;
        ++tested;
        const auto res = mgs_anorm_coefficients(sys.basis, sys.a, sys.r);
        const double r_a = std::sqrt(a_dot(sys.a, sys.r, sys.r));
        const Eigen::VectorXd lt = oracle::dense(sys.g.l_strict).transpose() * oracle::vec(res.gamma);
        for (std::size_t j = 0; j < s; ++j)
            CHECK(std::abs(a_dot(sys.a, res.residual, sys.basis.column(j)) + lt(j)) <= s * 1e-12 * r_a);
        CHECK(std::abs(a_dot(sys.a, res.residual, sys.basis.column(s - 1))) <= s * 1e-12 * r_a);
    }
    CHECK(tested >= 20);
}

TEST_CASE("mgs oracle preconditions") {
    KrylovBasis b;
    b.n = 2;
    b.s = 1;
    b.columns = {1.0, 0.0};
    const auto a = SparseMatrix::identity(2);
    CHECK_THROWS_AS(mgs_anorm_coefficients(b, a, std::vector<double>{1, 1}), Error);
    const auto p = scale_columns_anorm(b, a);
    CHECK_THROWS_AS(mgs_anorm_coefficients(p, a, std::vector<double>{1}), DimensionError);
}
