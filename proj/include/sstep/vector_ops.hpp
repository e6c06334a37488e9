#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sstep/errors.hpp"

namespace sstep::vec {

using Vector = std::vector<double>;

inline void require_same_length(std::span<const double> x, std::span<const double> y, const char* where) {
    if (x.size() != y.size()) throw DimensionError(std::string(where) + ": vector lengths differ");
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    require_same_length(x, y, "dot");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
    return sum;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline double norm_inf(std::span<const double> x) {
    double best = 0.0;
    for (double v : x) best = std::max(best, std::abs(v));
    return best;
}

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionError("axpy: vector lengths differ");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vector subtract(std::span<const double> x, std::span<const double> y) {
    require_same_length(x, y, "subtract");
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
    return z;
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace sstep::vec
