#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sstep {

/// Seeded generator that derives independent named streams: `split("basis")`
/// always yields the same child for the same parent seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    Rng split(std::string_view name) const {
        std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
        for (unsigned char c : name) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return Rng(mix(seed_ ^ mix(h)));
    }
    Rng split(std::uint64_t index) const { return Rng(mix(seed_ + 0x9e3779b97f4a7c15ULL * (index + 1))); }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    std::size_t index(std::size_t lo, std::size_t hi) { // inclusive
        return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
    }

    std::vector<double> uniform_vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }
    std::vector<double> normal_vector(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = normal();
        return v;
    }

private:
    static std::uint64_t mix(std::uint64_t z) { // splitmix64 finaliser
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace sstep
