#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace driftbench {

// SplitMix64 finalizer, used to fold sub-stream tags into a base seed.
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent sub-seed from a base seed and a list of tags.
// Every seeded operation in the workbench derives its stream this way, so
// run layouts stay reproducible no matter how cells are ordered or threaded.
std::uint64_t seed_mix(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

// Seeded random stream. The engine is std::mt19937_64 (bit-exact by the
// standard); all value mappings are hand-rolled here instead of going through
// std::*_distribution, whose output is implementation-defined. That keeps
// identical seeds bit-identical across compilers and standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1), never exactly 0 or 1 (safe under log()).
    double uniform_open01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller. Consumes exactly two engine draws.
    double normal();

    // Gamma(alpha, 1), alpha > 0. Marsaglia-Tsang squeeze, with the
    // u^(1/alpha) boost for alpha < 1.
    double gamma(double alpha);

    // Dirichlet(alpha, ..., alpha) over `k` components.
    std::vector<double> dirichlet(double alpha, std::size_t k);

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace driftbench
