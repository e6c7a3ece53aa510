#include "driftbench/rng.hpp"

#include <cmath>

#include "driftbench/errors.hpp"

namespace driftbench {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t seed_mix(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(base);
    for (std::uint64_t t : tags) {
        s = splitmix64(s ^ splitmix64(t + 0x9e3779b97f4a7c15ULL));
    }
    return s;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) {
        throw ConfigError("Rng::below: n must be >= 1");
    }
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    const double u1 = uniform_open01();
    const double u2 = uniform_open01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

double Rng::gamma(double alpha) {
    if (!(alpha > 0.0)) {
        throw ConfigError("Rng::gamma: alpha must be positive");
    }
    if (alpha < 1.0) {
        const double g = gamma(alpha + 1.0);
        return g * std::pow(uniform_open01(), 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open01();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

std::vector<double> Rng::dirichlet(double alpha, std::size_t k) {
    std::vector<double> g(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        g[i] = gamma(alpha);
        total += g[i];
    }
    if (total <= 0.0) {
        // All draws underflowed; fall back to a single random vertex.
        std::vector<double> v(k, 0.0);
        v[static_cast<std::size_t>(below(k))] = 1.0;
        return v;
    }
    for (double& x : g) {
        x /= total;
    }
    return g;
}

}  // namespace driftbench
