#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pig {

// Deterministic random source. All draws go through the raw 64-bit engine so
// results do not depend on the standard library's distribution classes.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t index(std::size_t n) {
        auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; consumes two uniforms per call and keeps no cached value.
    double normal();

    double exponential();

    // Derive an independent stream for a sub-task.
    Rng split(std::uint64_t stream);

    std::string serialize() const;
    void deserialize(const std::string& text);

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

// Uniform sample from the probability simplex (Dirichlet with all ones).
std::vector<double> sample_simplex(Rng& rng, std::size_t n);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace pig
