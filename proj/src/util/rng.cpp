#include "pig/util/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pig {

double Rng::normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() {
    double u = uniform();
    return -std::log1p(-u);
}

Rng Rng::split(std::uint64_t stream) { return Rng(mix_seed(next(), stream)); }

std::string Rng::serialize() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
}

void Rng::deserialize(const std::string& text) {
    std::istringstream in(text);
    in >> engine_;
    if (in.fail()) throw std::runtime_error("rng: malformed engine state");
}

std::vector<double> sample_simplex(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    double total = 0.0;
    for (auto& v : out) {
        v = rng.exponential();
        total += v;
    }
    if (total <= 0.0) {
        for (auto& v : out) v = 1.0 / static_cast<double>(n);
        return out;
    }
    for (auto& v : out) v /= total;
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace pig
