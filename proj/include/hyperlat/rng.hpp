#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>
#include <vector>

namespace hyperlat {

// Deterministic splittable RNG used everywhere randomness is needed.
// All draws are implemented on top of splitmix64 so results are identical
// across platforms and standard-library versions; std::uniform_*_distribution
// is deliberately avoided.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Rejection sampling keeps the draw unbiased.
    uint64_t below(uint64_t n) {
        if (n <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    // Uniform double in [0, 1) with 53 bits of entropy.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Box-Muller without caching, so the stream stays position-independent.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent child stream from a label and integer tags.
    // Children with distinct tags never share a stream with the parent.
    Rng derive(std::string_view label, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) const {
        uint64_t h = 0xcbf29ce484222325ull ^ state_;
        auto mix = [&h](uint64_t x) {
            h ^= x;
            h *= 0x100000001b3ull;
            h ^= h >> 29;
        };
        for (char ch : label) mix(static_cast<uint64_t>(static_cast<unsigned char>(ch)));
        mix(a); mix(b); mix(c);
        return Rng(h);
    }

    uint64_t state() const { return state_; }

private:
    uint64_t state_;
};

} // namespace hyperlat
