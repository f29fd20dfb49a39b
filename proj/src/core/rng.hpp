#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>

namespace swarm {

// Deterministic random stream. The engine is mt19937_64 (bit-exact across
// platforms); all distributions are implemented here because the standard
// leaves std::uniform_*_distribution output unspecified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Derives an independent stream from a master seed and a purpose tag so
    // that consumers (placement, replacement, per-agent sampling, ...) cannot
    // perturb each other.
    static std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                                     std::uint64_t index = 0) {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
        for (char c : purpose) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 1099511628211ULL;
        }
        return splitmix(master ^ h ^ (index * 0x9E3779B97F4A7C15ULL));
    }

    static Rng derive(std::uint64_t master, std::string_view purpose, std::uint64_t index = 0) {
        return Rng(derive_seed(master, purpose, index));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [lo, hi], inclusive, via unbiased rejection.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return lo + static_cast<int>(v % span);
    }

    // Draws an index from an (unnormalized is not allowed) probability vector.
    int categorical(std::span<const double> probs) {
        const double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;  // guard against rounding
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 gen_;
};

}  // namespace swarm
