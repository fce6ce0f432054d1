#pragma once

// Random number generation used by every stochastic step (splits, CV folds,
// bootstrap). The family is std::mt19937_64; bounded integers and shuffles are
// implemented here rather than through <random> distributions, whose output is
// implementation-defined, so that the same seed yields the same draws on every
// standard library and in the Python reference scripts under tests/oracles.

#include <cstdint>
#include <random>
#include <span>

namespace rk {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed for an independent child stream. Stream ids are small integers chosen by
// the caller (resample index, fold id, ...).
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound) by rejection of the biased low range.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold) return x % bound;
        }
    }

    // Fisher-Yates, swapping from the back.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    Rng child(std::uint64_t stream) { return Rng(stream_seed(next(), stream)); }

private:
    std::mt19937_64 engine_;
};

} // namespace rk
