#pragma once

// Counter-based random numbers with a fully specified algorithm, so that a
// reimplementation in another language reproduces the same streams:
//
//   word(k)    = splitmix64_finalize(key + (k + 1) * 0x9E3779B97F4A7C15)
//   uniform(k) = ((word(k) >> 11) + 0.5) * 2^-53          in (0, 1)
//   normals    = Box-Muller on two consecutive uniforms, both outputs used
//
// Seeds for sub-streams are derived with mix(), which folds any number of
// 64-bit values through the same finalizer.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <vector>

namespace tra {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t value) noexcept {
    return splitmix64_finalize(seed ^ splitmix64_finalize(value + kGolden));
}

constexpr std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::uint64_t> values) noexcept {
    for (std::uint64_t v : values) seed = mix(seed, v);
    return seed;
}

class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next_word() noexcept {
        ++counter_;
        return splitmix64_finalize(key_ + counter_ * kGolden);
    }

    // Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next_word() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const unsigned __int128 product = static_cast<unsigned __int128>(next_word()) * bound;
            if (static_cast<std::uint64_t>(product) >= threshold) {
                return static_cast<std::uint64_t>(product >> 64);
            }
        }
    }

    template <class T>
    void shuffle(std::span<T> values) noexcept {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// First `count` entries of a seeded permutation of 0..n-1, i.e. a simple
// random sample without replacement.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    CounterRng rng(seed);
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(count < n ? count : n);
    return idx;
}

}  // namespace tra
