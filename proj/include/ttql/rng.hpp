#pragma once

#include <cstdint>
#include <limits>

namespace ttql {

/// SplitMix64 output function.
[[nodiscard]] constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * Counter-based pseudo random generator used everywhere in the library.
 *
 * A stream is identified by a 64-bit key. Its i-th output is the SplitMix64
 * finalizer applied to `key + (i + 1) * 0x9e3779b97f4a7c15`, so any draw can be
 * addressed directly by its counter. Code that hands each (state, action) pair
 * its own counter range therefore produces the same numbers whether the pairs
 * are visited serially or in parallel.
 *
 * uniform() keeps the top 53 bits of an output and scales by 2^-53. No
 * standard-library distribution is involved, so every stream is identical on
 * all IEEE-754 platforms.
 */
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    static Rng from_key(std::uint64_t key) noexcept;

    /// Independent stream derived from this stream's key and `tag`.
    /// Does not advance this stream.
    [[nodiscard]] Rng substream(std::uint64_t tag) const noexcept;

    std::uint64_t next_u64() noexcept { return at_u64(counter_++); }
    /// Uniform on [0, 1).
    double uniform() noexcept { return uniform_at(counter_++); }
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    [[nodiscard]] std::uint64_t at_u64(std::uint64_t counter) const noexcept {
        return splitmix64_mix(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
    }
    [[nodiscard]] double uniform_at(std::uint64_t counter) const noexcept {
        return static_cast<double>(at_u64(counter) >> 11) * 0x1.0p-53;
    }

    /// Claims `count` consecutive counters and returns the first of them.
    std::uint64_t reserve(std::uint64_t count) noexcept {
        const auto first = counter_;
        counter_ += count;
        return first;
    }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

    // UniformRandomBitGenerator
    result_type operator()() noexcept { return next_u64(); }
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

private:
    Rng(std::uint64_t key, std::uint64_t counter) noexcept : key_(key), counter_(counter) {}

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace ttql
