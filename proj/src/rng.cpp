#include "ttql/rng.hpp"

namespace ttql {

namespace {
constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t seed_salt = 0x6a09e667f3bcc909ULL;
} // namespace

Rng::Rng(std::uint64_t seed) noexcept : key_(splitmix64_mix(seed ^ seed_salt)), counter_(0) {}

Rng Rng::from_key(std::uint64_t key) noexcept { return Rng(key, 0); }

Rng Rng::substream(std::uint64_t tag) const noexcept {
    return Rng(splitmix64_mix(key_ ^ splitmix64_mix(tag + golden_gamma)), 0);
}

} // namespace ttql
