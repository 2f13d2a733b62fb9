#pragma once

#include "ttql/generators.hpp"
#include "ttql/mdp.hpp"
#include "ttql/rng.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace ttql::test {

inline Mdp small_random(std::uint64_t seed, std::size_t s = 6, std::size_t a = 3, double gamma = 0.9) {
    Rng rng(seed);
    return random_mdp(s, a, gamma, rng);
}

/// Single state, single action: Q* = r / (1 - gamma).
inline Mdp single_state(double r, double gamma) {
    return Mdp(1, 1, {r}, {1.0}, gamma);
}

inline QTable random_q(std::size_t s, std::size_t a, double lo, double hi, Rng& rng) {
    std::vector<double> v(s * a);
    for (double& x : v) x = rng.uniform(lo, hi);
    return QTable(s, a, std::move(v));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ttql-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace ttql::test
