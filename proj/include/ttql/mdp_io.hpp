#pragma once

#include "ttql/mdp.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace ttql {

// MDP and Q-table text formats; docs/formats.md has the byte-level description.

[[nodiscard]] std::string mdp_to_json(const Mdp& mdp);
/// Throws std::invalid_argument on malformed input or invariant violations.
[[nodiscard]] Mdp mdp_from_json(std::string_view text);

[[nodiscard]] std::string qtable_to_json(const QTable& q);
[[nodiscard]] QTable qtable_from_json(std::string_view text);

void save_mdp(const Mdp& mdp, const std::filesystem::path& path);
[[nodiscard]] Mdp load_mdp(const std::filesystem::path& path);
void save_qtable(const QTable& q, const std::filesystem::path& path);
[[nodiscard]] QTable load_qtable(const std::filesystem::path& path);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view text);

/// 64-bit FNV-1a, used for golden-file fingerprints and config hashes.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;

} // namespace ttql
