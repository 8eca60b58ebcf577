#ifndef PARAFORGE_SPIN_HPP
#define PARAFORGE_SPIN_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>

namespace paraforge {

// Rule-based synonym spinning. every_kth replaces the token at positions
// k, 2k, ... (1-indexed); probability replaces each token independently.
// Lookups are case-insensitive; the replacement keeps the casing of the
// original token's first letter.
struct SpinPolicy {
  enum class Mode { kEveryKth, kProbability };

  int period = 4;
  std::unordered_map<std::string, std::string> synonyms;
  Mode mode = Mode::kEveryKth;
  double prob = 0.15;
};

// Whitespace between tokens is preserved verbatim, so an empty synonym table
// returns the input unchanged.
std::string spin(std::string_view text, const SpinPolicy& policy, std::uint64_t seed);

// Two tab-separated tokens per line, UTF-8.
std::unordered_map<std::string, std::string> load_synonym_table(
    const std::filesystem::path& file);

}  // namespace paraforge

#endif
