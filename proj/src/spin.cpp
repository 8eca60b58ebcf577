#include "paraforge/spin.hpp"

#include <cctype>
#include <fstream>
#include <random>

#include "paraforge/errors.hpp"

namespace paraforge {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

std::string lowered(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string with_casing_of(std::string_view original, std::string replacement) {
  if (original.empty() || replacement.empty()) return replacement;
  const auto first = static_cast<unsigned char>(original.front());
  auto& head = replacement.front();
  if (std::isupper(first)) {
    head = static_cast<char>(std::toupper(static_cast<unsigned char>(head)));
  } else if (std::islower(first)) {
    head = static_cast<char>(std::tolower(static_cast<unsigned char>(head)));
  }
  return replacement;
}

// Uniform [0,1) from the top 53 bits; avoids distribution objects whose
// output is implementation-defined.
double unit_draw(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string spin(std::string_view text, const SpinPolicy& policy, std::uint64_t seed) {
  if (policy.period < 1) throw ValidationError("spin: period must be >= 1");
  if (policy.prob < 0.0 || policy.prob > 1.0) {
    throw ValidationError("spin: prob must be in [0, 1]");
  }

  std::mt19937_64 gen(seed);
  std::string out;
  out.reserve(text.size());

  std::size_t i = 0;
  std::size_t position = 0;  // 1-indexed token position
  const std::size_t n = text.size();
  while (i < n) {
    std::size_t ws_start = i;
    while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
    out.append(text.substr(ws_start, i - ws_start));
    if (i == n) break;

    std::size_t tok_start = i;
    while (i < n && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view token = text.substr(tok_start, i - tok_start);
    ++position;

    bool selected;
    if (policy.mode == SpinPolicy::Mode::kEveryKth) {
      selected = position % static_cast<std::size_t>(policy.period) == 0;
    } else {
      selected = unit_draw(gen) < policy.prob;
    }

    if (selected) {
      auto it = policy.synonyms.find(lowered(token));
      if (it != policy.synonyms.end()) {
        out += with_casing_of(token, it->second);
        continue;
      }
    }
    out.append(token);
  }
  return out;
}

std::unordered_map<std::string, std::string> load_synonym_table(
    const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open synonym table: " + file.string());
  std::unordered_map<std::string, std::string> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw ValidationError(file.string() + ":" + std::to_string(lineno) +
                            ": expected two tab-separated tokens");
    }
    table[lowered(line.substr(0, tab))] = line.substr(tab + 1);
  }
  return table;
}

}  // namespace paraforge
