#include "paraforge/generate.hpp"

#include <cctype>
#include <cmath>

#include "paraforge/embedding.hpp"
#include "paraforge/errors.hpp"
#include "paraforge/tokenize.hpp"

namespace paraforge {

namespace {

// Cut at the first blank line to strip runaway multi-paragraph output.
std::string first_paragraph(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    std::size_t next = nl + 1;
    while (next < text.size() &&
           (text[next] == ' ' || text[next] == '\t' || text[next] == '\r')) {
      ++next;
    }
    if (next >= text.size() || text[next] == '\n') return text.substr(0, nl);
    pos = nl + 1;
  }
  return text;
}

// Truncate to the first `cap` whitespace tokens, preserving internal spacing.
std::string truncate_tokens(const std::string& text, int cap) {
  if (cap <= 0) return {};
  int seen = 0;
  bool in_token = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    if (!space && !in_token) {
      in_token = true;
      ++seen;
    } else if (space && in_token) {
      in_token = false;
      if (seen == cap) return text.substr(0, i);
    }
  }
  return text;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t slot, std::uint64_t attempt) {
  // splitmix64 over the combined counter
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (slot * 131 + attempt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

int max_new_tokens(const std::string& original, double ratio) {
  return static_cast<int>(
      std::floor(ratio * static_cast<double>(whitespace_token_count(original))));
}

CandidateSet paraphrase(Backend& backend, const std::string& original_id,
                        const std::string& original, const GenParams& params,
                        const PromptSpec& prompt_spec) {
  if (trimmed(original).empty()) {
    throw EmptyInputError("paraphrase: original text is empty");
  }
  if (params.max_new_tokens_ratio <= 0.0 || params.max_new_tokens_ratio > 1.0) {
    throw ValidationError("paraphrase: max_new_tokens_ratio must be in (0, 1]");
  }
  if (params.candidates_per_original < 1) {
    throw ValidationError("paraphrase: candidates_per_original must be >= 1");
  }

  PromptSpec spec = prompt_spec;
  spec.target = original;
  const std::string prompt = build_prompt(spec);
  const int cap = max_new_tokens(original, params.max_new_tokens_ratio);

  CandidateSet set;
  set.original_id = original_id;
  for (int slot = 0; slot < params.candidates_per_original; ++slot) {
    for (int attempt = 0; attempt <= params.retry_cap; ++attempt) {
      CompletionParams cp;
      cp.temperature = params.temperature;
      cp.seed = mix_seed(params.seed, static_cast<std::uint64_t>(slot),
                         static_cast<std::uint64_t>(attempt));
      std::string completion = trimmed(backend.complete(prompt, cap, cp));
      completion = trimmed(truncate_tokens(first_paragraph(completion), cap));
      if (!completion.empty()) {
        set.candidates.push_back({std::move(completion), std::nullopt});
        break;
      }
    }
  }
  if (set.candidates.empty()) {
    throw EmptyInputError("paraphrase: all candidates for '" + original_id +
                          "' were empty after " + std::to_string(params.retry_cap) +
                          " retries");
  }
  return set;
}

std::string generator_digest(const Backend& backend, const PromptSpec& prompt_spec,
                             const GenParams& params) {
  std::string prompt_material = prompt_spec.instruction;
  for (const auto& [orig, para] : prompt_spec.example_pairs) {
    prompt_material += '\x1f' + orig + '\x1f' + para;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "|ratio:%g|temp:%g|n:%d|seed:%llu",
                params.max_new_tokens_ratio, params.temperature,
                params.candidates_per_original,
                static_cast<unsigned long long>(params.seed));
  return backend.identity() + "|prompt:" + fnv1a_hex(prompt_material) + buf;
}

}  // namespace paraforge
