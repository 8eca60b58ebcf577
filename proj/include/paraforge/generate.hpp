#ifndef PARAFORGE_GENERATE_HPP
#define PARAFORGE_GENERATE_HPP

#include <cstdint>
#include <string>

#include "paraforge/backend.hpp"
#include "paraforge/prompt.hpp"
#include "paraforge/selection.hpp"

namespace paraforge {

struct GenParams {
  double max_new_tokens_ratio = 0.9;
  double temperature = 0.8;
  int candidates_per_original = 4;
  std::uint64_t seed = 0;
  int retry_cap = 2;
};

// floor(ratio * whitespace token count); paraphrases are capped shorter than
// their originals.
int max_new_tokens(const std::string& original, double ratio);

// Requests candidates_per_original completions for one original. Completions
// are cut at the first blank line, truncated to the token cap, and dropped
// (with retries up to retry_cap) when empty or whitespace-only. Throws
// BackendError if the backend keeps failing and EmptyInputError when every
// candidate slot ends up empty. Candidates carry no metrics yet; see
// score_candidates.
CandidateSet paraphrase(Backend& backend, const std::string& original_id,
                        const std::string& original, const GenParams& params,
                        const PromptSpec& prompt_spec);

// Digest recorded with every generated pair: backend identity, prompt-template
// hash, and the generation parameters. Enables exact re-runs.
std::string generator_digest(const Backend& backend, const PromptSpec& prompt_spec,
                             const GenParams& params);

}  // namespace paraforge

#endif
