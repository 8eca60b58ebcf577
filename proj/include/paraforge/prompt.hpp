#ifndef PARAFORGE_PROMPT_HPP
#define PARAFORGE_PROMPT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace paraforge {

// Few-shot prompt template. Example pairs are used in file order and dropped
// from the tail until the rendered prompt fits the token budget.
struct PromptSpec {
  std::string instruction = "Rephrase the following sentence.";
  std::vector<std::pair<std::string, std::string>> example_pairs;
  std::string target;
  int context_budget_tokens = 2048;
};

// Renders: instruction, blank line, "Original: <o>\nParaphrased: <p>\n\n" per
// example, then "Original: <target>\nParaphrased:". Budgeting counts
// whitespace tokens of the full render. Throws ValidationError when the
// instruction and target alone exceed the budget.
std::string build_prompt(const PromptSpec& spec);

// JSONL with fields {"original", "paraphrased"}, one pair per line.
std::vector<std::pair<std::string, std::string>> load_example_pairs(
    const std::filesystem::path& file);

// Recovers the target text from the final "Original: ...\nParaphrased:" block
// of a rendered prompt. Used by backends that transform the target directly.
std::string extract_prompt_target(const std::string& prompt);

}  // namespace paraforge

#endif
