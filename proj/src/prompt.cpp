#include "paraforge/prompt.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "paraforge/errors.hpp"
#include "paraforge/tokenize.hpp"

namespace paraforge {

namespace {

std::string render(const PromptSpec& spec, std::size_t n_examples) {
  std::string out = spec.instruction;
  out += "\n\n";
  for (std::size_t i = 0; i < n_examples; ++i) {
    out += "Original: " + spec.example_pairs[i].first + "\n";
    out += "Paraphrased: " + spec.example_pairs[i].second + "\n\n";
  }
  out += "Original: " + spec.target + "\nParaphrased:";
  return out;
}

}  // namespace

std::string build_prompt(const PromptSpec& spec) {
  if (spec.instruction.empty() || spec.target.empty()) {
    throw ValidationError("build_prompt: instruction and target must be non-empty");
  }
  const auto budget = static_cast<std::size_t>(spec.context_budget_tokens);
  std::size_t n = spec.example_pairs.size();
  while (true) {
    std::string prompt = render(spec, n);
    if (whitespace_token_count(prompt) <= budget) return prompt;
    if (n == 0) {
      throw ValidationError(
          "build_prompt: instruction and target alone exceed the " +
          std::to_string(budget) + "-token budget");
    }
    --n;
  }
}

std::vector<std::pair<std::string, std::string>> load_example_pairs(
    const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open example-pair file: " + file.string());
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": " +
                            e.what());
    }
    if (!record.contains("original") || !record.contains("paraphrased")) {
      throw ValidationError(file.string() + ":" + std::to_string(lineno) +
                            ": expected fields 'original' and 'paraphrased'");
    }
    pairs.emplace_back(record["original"].get<std::string>(),
                       record["paraphrased"].get<std::string>());
  }
  return pairs;
}

std::string extract_prompt_target(const std::string& prompt) {
  const std::string open = "Original: ";
  const std::string close = "\nParaphrased:";
  const std::size_t tail = prompt.rfind(close);
  if (tail == std::string::npos) {
    throw ValidationError("prompt has no 'Paraphrased:' marker");
  }
  const std::size_t start = prompt.rfind(open, tail);
  if (start == std::string::npos) {
    throw ValidationError("prompt has no 'Original:' block");
  }
  return prompt.substr(start + open.size(), tail - start - open.size());
}

}  // namespace paraforge
