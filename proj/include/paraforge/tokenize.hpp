#ifndef PARAFORGE_TOKENIZE_HPP
#define PARAFORGE_TOKENIZE_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace paraforge {

// Tokenization schemes. All metric computation records which scheme produced
// its inputs; mixing schemes across a compared pair is an error.
enum class Scheme {
  kWhitespace,              // split on whitespace runs, tokens kept verbatim
  kWhitespaceLowerNoPunct,  // additionally lowercase and strip edge punctuation
};

struct TokenSeq {
  std::vector<std::string> tokens;
  Scheme scheme = Scheme::kWhitespaceLowerNoPunct;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }

  bool operator==(const TokenSeq& other) const = default;
};

// Deterministic tokenization. With kWhitespaceLowerNoPunct, tokens that are
// entirely punctuation vanish; callers that need non-empty input check for
// emptiness themselves (metrics raise EmptyInputError).
TokenSeq tokenize(std::string_view text, Scheme scheme);

const char* scheme_name(Scheme scheme);
Scheme scheme_from_name(std::string_view name);

// Number of whitespace-delimited tokens; used for prompt budgeting and
// generation length caps.
std::size_t whitespace_token_count(std::string_view text);

}  // namespace paraforge

#endif
