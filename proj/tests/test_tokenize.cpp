#include <doctest.h>

#include "paraforge/errors.hpp"
#include "paraforge/tokenize.hpp"

using namespace paraforge;

TEST_CASE("whitespace scheme keeps tokens verbatim") {
  const TokenSeq seq = tokenize("The cat.", Scheme::kWhitespace);
  CHECK(seq.tokens == std::vector<std::string>{"The", "cat."});
}

TEST_CASE("lower-nopunct scheme lowercases and strips edge punctuation") {
  const TokenSeq seq = tokenize("The cat.", Scheme::kWhitespaceLowerNoPunct);
  CHECK(seq.tokens == std::vector<std::string>{"the", "cat"});
}

TEST_CASE("whitespace runs collapse") {
  const TokenSeq seq = tokenize("  a  b ", Scheme::kWhitespace);
  CHECK(seq.tokens == std::vector<std::string>{"a", "b"});
}

TEST_CASE("inner punctuation survives, pure punctuation tokens vanish") {
  const TokenSeq seq = tokenize("well-known -- (it's)", Scheme::kWhitespaceLowerNoPunct);
  CHECK(seq.tokens == std::vector<std::string>{"well-known", "it's"});
}

TEST_CASE("empty and whitespace-only text tokenize to nothing") {
  CHECK(tokenize("", Scheme::kWhitespace).empty());
  CHECK(tokenize("  \t\n ", Scheme::kWhitespace).empty());
}

TEST_CASE("scheme names round-trip") {
  for (Scheme scheme : {Scheme::kWhitespace, Scheme::kWhitespaceLowerNoPunct}) {
    CHECK(scheme_from_name(scheme_name(scheme)) == scheme);
  }
  CHECK_THROWS_AS(scheme_from_name("bert-wordpiece"), ValidationError);
}

TEST_CASE("whitespace_token_count matches tokenize") {
  for (const char* text : {"a b c", "", " x ", "one\ttwo\nthree  four"}) {
    CHECK(whitespace_token_count(text) == tokenize(text, Scheme::kWhitespace).size());
  }
}
