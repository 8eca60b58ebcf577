#include "paraforge/tokenize.hpp"

#include <cctype>

#include "paraforge/errors.hpp"

namespace paraforge {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

std::string normalize_token(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && is_punct(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && is_punct(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    out.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(raw[i]))));
  }
  return out;
}

}  // namespace

TokenSeq tokenize(std::string_view text, Scheme scheme) {
  TokenSeq seq;
  seq.scheme = scheme;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < n && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::string_view raw = text.substr(start, i - start);
    if (scheme == Scheme::kWhitespace) {
      seq.tokens.emplace_back(raw);
    } else {
      std::string norm = normalize_token(raw);
      if (!norm.empty()) seq.tokens.push_back(std::move(norm));
    }
  }
  return seq;
}

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kWhitespace:
      return "whitespace";
    case Scheme::kWhitespaceLowerNoPunct:
      return "whitespace-lower-nopunct";
  }
  return "unknown";
}

Scheme scheme_from_name(std::string_view name) {
  if (name == "whitespace") return Scheme::kWhitespace;
  if (name == "whitespace-lower-nopunct") return Scheme::kWhitespaceLowerNoPunct;
  throw ValidationError("unknown tokenization scheme: " + std::string(name));
}

std::size_t whitespace_token_count(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(static_cast<unsigned char>(c))) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

}  // namespace paraforge
