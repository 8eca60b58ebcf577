#ifndef PARAFORGE_METRICS_HPP
#define PARAFORGE_METRICS_HPP

#include <cstddef>
#include <span>
#include <string>

#include "paraforge/embedding.hpp"
#include "paraforge/tokenize.hpp"

namespace paraforge {

enum class MetricId { kBleu, kRougeL, kSemMatch, kLmLike, kTextMatch };

struct UnitScore {
  double value = 0.0;
  MetricId metric = MetricId::kBleu;
};

// Unsmoothed sentence BLEU: geometric mean of modified n-gram precisions for
// n = 1..max_n times the brevity penalty exp(1 - r/c) when c < r. Any zero
// precision (including orders the candidate is too short to have) yields 0,
// so bleu(x, x, max_n) is 1 only when max_n <= |x|.
UnitScore bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_n = 4);

// LCS F1: P = LCS/|candidate|, R = LCS/|reference|, F = 2PR/(P+R).
UnitScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

// Greedy-matching embedding F-score. Recall is the mean over reference tokens
// of the best clipped cosine against candidate tokens; precision symmetric.
// Out-of-vocabulary tokens are excluded from both sides; if either side has
// no in-vocabulary token, throws OovError.
UnitScore sem_match(const TokenSeq& candidate, const TokenSeq& reference,
                    const EmbeddingTable& emb);

// Generation-likelihood proxy: add-one-smoothed n-gram language model built
// from the reference, scored as exp(mean token log-probability) of the
// candidate. Vocabulary is the union of both sides' tokens.
UnitScore lm_like(const TokenSeq& candidate, const TokenSeq& reference, int order = 1);

// Containment: fraction of candidate n-grams found in the reference's n-gram
// multiset, with capped (clipped) matching.
UnitScore text_match(const TokenSeq& candidate, const TokenSeq& reference, int n = 3);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace paraforge

#endif
