#ifndef PARAFORGE_SELECTION_HPP
#define PARAFORGE_SELECTION_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "paraforge/embedding.hpp"
#include "paraforge/metrics.hpp"
#include "paraforge/tokenize.hpp"

namespace paraforge {

// The four similarity scores of one paraphrase candidate against its
// original. Selection maximizes the semantic pair and minimizes the
// count-based pair.
struct MetricVector {
  double sem_match = 0.0;
  double lm_like = 0.0;
  double rouge_l = 0.0;
  double bleu = 0.0;
  std::size_t candidate_id = 0;

  bool operator==(const MetricVector& other) const = default;
};

struct Candidate {
  std::string text;
  std::optional<MetricVector> metrics;
};

struct CandidateSet {
  std::string original_id;
  std::vector<Candidate> candidates;
};

struct MetricOptions {
  Scheme scheme = Scheme::kWhitespaceLowerNoPunct;
  int bleu_max_n = 4;
  int lm_order = 1;
};

MetricVector metric_vector(const TokenSeq& candidate, const TokenSeq& original,
                           const EmbeddingTable& emb, std::size_t candidate_id = 0,
                           const MetricOptions& options = {});

// Scores every candidate in the set against the original text.
void score_candidates(CandidateSet& set, const std::string& original_text,
                      const EmbeddingTable& emb, const MetricOptions& options = {});

// True when `other` is at least as good as `v` on every axis and strictly
// better on at least one (maximize sem_match/lm_like, minimize rouge_l/bleu).
bool dominates(const MetricVector& other, const MetricVector& v);

// Non-dominated subset, in input order.
std::vector<MetricVector> pareto_frontier(const std::vector<MetricVector>& vectors);

struct SelectionWeights {
  double sem_match = 0.5;
  double lm_like = 0.5;
  double rouge_l = 0.5;
  double bleu = 0.5;
};

double selection_score(const MetricVector& v, const SelectionWeights& w = {});

// Restricts to the Pareto frontier, then picks the candidate with the highest
// scalarized score; exact ties go to the lowest candidate_id. Returns the
// index into set.candidates.
std::size_t select_candidate(const CandidateSet& set, const SelectionWeights& w = {});

}  // namespace paraforge

#endif
