#include "paraforge/selection.hpp"

#include "paraforge/errors.hpp"

namespace paraforge {

MetricVector metric_vector(const TokenSeq& candidate, const TokenSeq& original,
                           const EmbeddingTable& emb, std::size_t candidate_id,
                           const MetricOptions& options) {
  MetricVector v;
  v.sem_match = sem_match(candidate, original, emb).value;
  v.lm_like = lm_like(candidate, original, options.lm_order).value;
  v.rouge_l = rouge_l(candidate, original).value;
  v.bleu = bleu(candidate, original, options.bleu_max_n).value;
  v.candidate_id = candidate_id;
  return v;
}

void score_candidates(CandidateSet& set, const std::string& original_text,
                      const EmbeddingTable& emb, const MetricOptions& options) {
  const TokenSeq original = tokenize(original_text, options.scheme);
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    const TokenSeq cand = tokenize(set.candidates[i].text, options.scheme);
    set.candidates[i].metrics = metric_vector(cand, original, emb, i, options);
  }
}

bool dominates(const MetricVector& other, const MetricVector& v) {
  const bool at_least_as_good =
      other.sem_match >= v.sem_match && other.lm_like >= v.lm_like &&
      other.rouge_l <= v.rouge_l && other.bleu <= v.bleu;
  if (!at_least_as_good) return false;
  return other.sem_match > v.sem_match || other.lm_like > v.lm_like ||
         other.rouge_l < v.rouge_l || other.bleu < v.bleu;
}

std::vector<MetricVector> pareto_frontier(const std::vector<MetricVector>& vectors) {
  if (vectors.empty()) throw ValidationError("pareto_frontier: empty vector list");
  std::vector<MetricVector> frontier;
  for (const MetricVector& v : vectors) {
    bool dominated = false;
    for (const MetricVector& other : vectors) {
      if (dominates(other, v)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) frontier.push_back(v);
  }
  return frontier;
}

double selection_score(const MetricVector& v, const SelectionWeights& w) {
  return w.sem_match * v.sem_match + w.lm_like * v.lm_like -
         w.rouge_l * v.rouge_l - w.bleu * v.bleu;
}

std::size_t select_candidate(const CandidateSet& set, const SelectionWeights& w) {
  if (set.candidates.empty()) {
    throw ValidationError("select_candidate: empty candidate set");
  }
  std::vector<MetricVector> vectors;
  vectors.reserve(set.candidates.size());
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    if (!set.candidates[i].metrics) {
      throw ValidationError("select_candidate: candidate " + std::to_string(i) +
                            " of '" + set.original_id + "' is unscored");
    }
    MetricVector v = *set.candidates[i].metrics;
    v.candidate_id = i;
    vectors.push_back(v);
  }

  const std::vector<MetricVector> frontier = pareto_frontier(vectors);
  const MetricVector* best = &frontier.front();
  double best_score = selection_score(*best, w);
  for (const MetricVector& v : frontier) {
    const double s = selection_score(v, w);
    if (s > best_score || (s == best_score && v.candidate_id < best->candidate_id)) {
      best = &v;
      best_score = s;
    }
  }
  return best->candidate_id;
}

}  // namespace paraforge
