#include "paraforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "paraforge/errors.hpp"

namespace paraforge {

namespace {

void require_comparable(const TokenSeq& candidate, const TokenSeq& reference,
                        const char* metric) {
  if (candidate.scheme != reference.scheme) {
    throw ValidationError(std::string(metric) +
                          ": candidate and reference use different "
                          "tokenization schemes");
  }
  if (candidate.empty() || reference.empty()) {
    throw EmptyInputError(std::string(metric) + ": empty token sequence");
  }
}

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string> gram(tokens.begin() + i, tokens.begin() + i + n);
    ++counts[std::move(gram)];
  }
  return counts;
}

}  // namespace

UnitScore bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_n) {
  require_comparable(candidate, reference, "bleu");
  if (max_n < 1 || max_n > 4) {
    throw ValidationError("bleu: max_n must be in [1, 4], got " +
                          std::to_string(max_n));
  }

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const NgramCounts cand = count_ngrams(candidate.tokens, static_cast<std::size_t>(n));
    const NgramCounts ref = count_ngrams(reference.tokens, static_cast<std::size_t>(n));
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    if (total == 0 || matched == 0) return {0.0, MetricId::kBleu};
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }

  double score = std::exp(log_sum / max_n);
  if (c < r) score *= std::exp(1.0 - r / c);
  return {std::min(score, 1.0), MetricId::kBleu};
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  std::vector<std::size_t> prev(n + 1, 0), cur(n + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

UnitScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  require_comparable(candidate, reference, "rouge_l");
  const auto lcs = static_cast<double>(lcs_length(candidate.tokens, reference.tokens));
  if (lcs == 0.0) return {0.0, MetricId::kRougeL};
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return {2.0 * p * r / (p + r), MetricId::kRougeL};
}

UnitScore sem_match(const TokenSeq& candidate, const TokenSeq& reference,
                    const EmbeddingTable& emb) {
  require_comparable(candidate, reference, "sem_match");

  auto in_vocab = [&emb](const std::vector<std::string>& tokens) {
    std::vector<const Eigen::VectorXd*> vecs;
    for (const auto& t : tokens) {
      if (const Eigen::VectorXd* v = emb.find(t)) vecs.push_back(v);
    }
    return vecs;
  };
  const auto cand = in_vocab(candidate.tokens);
  const auto ref = in_vocab(reference.tokens);
  if (cand.empty() || ref.empty()) {
    throw OovError("sem_match: no in-vocabulary token on one side");
  }

  auto greedy_mean = [](const std::vector<const Eigen::VectorXd*>& from,
                        const std::vector<const Eigen::VectorXd*>& to) {
    double sum = 0.0;
    for (const Eigen::VectorXd* f : from) {
      double best = 0.0;
      for (const Eigen::VectorXd* t : to) best = std::max(best, cosine_clipped(*f, *t));
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };

  const double recall = greedy_mean(ref, cand);
  const double precision = greedy_mean(cand, ref);
  if (precision + recall == 0.0) return {0.0, MetricId::kSemMatch};
  return {2.0 * precision * recall / (precision + recall), MetricId::kSemMatch};
}

UnitScore lm_like(const TokenSeq& candidate, const TokenSeq& reference, int order) {
  require_comparable(candidate, reference, "lm_like");
  if (order < 1) {
    throw ValidationError("lm_like: order must be >= 1, got " + std::to_string(order));
  }

  // Sentence-start padding so every candidate position has a full context.
  static const std::string kBos = "\x02<s>";
  const auto padded = [&](const std::vector<std::string>& tokens) {
    std::vector<std::string> out(static_cast<std::size_t>(order - 1), kBos);
    out.insert(out.end(), tokens.begin(), tokens.end());
    return out;
  };

  std::unordered_set<std::string> vocab(reference.tokens.begin(), reference.tokens.end());
  vocab.insert(candidate.tokens.begin(), candidate.tokens.end());
  const double v = static_cast<double>(vocab.size());

  const std::vector<std::string> ref = padded(reference.tokens);
  const NgramCounts gram_counts = count_ngrams(ref, static_cast<std::size_t>(order));
  const NgramCounts context_counts =
      order > 1 ? count_ngrams(ref, static_cast<std::size_t>(order - 1)) : NgramCounts{};

  const std::vector<std::string> cand = padded(candidate.tokens);
  double log_sum = 0.0;
  for (std::size_t i = static_cast<std::size_t>(order - 1); i < cand.size(); ++i) {
    std::vector<std::string> gram(cand.begin() + (i - (order - 1)), cand.begin() + i + 1);
    auto git = gram_counts.find(gram);
    const double gram_count = git == gram_counts.end() ? 0.0 : static_cast<double>(git->second);
    double context_count;
    if (order == 1) {
      context_count = static_cast<double>(reference.size());
    } else {
      std::vector<std::string> context(gram.begin(), gram.end() - 1);
      auto cit = context_counts.find(context);
      context_count = cit == context_counts.end() ? 0.0 : static_cast<double>(cit->second);
    }
    log_sum += std::log((gram_count + 1.0) / (context_count + v));
  }
  const double mean = log_sum / static_cast<double>(candidate.size());
  return {std::exp(mean), MetricId::kLmLike};
}

UnitScore text_match(const TokenSeq& candidate, const TokenSeq& reference, int n) {
  require_comparable(candidate, reference, "text_match");
  if (n < 1) throw ValidationError("text_match: n must be >= 1");
  const auto un = static_cast<std::size_t>(n);
  if (candidate.size() < un) {
    throw ValidationError("text_match: candidate shorter than n-gram order");
  }
  const NgramCounts cand = count_ngrams(candidate.tokens, un);
  const NgramCounts ref = count_ngrams(reference.tokens, un);
  std::size_t matched = 0;
  std::size_t total = 0;
  for (const auto& [gram, count] : cand) {
    total += count;
    auto it = ref.find(gram);
    if (it != ref.end()) matched += std::min(count, it->second);
  }
  return {static_cast<double>(matched) / static_cast<double>(total),
          MetricId::kTextMatch};
}

}  // namespace paraforge
