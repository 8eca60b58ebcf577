#include <random>
#include <set>

#include <doctest.h>

#include "paraforge/errors.hpp"
#include "paraforge/selection.hpp"

using namespace paraforge;

namespace {

MetricVector mv(double sem, double lm, double rouge, double bleu, std::size_t id) {
  return MetricVector{sem, lm, rouge, bleu, id};
}

// Independent O(n^2) dominance oracle, written directly from the axis
// directions: maximize sem_match and lm_like, minimize rouge_l and bleu.
std::vector<std::size_t> frontier_ids_brute_force(const std::vector<MetricVector>& vs) {
  std::vector<std::size_t> ids;
  for (const MetricVector& v : vs) {
    bool dominated = false;
    for (const MetricVector& o : vs) {
      const bool weak = o.sem_match >= v.sem_match && o.lm_like >= v.lm_like &&
                        o.rouge_l <= v.rouge_l && o.bleu <= v.bleu;
      const bool strict = o.sem_match > v.sem_match || o.lm_like > v.lm_like ||
                          o.rouge_l < v.rouge_l || o.bleu < v.bleu;
      if (weak && strict) {
        dominated = true;
        break;
      }
    }
    if (!dominated) ids.push_back(v.candidate_id);
  }
  return ids;
}

std::vector<std::size_t> frontier_ids(const std::vector<MetricVector>& vs) {
  std::vector<std::size_t> ids;
  for (const MetricVector& v : pareto_frontier(vs)) ids.push_back(v.candidate_id);
  return ids;
}

const std::vector<MetricVector> kPublishedVectors = {
    mv(0.79, 0.74, 0.55, 0.63, 0),  // Out 1
    mv(0.84, 0.83, 0.64, 0.51, 1),  // Out 2
    mv(0.83, 0.85, 0.35, 0.49, 2),  // Out 3
};

}  // namespace

TEST_CASE("single vector is its own frontier") {
  const auto frontier = pareto_frontier({mv(0.5, 0.5, 0.5, 0.5, 0)});
  REQUIRE(frontier.size() == 1);
  CHECK(frontier[0].candidate_id == 0);
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(pareto_frontier({}), ValidationError);
}

TEST_CASE("two-axis example after sign normalization") {
  // {(1,0),(0,1),(.5,.5),(.2,.2)} all-maximize maps to sem/lm with neutral
  // rouge/bleu; only (.2,.2) is dominated.
  const std::vector<MetricVector> vs = {
      mv(1.0, 0.0, 0.0, 0.0, 0),
      mv(0.0, 1.0, 0.0, 0.0, 1),
      mv(0.5, 0.5, 0.0, 0.0, 2),
      mv(0.2, 0.2, 0.0, 0.0, 3),
  };
  CHECK(frontier_ids(vs) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("published candidate-selection vectors: frontier and dominance oracle") {
  const auto frontier = frontier_ids(kPublishedVectors);
  CHECK(frontier == frontier_ids_brute_force(kPublishedVectors));
  // Candidate 2 improves on candidate 0 along every axis, so the frontier is
  // {1, 2}; candidate 0 falls out.
  CHECK(frontier == std::vector<std::size_t>{1, 2});
}

TEST_CASE("frontier matches brute force on random sets") {
  std::mt19937_64 gen(41);
  auto unit = [&gen] { return static_cast<double>(gen() % 1000) / 999.0; };
  for (int round = 0; round < 200; ++round) {
    std::vector<MetricVector> vs;
    const std::size_t n = 1 + gen() % 64;
    for (std::size_t i = 0; i < n; ++i) {
      vs.push_back(mv(unit(), unit(), unit(), unit(), i));
    }
    CHECK(frontier_ids(vs) == frontier_ids_brute_force(vs));
  }
}

TEST_CASE("frontier is invariant under increasing per-axis transforms") {
  std::mt19937_64 gen(43);
  auto unit = [&gen] { return static_cast<double>(gen() % 1000) / 999.0; };
  auto grow = [](double x) { return x * x * 0.5 + 0.4 * x; };    // increasing on [0,1]
  auto shrink = [](double x) { return 1.0 - (1.0 - x) * 0.7; };  // increasing
  for (int round = 0; round < 100; ++round) {
    std::vector<MetricVector> vs;
    const std::size_t n = 1 + gen() % 32;
    for (std::size_t i = 0; i < n; ++i) {
      vs.push_back(mv(unit(), unit(), unit(), unit(), i));
    }
    std::vector<MetricVector> transformed;
    for (const MetricVector& v : vs) {
      transformed.push_back(
          mv(grow(v.sem_match), shrink(v.lm_like), grow(v.rouge_l), shrink(v.bleu),
             v.candidate_id));
    }
    CHECK(frontier_ids(vs) == frontier_ids(transformed));
  }
}

TEST_CASE("select_candidate reproduces the published bold choice") {
  CandidateSet set;
  set.original_id = "fixture";
  for (const MetricVector& v : kPublishedVectors) {
    set.candidates.push_back({"candidate", v});
  }
  CHECK(select_candidate(set) == 2);
  // scalarized scores from the same vectors
  CHECK(selection_score(kPublishedVectors[0]) == doctest::Approx(0.175));
  CHECK(selection_score(kPublishedVectors[1]) == doctest::Approx(0.26));
  CHECK(selection_score(kPublishedVectors[2]) == doctest::Approx(0.42));
}

TEST_CASE("select_candidate trivial and tie cases") {
  CandidateSet single;
  single.candidates.push_back({"only", mv(0.5, 0.5, 0.5, 0.5, 0)});
  CHECK(select_candidate(single) == 0);

  CandidateSet tie;
  tie.candidates.push_back({"first", mv(0.6, 0.6, 0.2, 0.2, 0)});
  tie.candidates.push_back({"second", mv(0.6, 0.6, 0.2, 0.2, 1)});
  CHECK(select_candidate(tie) == 0);
}

TEST_CASE("select_candidate requires scored candidates") {
  CandidateSet set;
  set.candidates.push_back({"unscored", std::nullopt});
  CHECK_THROWS_AS(select_candidate(set), ValidationError);
  CHECK_THROWS_AS(select_candidate(CandidateSet{}), ValidationError);
}

TEST_CASE("selection always returns a frontier member and ignores dominated noise") {
  std::mt19937_64 gen(47);
  auto unit = [&gen] { return static_cast<double>(gen() % 1000) / 999.0; };
  for (int round = 0; round < 200; ++round) {
    CandidateSet set;
    const std::size_t n = 1 + gen() % 16;
    std::vector<MetricVector> vs;
    for (std::size_t i = 0; i < n; ++i) {
      MetricVector v = mv(unit(), unit(), unit(), unit(), i);
      vs.push_back(v);
      set.candidates.push_back({"c", v});
    }
    const std::size_t chosen = select_candidate(set);
    const auto frontier = frontier_ids(vs);
    CHECK(std::count(frontier.begin(), frontier.end(), chosen) == 1);

    // Append a vector dominated by the winner: the choice must not move.
    const MetricVector& w = vs[chosen];
    MetricVector dominated = mv(w.sem_match * 0.5, w.lm_like * 0.5,
                                std::min(1.0, w.rouge_l + 0.1),
                                std::min(1.0, w.bleu + 0.1), n);
    set.candidates.push_back({"dominated", dominated});
    CHECK(select_candidate(set) == chosen);
  }
}

TEST_CASE("metric_vector of identical texts maxes similarity and count scores") {
  EmbeddingTable emb(2);
  emb.insert("a", Eigen::Vector2d(1, 0));
  emb.insert("b", Eigen::Vector2d(0, 1));
  TokenSeq text = tokenize("a b a b", Scheme::kWhitespaceLowerNoPunct);
  const MetricVector v = metric_vector(text, text, emb, 0);
  CHECK(v.sem_match == doctest::Approx(1.0));
  CHECK(v.rouge_l == doctest::Approx(1.0));
  CHECK(v.bleu == doctest::Approx(1.0));
  CHECK(v.lm_like > 0.0);
}
