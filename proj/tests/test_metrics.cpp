#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <doctest.h>

#include "paraforge/errors.hpp"
#include "paraforge/metrics.hpp"

using namespace paraforge;

namespace {

TokenSeq seq(std::vector<std::string> tokens) {
  TokenSeq s;
  s.tokens = std::move(tokens);
  return s;
}

EmbeddingTable one_hot(const std::vector<std::string>& vocab) {
  EmbeddingTable emb(static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab.size()));
    v[static_cast<Eigen::Index>(i)] = 1.0;
    emb.insert(vocab[i], v);
  }
  return emb;
}

std::vector<std::string> random_tokens(std::mt19937_64& gen, std::size_t max_len,
                                       const std::vector<std::string>& vocab) {
  const std::size_t len = 1 + gen() % max_len;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(vocab[gen() % vocab.size()]);
  return out;
}

// Exhaustive LCS oracle: longest subsequence of `a` that is also a
// subsequence of `b`. Only usable for |a| <= ~16.
std::size_t lcs_brute_force(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask >> i & 1) sub.push_back(a[i]);
    }
    std::size_t j = 0;
    for (const std::string& token : b) {
      if (j < sub.size() && token == sub[j]) ++j;
    }
    if (j == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

// Bag-overlap F1 oracle for sem_match under one-hot embeddings.
double bag_overlap_f1(const std::vector<std::string>& cand,
                      const std::vector<std::string>& ref) {
  const std::set<std::string> cand_types(cand.begin(), cand.end());
  const std::set<std::string> ref_types(ref.begin(), ref.end());
  auto hits = [](const std::vector<std::string>& tokens,
                 const std::set<std::string>& other) {
    std::size_t n = 0;
    for (const std::string& t : tokens) n += other.count(t);
    return static_cast<double>(n);
  };
  const double p = hits(cand, ref_types) / static_cast<double>(cand.size());
  const double r = hits(ref, cand_types) / static_cast<double>(ref.size());
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

TEST_CASE("bleu identity and disjoint cases") {
  CHECK(bleu(seq({"a", "b", "c"}), seq({"a", "b", "c"}), 2).value == doctest::Approx(1.0));
  CHECK(bleu(seq({"x", "y", "z"}), seq({"a", "b", "c"}), 1).value == 0.0);
}

TEST_CASE("bleu hand-counted precision example") {
  // 1-gram precision 2/3, 2-gram precision 1/2, no brevity penalty
  const double expected = std::sqrt((2.0 / 3.0) * (1.0 / 2.0));
  CHECK(bleu(seq({"a", "b", "c"}), seq({"a", "b", "d"}), 2).value ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bleu brevity penalty applies to short candidates") {
  // candidate 2 tokens vs reference 4, unigram precision 1
  const double expected = std::exp(1.0 - 4.0 / 2.0);
  CHECK(bleu(seq({"a", "b"}), seq({"a", "b", "c", "d"}), 1).value ==
        doctest::Approx(expected));
}

TEST_CASE("bleu with max_n above candidate length is zero") {
  CHECK(bleu(seq({"a", "b"}), seq({"a", "b"}), 4).value == 0.0);
}

TEST_CASE("bleu rejects empty input and bad max_n") {
  CHECK_THROWS_AS(bleu(seq({}), seq({"a"}), 2), EmptyInputError);
  CHECK_THROWS_AS(bleu(seq({"a"}), seq({"a"}), 0), ValidationError);
  CHECK_THROWS_AS(bleu(seq({"a"}), seq({"a"}), 5), ValidationError);
}

TEST_CASE("metrics reject scheme mismatch") {
  TokenSeq a = seq({"a"});
  TokenSeq b = seq({"a"});
  b.scheme = Scheme::kWhitespace;
  CHECK_THROWS_AS(bleu(a, b, 1), ValidationError);
  CHECK_THROWS_AS(rouge_l(a, b), ValidationError);
}

TEST_CASE("rouge_l identity, disjoint, and hand DP example") {
  CHECK(rouge_l(seq({"a", "b"}), seq({"a", "b"})).value == doctest::Approx(1.0));
  CHECK(rouge_l(seq({"x"}), seq({"a"})).value == 0.0);
  // LCS([a,b,c,d], [a,c,b,d]) = 3 -> P = R = 3/4 -> F = 0.75
  CHECK(rouge_l(seq({"a", "b", "c", "d"}), seq({"a", "c", "b", "d"})).value ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("lcs DP equals brute-force enumeration on short sequences") {
  std::mt19937_64 gen(7);
  const std::vector<std::string> vocab = {"a", "b", "c", "d"};
  for (int round = 0; round < 300; ++round) {
    const auto a = random_tokens(gen, 8, vocab);
    const auto b = random_tokens(gen, 8, vocab);
    CHECK(lcs_length(a, b) == lcs_brute_force(a, b));
  }
}

TEST_CASE("rouge_l swaps P and R but keeps F") {
  std::mt19937_64 gen(11);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  for (int round = 0; round < 100; ++round) {
    const TokenSeq a = seq(random_tokens(gen, 10, vocab));
    const TokenSeq b = seq(random_tokens(gen, 10, vocab));
    CHECK(rouge_l(a, b).value == doctest::Approx(rouge_l(b, a).value).epsilon(1e-12));
  }
}

TEST_CASE("rouge_l is 1 iff sequences are equal") {
  std::mt19937_64 gen(13);
  const std::vector<std::string> vocab = {"a", "b", "c"};
  for (int round = 0; round < 200; ++round) {
    const TokenSeq a = seq(random_tokens(gen, 6, vocab));
    const TokenSeq b = seq(random_tokens(gen, 6, vocab));
    const bool equal = a.tokens == b.tokens;
    CHECK((rouge_l(a, b).value == 1.0) == equal);
  }
}

TEST_CASE("sem_match identity and orthogonal cases") {
  const EmbeddingTable emb = one_hot({"u", "v", "w"});
  CHECK(sem_match(seq({"u", "v"}), seq({"u", "v"}), emb).value == doctest::Approx(1.0));
  CHECK(sem_match(seq({"u"}), seq({"w"}), emb).value == 0.0);
}

TEST_CASE("sem_match greedy matching hand example") {
  // cand [u,v], ref [u,w] with cos(v,w) = 0.5, all other cross-cosines 0
  EmbeddingTable emb(3);
  emb.insert("u", Eigen::Vector3d(1, 0, 0));
  emb.insert("v", Eigen::Vector3d(0, 1, 0));
  emb.insert("w", Eigen::Vector3d(0, 0.5, std::sqrt(0.75)));
  CHECK(sem_match(seq({"u", "v"}), seq({"u", "w"}), emb).value ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("sem_match negative cosines clip to zero") {
  EmbeddingTable emb(2);
  emb.insert("p", Eigen::Vector2d(1, 0));
  emb.insert("q", Eigen::Vector2d(-1, 0));
  CHECK(sem_match(seq({"p"}), seq({"q"}), emb).value == 0.0);
}

TEST_CASE("sem_match errors when a side is fully out of vocabulary") {
  const EmbeddingTable emb = one_hot({"u"});
  CHECK_THROWS_AS(sem_match(seq({"zz"}), seq({"u"}), emb), OovError);
}

TEST_CASE("sem_match with one-hot embeddings equals bag-overlap F1") {
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  const EmbeddingTable emb = one_hot(vocab);
  std::mt19937_64 gen(17);
  for (int round = 0; round < 200; ++round) {
    const auto cand = random_tokens(gen, 8, vocab);
    const auto ref = random_tokens(gen, 8, vocab);
    CHECK(sem_match(seq(cand), seq(ref), emb).value ==
          doctest::Approx(bag_overlap_f1(cand, ref)).epsilon(1e-9));
  }
}

TEST_CASE("lm_like floor and intermediate values, hand-evaluated") {
  // disjoint vocab: V = 4 over union, N = 2 -> every token at 1/(N+V) = 1/6
  CHECK(lm_like(seq({"x", "y"}), seq({"a", "b"}), 1).value ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  // one shared token: P(a) = 2/5, P(y) = 1/5 -> sqrt(2/25)
  const double shared = std::sqrt(0.4 * 0.2);
  CHECK(lm_like(seq({"a", "y"}), seq({"a", "b"}), 1).value ==
        doctest::Approx(shared).epsilon(1e-12));
  // identity scores strictly above both
  CHECK(lm_like(seq({"a", "b"}), seq({"a", "b"}), 1).value > shared);
}

TEST_CASE("lm_like identity is maximal among equal-length candidates over "
          "distinct-token references") {
  // For references without repeated tokens the add-one model is uniform over
  // its vocabulary, so no same-length candidate can beat the identity.
  const TokenSeq ref = seq({"a", "b", "c", "d"});
  const double identity = lm_like(ref, ref, 1).value;
  std::mt19937_64 gen(23);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "x", "y"};
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> cand;
    for (int i = 0; i < 4; ++i) cand.push_back(vocab[gen() % vocab.size()]);
    CHECK(lm_like(seq(cand), ref, 1).value <= identity + 1e-12);
  }
}

TEST_CASE("lm_like higher order stays deterministic and in range") {
  const TokenSeq ref = seq({"a", "b", "a", "c"});
  for (int order : {1, 2, 3}) {
    const double first = lm_like(ref, ref, order).value;
    const double second = lm_like(ref, ref, order).value;
    CHECK(first == second);
    CHECK(first > 0.0);
    CHECK(first <= 1.0);
  }
  CHECK_THROWS_AS(lm_like(seq({"a"}), seq({"b"}), 0), ValidationError);
}

TEST_CASE("text_match containment cases") {
  CHECK(text_match(seq({"a", "b", "c"}), seq({"a", "b", "c"}), 3).value == 1.0);
  CHECK(text_match(seq({"x"}), seq({"a"}), 1).value == 0.0);
  // bigrams {ab, bc, cd}; only ab contained
  CHECK(text_match(seq({"a", "b", "c", "d"}), seq({"a", "b", "x", "y"}), 2).value ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("text_match caps duplicate n-grams at the reference count") {
  // candidate has "a" twice, reference only once
  CHECK(text_match(seq({"a", "a"}), seq({"a", "b"}), 1).value == doctest::Approx(0.5));
}

TEST_CASE("text_match rejects a candidate shorter than n") {
  CHECK_THROWS_AS(text_match(seq({"a"}), seq({"a", "b"}), 2), ValidationError);
}

TEST_CASE("all metrics stay within [0,1] on fuzzed inputs") {
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
  const EmbeddingTable emb = one_hot(vocab);
  std::mt19937_64 gen(31);
  for (int round = 0; round < 300; ++round) {
    const TokenSeq cand = seq(random_tokens(gen, 12, vocab));
    const TokenSeq ref = seq(random_tokens(gen, 12, vocab));
    for (double value :
         {bleu(cand, ref, 1 + static_cast<int>(gen() % 4)).value,
          rouge_l(cand, ref).value, sem_match(cand, ref, emb).value,
          lm_like(cand, ref, 1 + static_cast<int>(gen() % 3)).value,
          text_match(cand, ref, 1).value}) {
      CHECK(value >= 0.0);
      CHECK(value <= 1.0);
    }
  }
}

TEST_CASE("bleu of identical sequences is 1 whenever max_n fits") {
  std::mt19937_64 gen(37);
  const std::vector<std::string> vocab = {"a", "b", "c"};
  for (int round = 0; round < 100; ++round) {
    const TokenSeq x = seq(random_tokens(gen, 8, vocab));
    const int max_n = 1 + static_cast<int>(gen() % std::min<std::size_t>(x.size(), 4));
    CHECK(bleu(x, x, max_n).value == doctest::Approx(1.0).epsilon(1e-12));
  }
}
