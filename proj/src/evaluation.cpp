#include "paraforge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "paraforge/errors.hpp"

namespace paraforge {

namespace {

// Regularized incomplete beta via Lentz's continued fraction.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

double f1_macro(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("f1_macro: empty confusion matrix");
  double sum = 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto tp = static_cast<double>(cm.counts[c][c]);
    const auto fp = static_cast<double>(cm.counts[1 - c][c]);
    const auto fn = static_cast<double>(cm.counts[c][1 - c]);
    const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                    : 0.0;
  }
  return sum / 2.0;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw ValidationError("accuracy: empty confusion matrix");
  return static_cast<double>(cm.counts[0][0] + cm.counts[1][1]) /
         static_cast<double>(total);
}

double sample_mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  const double mean = sample_mean(values);
  double sum = 0.0;
  for (double v : values) sum += (v - mean) * (v - mean);
  return sum / static_cast<double>(values.size() - 1);
}

StatResult permutation_test(std::span<const double> a, std::span<const double> b,
                            int iterations, std::uint64_t seed, PermMode mode) {
  if (a.size() != b.size()) {
    throw ValidationError("permutation_test: paired samples must have equal length");
  }
  if (a.empty()) throw ValidationError("permutation_test: empty samples");
  if (iterations < 1) throw ValidationError("permutation_test: iterations must be >= 1");

  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  double observed = 0.0;
  for (double d : diff) observed += d;
  observed = std::abs(observed / static_cast<double>(n));

  const bool exact = mode == PermMode::kExact ||
                     (mode == PermMode::kAuto && n <= 20);

  StatResult result;
  result.method = StatMethod::kPermutation;
  result.statistic = observed;

  if (exact) {
    if (n > 30) throw ValidationError("permutation_test: exact mode limited to n <= 30");
    const std::uint64_t patterns = 1ull << n;
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      double stat = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        stat += (mask >> i) & 1 ? -diff[i] : diff[i];
      }
      stat = std::abs(stat / static_cast<double>(n));
      if (stat >= observed - 1e-12) ++hits;
    }
    result.p_value = static_cast<double>(hits) / static_cast<double>(patterns);
    return result;
  }

  std::mt19937_64 gen(seed);
  std::uint64_t hits = 0;
  for (int it = 0; it < iterations; ++it) {
    double stat = 0.0;
    std::uint64_t bits = 0;
    int available = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (available == 0) {
        bits = gen();
        available = 64;
      }
      stat += bits & 1 ? -diff[i] : diff[i];
      bits >>= 1;
      --available;
    }
    stat = std::abs(stat / static_cast<double>(n));
    if (stat >= observed - 1e-12) ++hits;
  }
  result.p_value = (1.0 + static_cast<double>(hits)) /
                   (1.0 + static_cast<double>(iterations));
  return result;
}

double student_t_cdf(double t, double df) {
  if (df <= 0.0) throw ValidationError("student_t_cdf: df must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (p <= 0.0 || p >= 1.0) {
    throw ValidationError("student_t_quantile: p must be in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  // bisection; the cdf is monotone and cheap
  double lo = -1.0, hi = 1.0;
  while (student_t_cdf(lo, df) > p) lo *= 2.0;
  while (student_t_cdf(hi, df) < p) hi *= 2.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

StatResult t_test_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("t_test_two_sample: each sample needs >= 2 values");
  }
  const double mean_a = sample_mean(a);
  const double mean_b = sample_mean(b);
  const double var_a = sample_variance(a);
  const double var_b = sample_variance(b);
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());

  StatResult result;
  result.method = StatMethod::kTTwoSample;

  const double se2 = var_a / na + var_b / nb;
  if (se2 == 0.0) {
    // degenerate zero-variance samples
    if (mean_a == mean_b) {
      result.statistic = 0.0;
      result.p_value = 1.0;
    } else {
      result.statistic = mean_a > mean_b ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
      result.p_value = std::numeric_limits<double>::min();
    }
    return result;
  }

  const double t = (mean_a - mean_b) / std::sqrt(se2);
  const double df = se2 * se2 /
                    (var_a * var_a / (na * na * (na - 1.0)) +
                     var_b * var_b / (nb * nb * (nb - 1.0)));
  result.statistic = t;
  result.p_value = 2.0 * (1.0 - student_t_cdf(std::abs(t), df));
  if (result.p_value <= 0.0) result.p_value = std::numeric_limits<double>::min();
  if (result.p_value > 1.0) result.p_value = 1.0;
  return result;
}

std::vector<double> bonferroni(std::span<const double> pvals, int m) {
  if (m < 1) throw ValidationError("bonferroni: m must be >= 1");
  std::vector<double> adjusted;
  adjusted.reserve(pvals.size());
  for (double p : pvals) adjusted.push_back(std::min(1.0, p * static_cast<double>(m)));
  return adjusted;
}

MeanCi mean_ci(std::span<const double> values, double level) {
  if (values.size() < 2) throw ValidationError("mean_ci: need at least 2 values");
  if (level <= 0.0 || level >= 1.0) {
    throw ValidationError("mean_ci: level must be in (0, 1)");
  }
  const auto n = static_cast<double>(values.size());
  const double mean = sample_mean(values);
  const double sd = std::sqrt(sample_variance(values));
  const double t_crit = student_t_quantile(0.5 + level / 2.0, n - 1.0);
  const double half = t_crit * sd / std::sqrt(n);
  return {mean, mean - half, mean + half};
}

}  // namespace paraforge
