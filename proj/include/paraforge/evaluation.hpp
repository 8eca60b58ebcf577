#ifndef PARAFORGE_EVALUATION_HPP
#define PARAFORGE_EVALUATION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "paraforge/detection.hpp"

namespace paraforge {

// Binary confusion over {machine, original}; counts[true][pred].
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, 2>, 2> counts{};

  void add(DetectLabel truth, DetectLabel pred) {
    ++counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
  }
  std::uint64_t total() const;
};

// Unweighted mean of per-class F1; a class with zero support contributes 0.
double f1_macro(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);

enum class StatMethod { kTTwoSample, kPermutation };

struct StatResult {
  double statistic = 0.0;
  double p_value = 1.0;
  StatMethod method = StatMethod::kPermutation;
  std::optional<double> corrected;  // Bonferroni-adjusted, min(1, m*p)
};

enum class PermMode { kAuto, kMonteCarlo, kExact };

// Paired sign-flip permutation test on the mean difference, two-sided.
// Exact enumeration over all 2^n sign patterns is used automatically when
// n <= 20; Monte-Carlo p is (1 + hits) / (1 + iterations).
StatResult permutation_test(std::span<const double> a, std::span<const double> b,
                            int iterations = 10000, std::uint64_t seed = 0,
                            PermMode mode = PermMode::kAuto);

// Welch two-sided t-test. Two identical zero-variance samples give p = 1 by
// convention.
StatResult t_test_two_sample(std::span<const double> a, std::span<const double> b);

std::vector<double> bonferroni(std::span<const double> pvals, int m);

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// t-distribution confidence interval around the sample mean.
MeanCi mean_ci(std::span<const double> values, double level = 0.95);

double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);

double sample_mean(std::span<const double> values);
double sample_variance(std::span<const double> values);  // n-1 denominator

}  // namespace paraforge

#endif
