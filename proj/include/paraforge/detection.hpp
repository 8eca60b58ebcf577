#ifndef PARAFORGE_DETECTION_HPP
#define PARAFORGE_DETECTION_HPP

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "paraforge/backend.hpp"
#include "paraforge/embedding.hpp"
#include "paraforge/tokenize.hpp"

namespace paraforge {

enum class DetectLabel { kMachine, kOriginal };

const char* detect_label_name(DetectLabel label);
DetectLabel detect_label_from_name(std::string_view name);

struct Prediction {
  DetectLabel label = DetectLabel::kOriginal;
  double confidence = 0.5;  // posterior (or calibrated proxy) of the label
  std::string detector;
};

struct FeatureVector {
  Eigen::VectorXd values;
  double oov_ratio = 0.0;
};

// Mean pooling of in-vocabulary token vectors; throws OovError when nothing
// is in vocabulary.
FeatureVector embed_doc(const TokenSeq& doc, const EmbeddingTable& emb);

struct NBClass {
  DetectLabel label = DetectLabel::kMachine;
  double prior = 0.5;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

struct NBModel {
  std::vector<NBClass> classes;
  double variance_floor = 1e-9;
  std::string embedding_digest;

  void save(const std::filesystem::path& path) const;
  static NBModel load(const std::filesystem::path& path);
};

// Per-dimension Gaussian fit with floored (population) variances. Requires at
// least two examples of each class.
NBModel train_nb(const std::vector<FeatureVector>& features,
                 const std::vector<DetectLabel>& labels,
                 double variance_floor = 1e-9,
                 const std::string& embedding_digest = "");

// argmax of log prior + sum of per-dimension Gaussian log densities.
// Exact posterior ties go to kOriginal with confidence 0.5.
Prediction nb_predict(const NBModel& model, const FeatureVector& feat);

struct TextMatchResult {
  Prediction prediction;
  double best_score = 0.0;
};

// Max containment of the doc against a reference index. A high match means a
// known source was reused verbatim, which under the aligned-pair protocol is
// evidence the doc is NOT a machine paraphrase: label kOriginal iff
// best_score > threshold.
TextMatchResult textmatch_detect(const TokenSeq& doc,
                                 const std::vector<TokenSeq>& reference_index,
                                 double threshold = 0.5, int n = 3);

struct LabeledExample {
  std::string text;
  DetectLabel label = DetectLabel::kOriginal;
};

// Few-shot classification prompt against a completion backend; the first
// label keyword in the completion wins. Confidence is an uncalibrated 1.0.
// Throws UnparseableCompletionError when no keyword appears.
Prediction fewshot_detect(Backend& backend, const std::string& doc,
                          const std::vector<LabeledExample>& examples);

// Multinomial alternative over n-gram counts, for ablations.
struct MultinomialNBModel {
  int order = 1;
  double alpha = 1.0;
  std::vector<std::string> vocabulary;  // joined n-grams, sorted
  std::vector<DetectLabel> class_labels;
  std::vector<double> log_priors;
  std::vector<std::vector<double>> log_likelihoods;  // [class][vocab index]
};

MultinomialNBModel train_multinomial_nb(const std::vector<TokenSeq>& docs,
                                        const std::vector<DetectLabel>& labels,
                                        int order = 1, double alpha = 1.0);
Prediction multinomial_nb_predict(const MultinomialNBModel& model, const TokenSeq& doc);

void save_multinomial_nb(const MultinomialNBModel& model,
                         const std::filesystem::path& path);
MultinomialNBModel load_multinomial_nb(const std::filesystem::path& path);

}  // namespace paraforge

#endif
