#include "paraforge/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include <nlohmann/json.hpp>

#include "paraforge/errors.hpp"
#include "paraforge/metrics.hpp"

namespace paraforge {

namespace {

using nlohmann::json;

constexpr const char* kMachineKeyword = "machine-paraphrased";
constexpr const char* kOriginalKeyword = "original";

double gaussian_log_density(double x, double mean, double variance) {
  const double diff = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) -
         diff * diff / (2.0 * variance);
}

}  // namespace

const char* detect_label_name(DetectLabel label) {
  return label == DetectLabel::kMachine ? "machine" : "original";
}

DetectLabel detect_label_from_name(std::string_view name) {
  if (name == "machine") return DetectLabel::kMachine;
  if (name == "original") return DetectLabel::kOriginal;
  throw ValidationError("unknown prediction label: " + std::string(name));
}

FeatureVector embed_doc(const TokenSeq& doc, const EmbeddingTable& emb) {
  if (doc.empty()) throw EmptyInputError("embed_doc: empty document");
  FeatureVector feat;
  feat.values = Eigen::VectorXd::Zero(emb.dim());
  std::size_t in_vocab = 0;
  for (const std::string& token : doc.tokens) {
    if (const Eigen::VectorXd* vec = emb.find(token)) {
      feat.values += *vec;
      ++in_vocab;
    }
  }
  if (in_vocab == 0) {
    throw OovError("embed_doc: every token is out of vocabulary");
  }
  feat.values /= static_cast<double>(in_vocab);
  feat.oov_ratio = 1.0 - static_cast<double>(in_vocab) / static_cast<double>(doc.size());
  return feat;
}

NBModel train_nb(const std::vector<FeatureVector>& features,
                 const std::vector<DetectLabel>& labels, double variance_floor,
                 const std::string& embedding_digest) {
  if (features.size() != labels.size()) {
    throw ValidationError("train_nb: feature/label count mismatch");
  }
  if (variance_floor <= 0.0) {
    throw ValidationError("train_nb: variance_floor must be positive");
  }

  const Eigen::Index dim = features.empty() ? 0 : features.front().values.size();
  std::map<DetectLabel, std::vector<const FeatureVector*>> by_class;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].values.size() != dim) {
      throw ValidationError("train_nb: inconsistent feature dimension");
    }
    by_class[labels[i]].push_back(&features[i]);
  }
  for (DetectLabel label : {DetectLabel::kMachine, DetectLabel::kOriginal}) {
    if (by_class[label].size() < 2) {
      throw ValidationError(std::string("train_nb: class '") +
                            detect_label_name(label) + "' needs >= 2 examples");
    }
  }

  NBModel model;
  model.variance_floor = variance_floor;
  model.embedding_digest = embedding_digest;
  for (DetectLabel label : {DetectLabel::kMachine, DetectLabel::kOriginal}) {
    const auto& members = by_class[label];
    const auto n = static_cast<double>(members.size());
    NBClass cls;
    cls.label = label;
    cls.prior = n / static_cast<double>(features.size());
    cls.mean = Eigen::VectorXd::Zero(dim);
    for (const FeatureVector* f : members) cls.mean += f->values;
    cls.mean /= n;
    cls.variance = Eigen::VectorXd::Zero(dim);
    for (const FeatureVector* f : members) {
      cls.variance += (f->values - cls.mean).cwiseAbs2();
    }
    cls.variance /= n;
    cls.variance = cls.variance.cwiseMax(variance_floor);
    model.classes.push_back(std::move(cls));
  }
  return model;
}

Prediction nb_predict(const NBModel& model, const FeatureVector& feat) {
  if (model.classes.empty()) throw ValidationError("nb_predict: empty model");
  std::vector<double> log_posteriors;
  for (const NBClass& cls : model.classes) {
    if (cls.mean.size() != feat.values.size()) {
      throw ValidationError("nb_predict: feature dimension does not match model");
    }
    double lp = std::log(cls.prior);
    for (Eigen::Index d = 0; d < feat.values.size(); ++d) {
      lp += gaussian_log_density(feat.values[d], cls.mean[d], cls.variance[d]);
    }
    log_posteriors.push_back(lp);
  }

  std::size_t best = 0;
  bool tie = false;
  for (std::size_t i = 1; i < log_posteriors.size(); ++i) {
    if (log_posteriors[i] > log_posteriors[best]) {
      best = i;
      tie = false;
    } else if (log_posteriors[i] == log_posteriors[best]) {
      tie = true;
    }
  }
  // An exact tie is resolved away from accusation.
  if (tie) {
    for (std::size_t i = 0; i < model.classes.size(); ++i) {
      if (log_posteriors[i] == log_posteriors[best] &&
          model.classes[i].label == DetectLabel::kOriginal) {
        best = i;
      }
    }
  }

  const double max_lp = log_posteriors[best];
  double denom = 0.0;
  for (double lp : log_posteriors) denom += std::exp(lp - max_lp);
  Prediction pred;
  pred.label = model.classes[best].label;
  pred.confidence = 1.0 / denom;
  pred.detector = "nb";
  return pred;
}

void NBModel::save(const std::filesystem::path& path) const {
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "gaussian_nb";
  doc["variance_floor"] = variance_floor;
  doc["embedding_digest"] = embedding_digest;
  json class_array = json::array();
  for (const NBClass& cls : classes) {
    json entry;
    entry["label"] = detect_label_name(cls.label);
    entry["prior"] = cls.prior;
    entry["mean"] = std::vector<double>(cls.mean.data(), cls.mean.data() + cls.mean.size());
    entry["variance"] =
        std::vector<double>(cls.variance.data(), cls.variance.data() + cls.variance.size());
    class_array.push_back(std::move(entry));
  }
  doc["classes"] = std::move(class_array);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file: " + path.string());
  out << doc.dump(2) << "\n";
}

NBModel NBModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (doc.value("kind", "") != "gaussian_nb") {
    throw ValidationError(path.string() + ": not a gaussian_nb model file");
  }
  NBModel model;
  model.variance_floor = doc.at("variance_floor").get<double>();
  model.embedding_digest = doc.value("embedding_digest", "");
  for (const json& entry : doc.at("classes")) {
    NBClass cls;
    cls.label = detect_label_from_name(entry.at("label").get<std::string>());
    cls.prior = entry.at("prior").get<double>();
    const auto mean = entry.at("mean").get<std::vector<double>>();
    const auto variance = entry.at("variance").get<std::vector<double>>();
    if (mean.size() != variance.size()) {
      throw ValidationError(path.string() + ": mean/variance length mismatch");
    }
    cls.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                 static_cast<Eigen::Index>(mean.size()));
    cls.variance = Eigen::Map<const Eigen::VectorXd>(
        variance.data(), static_cast<Eigen::Index>(variance.size()));
    model.classes.push_back(std::move(cls));
  }
  return model;
}

TextMatchResult textmatch_detect(const TokenSeq& doc,
                                 const std::vector<TokenSeq>& reference_index,
                                 double threshold, int n) {
  if (reference_index.empty()) {
    throw ValidationError("textmatch_detect: empty reference index");
  }
  double best = 0.0;
  for (const TokenSeq& ref : reference_index) {
    best = std::max(best, text_match(doc, ref, n).value);
  }
  TextMatchResult result;
  result.best_score = best;
  result.prediction.detector = "text-match";
  if (best > threshold) {
    result.prediction.label = DetectLabel::kOriginal;
    result.prediction.confidence = std::clamp(best, 0.5, 1.0);
  } else {
    result.prediction.label = DetectLabel::kMachine;
    result.prediction.confidence = std::clamp(1.0 - best, 0.5, 1.0);
  }
  return result;
}

Prediction fewshot_detect(Backend& backend, const std::string& doc,
                          const std::vector<LabeledExample>& examples) {
  bool has_machine = false, has_original = false;
  for (const LabeledExample& ex : examples) {
    (ex.label == DetectLabel::kMachine ? has_machine : has_original) = true;
  }
  if (!has_machine || !has_original) {
    throw ValidationError("fewshot_detect: examples must cover both labels");
  }

  std::string prompt =
      "Decide whether the text is machine-paraphrased or original.\n\n";
  for (const LabeledExample& ex : examples) {
    prompt += "Text: " + ex.text + "\nLabel: ";
    prompt += ex.label == DetectLabel::kMachine ? kMachineKeyword : kOriginalKeyword;
    prompt += "\n\n";
  }
  prompt += "Text: " + doc + "\nLabel:";

  CompletionParams params;
  params.temperature = 0.0;
  const std::string completion = backend.complete(prompt, 8, params);

  const std::size_t machine_at = completion.find(kMachineKeyword);
  const std::size_t original_at = completion.find(kOriginalKeyword);
  Prediction pred;
  pred.detector = "few-shot:" + backend.identity();
  pred.confidence = 1.0;
  if (machine_at == std::string::npos && original_at == std::string::npos) {
    throw UnparseableCompletionError(
        "few-shot completion contains neither label keyword: " +
        completion.substr(0, 120));
  }
  pred.label = machine_at < original_at ? DetectLabel::kMachine : DetectLabel::kOriginal;
  return pred;
}

MultinomialNBModel train_multinomial_nb(const std::vector<TokenSeq>& docs,
                                        const std::vector<DetectLabel>& labels,
                                        int order, double alpha) {
  if (docs.size() != labels.size()) {
    throw ValidationError("train_multinomial_nb: doc/label count mismatch");
  }
  if (order < 1) throw ValidationError("train_multinomial_nb: order must be >= 1");

  auto ngrams_of = [order](const TokenSeq& doc) {
    std::vector<std::string> grams;
    if (doc.size() < static_cast<std::size_t>(order)) return grams;
    for (std::size_t i = 0; i + order <= doc.size(); ++i) {
      std::string joined = doc.tokens[i];
      for (int k = 1; k < order; ++k) joined += ' ' + doc.tokens[i + k];
      grams.push_back(std::move(joined));
    }
    return grams;
  };

  std::map<std::string, std::size_t> vocab_index;
  std::vector<std::vector<std::string>> doc_grams(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    doc_grams[i] = ngrams_of(docs[i]);
    for (const std::string& g : doc_grams[i]) vocab_index.emplace(g, 0);
  }
  std::size_t next = 0;
  for (auto& [gram, index] : vocab_index) index = next++;

  MultinomialNBModel model;
  model.order = order;
  model.alpha = alpha;
  model.vocabulary.resize(vocab_index.size());
  for (const auto& [gram, index] : vocab_index) model.vocabulary[index] = gram;

  for (DetectLabel label : {DetectLabel::kMachine, DetectLabel::kOriginal}) {
    std::vector<double> counts(vocab_index.size(), 0.0);
    double total = 0.0;
    std::size_t members = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (labels[i] != label) continue;
      ++members;
      for (const std::string& g : doc_grams[i]) {
        counts[vocab_index[g]] += 1.0;
        total += 1.0;
      }
    }
    if (members < 2) {
      throw ValidationError(std::string("train_multinomial_nb: class '") +
                            detect_label_name(label) + "' needs >= 2 examples");
    }
    const double denom = total + alpha * static_cast<double>(vocab_index.size());
    std::vector<double> log_likelihood(vocab_index.size());
    for (std::size_t v = 0; v < counts.size(); ++v) {
      log_likelihood[v] = std::log((counts[v] + alpha) / denom);
    }
    model.class_labels.push_back(label);
    model.log_priors.push_back(
        std::log(static_cast<double>(members) / static_cast<double>(docs.size())));
    model.log_likelihoods.push_back(std::move(log_likelihood));
  }
  return model;
}

void save_multinomial_nb(const MultinomialNBModel& model,
                         const std::filesystem::path& path) {
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "multinomial_nb";
  doc["order"] = model.order;
  doc["alpha"] = model.alpha;
  doc["vocabulary"] = model.vocabulary;
  json class_array = json::array();
  for (std::size_t c = 0; c < model.class_labels.size(); ++c) {
    class_array.push_back({{"label", detect_label_name(model.class_labels[c])},
                           {"log_prior", model.log_priors[c]},
                           {"log_likelihood", model.log_likelihoods[c]}});
  }
  doc["classes"] = std::move(class_array);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file: " + path.string());
  out << doc.dump() << "\n";
}

MultinomialNBModel load_multinomial_nb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (doc.value("kind", "") != "multinomial_nb") {
    throw ValidationError(path.string() + ": not a multinomial_nb model file");
  }
  MultinomialNBModel model;
  model.order = doc.at("order").get<int>();
  model.alpha = doc.at("alpha").get<double>();
  model.vocabulary = doc.at("vocabulary").get<std::vector<std::string>>();
  for (const json& entry : doc.at("classes")) {
    model.class_labels.push_back(
        detect_label_from_name(entry.at("label").get<std::string>()));
    model.log_priors.push_back(entry.at("log_prior").get<double>());
    model.log_likelihoods.push_back(
        entry.at("log_likelihood").get<std::vector<double>>());
    if (model.log_likelihoods.back().size() != model.vocabulary.size()) {
      throw ValidationError(path.string() + ": likelihood/vocabulary size mismatch");
    }
  }
  return model;
}

Prediction multinomial_nb_predict(const MultinomialNBModel& model, const TokenSeq& doc) {
  std::map<std::string, std::size_t> vocab_index;
  for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
    vocab_index.emplace(model.vocabulary[i], i);
  }

  std::vector<double> scores = model.log_priors;
  if (doc.size() >= static_cast<std::size_t>(model.order)) {
    for (std::size_t i = 0; i + model.order <= doc.size(); ++i) {
      std::string joined = doc.tokens[i];
      for (int k = 1; k < model.order; ++k) joined += ' ' + doc.tokens[i + k];
      auto it = vocab_index.find(joined);
      if (it == vocab_index.end()) continue;  // unseen n-grams carry no signal
      for (std::size_t c = 0; c < scores.size(); ++c) {
        scores[c] += model.log_likelihoods[c][it->second];
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  if (scores.size() == 2 && scores[0] == scores[1]) {
    best = model.class_labels[0] == DetectLabel::kOriginal ? 0 : 1;
  }
  const double max_score = scores[best];
  double denom = 0.0;
  for (double s : scores) denom += std::exp(s - max_score);
  Prediction pred;
  pred.label = model.class_labels[best];
  pred.confidence = 1.0 / denom;
  pred.detector = "nb-multinomial";
  return pred;
}

}  // namespace paraforge
