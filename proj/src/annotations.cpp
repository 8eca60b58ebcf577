#include "paraforge/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "paraforge/errors.hpp"
#include "paraforge/evaluation.hpp"
#include "paraforge/metrics.hpp"

namespace paraforge {

namespace {

using nlohmann::json;

constexpr const char* kOriginalSystem = "original";

bool is_correct(const AnnotationRecord& record) {
  const bool item_is_original = record.system == kOriginalSystem;
  return (record.answer == Answer::kOriginal && item_is_original) ||
         (record.answer == Answer::kMachine && !item_is_original);
}

}  // namespace

const char* answer_name(Answer answer) {
  switch (answer) {
    case Answer::kMachine: return "machine";
    case Answer::kOriginal: return "original";
    case Answer::kDontKnow: return "dont_know";
  }
  return "dont_know";
}

Answer answer_from_name(std::string_view name) {
  if (name == "machine") return Answer::kMachine;
  if (name == "original") return Answer::kOriginal;
  if (name == "dont_know") return Answer::kDontKnow;
  throw ValidationError("unknown answer: " + std::string(name));
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open annotation file: " + path.string());
  std::vector<AnnotationRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    static const std::set<std::string> kKnown = {
        "participant_id", "item_id", "system",   "answer",
        "likert",         "justification", "duration_minutes", "demographics"};
    for (const auto& [key, value] : record.items()) {
      (void)value;
      if (!kKnown.count(key)) {
        throw ValidationError(where + ": unknown annotation field '" + key + "'");
      }
    }
    AnnotationRecord out;
    out.participant_id = record.at("participant_id").get<std::string>();
    out.item_id = record.at("item_id").get<std::string>();
    out.system = record.at("system").get<std::string>();
    const bool has_answer = record.contains("answer");
    const bool has_likert = record.contains("likert");
    if (has_answer == has_likert) {
      throw ValidationError(where + ": exactly one of answer/likert must be present");
    }
    if (has_answer) {
      out.answer = answer_from_name(record["answer"].get<std::string>());
    } else {
      const json& lk = record["likert"];
      Likert likert;
      likert.clarity = lk.at("clarity").get<int>();
      likert.fluency = lk.at("fluency").get<int>();
      likert.coherence = lk.at("coherence").get<int>();
      for (int v : {likert.clarity, likert.fluency, likert.coherence}) {
        if (v < 1 || v > 5) {
          throw ValidationError(where + ": likert values must be integers in [1, 5]");
        }
      }
      out.likert = likert;
    }
    out.justification = record.value("justification", "");
    out.duration_minutes = record.value("duration_minutes", 0.0);
    if (record.contains("demographics")) {
      for (const auto& [key, value] : record["demographics"].items()) {
        out.demographics[key] =
            value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    records.push_back(std::move(out));
  }
  return records;
}

void save_annotations(const std::filesystem::path& path,
                      const std::vector<AnnotationRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const AnnotationRecord& record : records) {
    json doc;
    doc["participant_id"] = record.participant_id;
    doc["item_id"] = record.item_id;
    doc["system"] = record.system;
    if (record.answer) {
      doc["answer"] = answer_name(*record.answer);
    } else if (record.likert) {
      doc["likert"] = {{"clarity", record.likert->clarity},
                       {"fluency", record.likert->fluency},
                       {"coherence", record.likert->coherence}};
    }
    if (!record.justification.empty()) doc["justification"] = record.justification;
    doc["duration_minutes"] = record.duration_minutes;
    if (!record.demographics.empty()) doc["demographics"] = record.demographics;
    out << doc.dump() << "\n";
  }
}

FilterResult filter_assessments(const std::vector<AnnotationRecord>& records,
                                const std::map<std::string, std::string>& task_text_by_item,
                                const FilterOptions& options) {
  FilterResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const AnnotationRecord& record = records[i];
    if (!record.answer) {  // quality ratings carry no free-text rationale
      result.kept.push_back(record);
      continue;
    }
    const TokenSeq just =
        tokenize(record.justification, Scheme::kWhitespaceLowerNoPunct);
    if (just.size() < static_cast<std::size_t>(options.min_justification_tokens)) {
      result.rejected.push_back({i, record.participant_id, record.item_id, "too-short"});
      continue;
    }
    auto task = task_text_by_item.find(record.item_id);
    if (task != task_text_by_item.end() &&
        just.size() >= static_cast<std::size_t>(options.match_ngram)) {
      const TokenSeq task_tokens =
          tokenize(task->second, Scheme::kWhitespaceLowerNoPunct);
      if (!task_tokens.empty()) {
        const double match =
            text_match(just, task_tokens, options.match_ngram).value;
        if (match > options.copied_match_threshold) {
          result.rejected.push_back(
              {i, record.participant_id, record.item_id, "copied-text"});
          continue;
        }
      }
    }
    result.kept.push_back(record);
  }
  return result;
}

ParticipantAccuracy participant_accuracy(const std::vector<AnnotationRecord>& records) {
  struct Tally {
    std::size_t correct = 0, non_neutral = 0, dont_know = 0, total = 0;
  };
  std::map<std::string, Tally> tallies;
  for (const AnnotationRecord& record : records) {
    if (!record.answer) continue;
    Tally& tally = tallies[record.participant_id];
    ++tally.total;
    if (*record.answer == Answer::kDontKnow) {
      ++tally.dont_know;
      continue;
    }
    ++tally.non_neutral;
    if (is_correct(record)) ++tally.correct;
  }

  ParticipantAccuracy out;
  for (const auto& [participant, tally] : tallies) {
    if (tally.non_neutral == 0) {
      out.excluded.push_back(participant);
      continue;
    }
    ParticipantStats stats;
    stats.accuracy =
        static_cast<double>(tally.correct) / static_cast<double>(tally.non_neutral);
    stats.dont_know_ratio =
        static_cast<double>(tally.dont_know) / static_cast<double>(tally.total);
    stats.n_non_neutral = tally.non_neutral;
    stats.n_answers = tally.total;
    out.by_participant.emplace(participant, stats);
  }
  return out;
}

AgreementResult fleiss_kappa(const std::vector<std::vector<std::uint64_t>>& matrix) {
  if (matrix.empty()) throw ValidationError("fleiss_kappa: empty matrix");
  const std::size_t categories = matrix.front().size();
  if (categories == 0) throw ValidationError("fleiss_kappa: no categories");

  std::uint64_t raters = 0;
  for (const auto& row : matrix) {
    if (row.size() != categories) {
      throw ValidationError("fleiss_kappa: ragged matrix");
    }
    std::uint64_t row_sum = 0;
    for (std::uint64_t c : row) row_sum += c;
    if (raters == 0) raters = row_sum;
    if (row_sum != raters) {
      throw ValidationError("fleiss_kappa: unequal rater counts per item");
    }
  }
  if (raters < 2) throw ValidationError("fleiss_kappa: need >= 2 raters per item");

  const auto n_items = static_cast<double>(matrix.size());
  const auto n = static_cast<double>(raters);

  double p_bar = 0.0;
  std::vector<double> category_share(categories, 0.0);
  for (const auto& row : matrix) {
    double agree = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      const auto count = static_cast<double>(row[j]);
      agree += count * count;
      category_share[j] += count;
    }
    p_bar += (agree - n) / (n * (n - 1.0));
  }
  p_bar /= n_items;

  double p_expected = 0.0;
  for (double share : category_share) {
    const double p = share / (n_items * n);
    p_expected += p * p;
  }

  AgreementResult result;
  result.n_items = matrix.size();
  result.n_raters_per_item = raters;
  result.kappa =
      p_expected >= 1.0 ? 1.0 : (p_bar - p_expected) / (1.0 - p_expected);
  return result;
}

std::map<std::string, LikertRow> likert_summary(
    const std::vector<AnnotationRecord>& records) {
  std::map<std::string, std::vector<Likert>> by_system;
  for (const AnnotationRecord& record : records) {
    if (record.likert) by_system[record.system].push_back(*record.likert);
  }
  std::map<std::string, LikertRow> out;
  for (const auto& [system, ratings] : by_system) {
    LikertRow row;
    row.n = ratings.size();
    const auto n = static_cast<double>(ratings.size());
    for (std::size_t dim = 0; dim < 3; ++dim) {
      auto value = [dim](const Likert& l) {
        return static_cast<double>(dim == 0 ? l.clarity : dim == 1 ? l.fluency
                                                                   : l.coherence);
      };
      double sum = 0.0;
      for (const Likert& l : ratings) sum += value(l);
      row.mean[dim] = sum / n;
      if (ratings.size() > 1) {
        double sq = 0.0;
        for (const Likert& l : ratings) {
          sq += (value(l) - row.mean[dim]) * (value(l) - row.mean[dim]);
        }
        row.stddev[dim] = std::sqrt(sq / (n - 1.0));
      }
    }
    out.emplace(system, row);
  }
  return out;
}

std::vector<std::string> duration_outliers(const std::vector<AnnotationRecord>& records,
                                           double k_sigma) {
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const AnnotationRecord& record : records) {
    auto& [sum, count] = sums[record.participant_id];
    sum += record.duration_minutes;
    ++count;
  }
  if (sums.size() < 2) {
    throw ValidationError("duration_outliers: need >= 2 participants");
  }

  std::vector<std::pair<std::string, double>> durations;
  for (const auto& [participant, entry] : sums) {
    durations.emplace_back(participant, entry.first / static_cast<double>(entry.second));
  }
  const auto n = static_cast<double>(durations.size());
  double mu = 0.0;
  for (const auto& [participant, d] : durations) mu += d;
  mu /= n;
  double var = 0.0;
  for (const auto& [participant, d] : durations) var += (d - mu) * (d - mu);
  var /= n;  // population variance
  const double sigma = std::sqrt(var);

  std::vector<std::string> flagged;
  for (const auto& [participant, d] : durations) {
    if (d < mu - k_sigma * sigma || d > mu + k_sigma * sigma) {
      flagged.push_back(participant);
    }
  }
  return flagged;
}

SimilarityTriangle similarity_triangle(const std::vector<std::string>& originals,
                                       const std::vector<std::string>& human_paras,
                                       const std::vector<std::string>& machine_paras,
                                       const EmbeddingTable& emb) {
  if (originals.size() != human_paras.size() ||
      originals.size() != machine_paras.size()) {
    throw ValidationError("similarity_triangle: misaligned triple lists");
  }
  if (originals.empty()) throw ValidationError("similarity_triangle: no triples");

  auto mean_sem = [&emb](const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const TokenSeq ta = tokenize(a[i], Scheme::kWhitespaceLowerNoPunct);
      const TokenSeq tb = tokenize(b[i], Scheme::kWhitespaceLowerNoPunct);
      sum += sem_match(ta, tb, emb).value;
    }
    return sum / static_cast<double>(a.size());
  };

  SimilarityTriangle triangle;
  triangle.human_vs_original = mean_sem(human_paras, originals);
  triangle.machine_vs_original = mean_sem(machine_paras, originals);
  triangle.human_vs_machine = mean_sem(human_paras, machine_paras);
  return triangle;
}

std::vector<SystemReport> analyze_classification(
    const std::vector<AnnotationRecord>& records, const std::string& control_system,
    double ci_level) {
  // per-system, per-participant accuracy over non-neutral answers
  struct Tally {
    std::size_t correct = 0, non_neutral = 0, dont_know = 0, total = 0;
  };
  std::map<std::string, std::map<std::string, Tally>> by_system;
  for (const AnnotationRecord& record : records) {
    if (!record.answer) continue;
    Tally& tally = by_system[record.system][record.participant_id];
    ++tally.total;
    if (*record.answer == Answer::kDontKnow) {
      ++tally.dont_know;
    } else {
      ++tally.non_neutral;
      if (is_correct(record)) ++tally.correct;
    }
  }
  if (by_system.empty()) {
    throw ValidationError("analyze_classification: no classification records");
  }
  if (!by_system.count(control_system)) {
    throw ValidationError("analyze_classification: control system '" +
                          control_system + "' has no records");
  }

  std::map<std::string, std::vector<double>> accuracies;
  std::map<std::string, std::pair<std::size_t, std::size_t>> dont_know;  // (dk, total)
  for (const auto& [system, participants] : by_system) {
    for (const auto& [participant, tally] : participants) {
      if (tally.non_neutral > 0) {
        accuracies[system].push_back(static_cast<double>(tally.correct) /
                                     static_cast<double>(tally.non_neutral));
      }
      dont_know[system].first += tally.dont_know;
      dont_know[system].second += tally.total;
    }
  }

  const std::vector<double>& control = accuracies[control_system];
  const int m = static_cast<int>(accuracies.size()) - 1;  // comparisons vs control

  std::vector<SystemReport> reports;
  for (const auto& [system, values] : accuracies) {
    SystemReport report;
    report.system = system;
    report.n_participants = values.size();
    report.mean_accuracy = sample_mean(values);
    if (values.size() >= 2) {
      const MeanCi ci = mean_ci(values, ci_level);
      report.ci_lo = ci.lo;
      report.ci_hi = ci.hi;
    } else {
      report.ci_lo = report.ci_hi = report.mean_accuracy;
    }
    report.dont_know_ratio =
        dont_know[system].second == 0
            ? 0.0
            : static_cast<double>(dont_know[system].first) /
                  static_cast<double>(dont_know[system].second);
    if (system != control_system && control.size() >= 2 && values.size() >= 2) {
      const StatResult t = t_test_two_sample(values, control);
      report.t_vs_control = t.statistic;
      report.p_vs_control = t.p_value;
      report.p_bonferroni = std::min(1.0, t.p_value * std::max(1, m));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

DemographicsSummary demographics_summary(const std::vector<AnnotationRecord>& records) {
  DemographicsSummary summary;
  std::map<std::string, std::map<std::string, std::string>> per_participant;
  for (const AnnotationRecord& record : records) {
    for (const auto& [key, value] : record.demographics) {
      per_participant[record.participant_id][key] = value;
    }
  }
  std::map<std::string, std::vector<double>> numeric_values;
  std::set<std::string> non_numeric;
  for (const auto& [participant, fields] : per_participant) {
    for (const auto& [key, value] : fields) {
      ++summary.value_counts[key][value];
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) {
          numeric_values[key].push_back(v);
        } else {
          non_numeric.insert(key);
        }
      } catch (const std::exception&) {
        non_numeric.insert(key);
      }
    }
  }
  for (const auto& [key, values] : numeric_values) {
    if (non_numeric.count(key) || values.empty()) continue;
    double mean = 0.0, lo = values.front(), hi = values.front();
    for (double v : values) {
      mean += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    summary.numeric[key] = {mean / static_cast<double>(values.size()), lo, hi};
  }
  return summary;
}

}  // namespace paraforge
