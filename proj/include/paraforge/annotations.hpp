#ifndef PARAFORGE_ANNOTATIONS_HPP
#define PARAFORGE_ANNOTATIONS_HPP

#include <array>
#include <filesystem>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paraforge/embedding.hpp"

namespace paraforge {

enum class Answer { kMachine, kOriginal, kDontKnow };

const char* answer_name(Answer answer);
Answer answer_from_name(std::string_view name);

struct Likert {
  int clarity = 0;
  int fluency = 0;
  int coherence = 0;
};

// One human assessment: either a classification answer or a Likert triple,
// never both. `system` names the paraphraser that produced the item, or
// "original" for untouched text.
struct AnnotationRecord {
  std::string participant_id;
  std::string item_id;
  std::string system;
  std::optional<Answer> answer;
  std::optional<Likert> likert;
  std::string justification;
  double duration_minutes = 0.0;
  std::map<std::string, std::string> demographics;
};

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path,
                      const std::vector<AnnotationRecord>& records);

struct FilterOptions {
  double copied_match_threshold = 0.9;
  int min_justification_tokens = 3;
  int match_ngram = 3;
};

struct Rejection {
  std::size_t record_index = 0;
  std::string participant_id;
  std::string item_id;
  std::string reason;  // "copied-text" or "too-short"
};

struct FilterResult {
  std::vector<AnnotationRecord> kept;
  std::vector<Rejection> rejected;
};

// Drops classification records whose justification is a near-copy of the task
// text or too short to be interpretable. Likert records pass through.
FilterResult filter_assessments(const std::vector<AnnotationRecord>& records,
                                const std::map<std::string, std::string>& task_text_by_item,
                                const FilterOptions& options = {});

struct ParticipantStats {
  double accuracy = 0.0;         // over non-neutral answers
  double dont_know_ratio = 0.0;  // over all answers
  std::size_t n_non_neutral = 0;
  std::size_t n_answers = 0;
};

struct ParticipantAccuracy {
  std::map<std::string, ParticipantStats> by_participant;
  std::vector<std::string> excluded;  // participants with no non-neutral answer
};

// A classification is correct when it matches the item's provenance: answer
// kOriginal on system == "original", answer kMachine otherwise.
ParticipantAccuracy participant_accuracy(const std::vector<AnnotationRecord>& records);

struct AgreementResult {
  double kappa = 0.0;
  std::size_t n_items = 0;
  std::size_t n_raters_per_item = 0;
};

// Standard Fleiss kappa over an items-by-categories count matrix. Every row
// must sum to the same rater count n >= 2. When chance agreement is 1 (all
// ratings in a single category) kappa is defined as 1.
AgreementResult fleiss_kappa(const std::vector<std::vector<std::uint64_t>>& matrix);

struct LikertRow {
  std::size_t n = 0;
  std::array<double, 3> mean{};    // clarity, fluency, coherence
  std::array<double, 3> stddev{};  // sample std; 0 for n == 1 (flagged via n)
};

std::map<std::string, LikertRow> likert_summary(
    const std::vector<AnnotationRecord>& records);

// Participants whose mean duration falls outside mu +/- k*sigma (population
// sigma over per-participant durations).
std::vector<std::string> duration_outliers(const std::vector<AnnotationRecord>& records,
                                           double k_sigma = 2.0);

struct SimilarityTriangle {
  double human_vs_original = 0.0;
  double machine_vs_original = 0.0;
  double human_vs_machine = 0.0;
};

SimilarityTriangle similarity_triangle(const std::vector<std::string>& originals,
                                       const std::vector<std::string>& human_paras,
                                       const std::vector<std::string>& machine_paras,
                                       const EmbeddingTable& emb);

struct SystemReport {
  std::string system;
  double mean_accuracy = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::optional<double> t_vs_control;
  std::optional<double> p_vs_control;
  std::optional<double> p_bonferroni;
  double dont_know_ratio = 0.0;
  std::size_t n_participants = 0;
};

// Per-system mean participant accuracy with confidence intervals and
// Bonferroni-corrected Welch t-tests against the control system.
std::vector<SystemReport> analyze_classification(
    const std::vector<AnnotationRecord>& records, const std::string& control_system,
    double ci_level = 0.95);

struct DemographicsSummary {
  std::map<std::string, std::map<std::string, std::size_t>> value_counts;
  // keys whose values all parse as numbers additionally get (mean, min, max)
  std::map<std::string, std::array<double, 3>> numeric;
};

DemographicsSummary demographics_summary(const std::vector<AnnotationRecord>& records);

}  // namespace paraforge

#endif
