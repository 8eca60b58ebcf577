#ifndef PARAFORGE_CORPUS_HPP
#define PARAFORGE_CORPUS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "paraforge/generate.hpp"
#include "paraforge/selection.hpp"

namespace paraforge {

enum class Source { kArxiv, kWikipedia, kTheses, kOther };

const char* source_name(Source source);
Source source_from_name(std::string_view name);

// Document ids follow <doc>-<ORIG|SPUN>-<para>, e.g. "3747-ORIG-44".
struct DocId {
  std::string doc;
  bool spun = false;
  std::string para;

  static DocId parse(const std::string& id);
  std::string str() const;
  DocId counterpart() const;  // same coordinates, flipped kind
};

struct Document {
  std::string id;
  Source source = Source::kOther;
  std::string text;

  bool operator==(const Document& other) const = default;
};

enum class PairLabel { kMachine, kHuman };

struct AlignedPair {
  Document original;
  Document paraphrase;
  std::string generator;  // empty for human-paraphrase pairs
  PairLabel label = PairLabel::kMachine;
  MetricVector metrics;
};

struct CorpusSplit {
  std::vector<std::string> train, dev, test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
};

enum class IngestFormat { kJsonl, kPairedDirs };

// jsonl: one {"id","source","text"} object per line. paired-dirs: every .txt
// file below the path becomes a Document (id = file stem, source = nearest
// ancestor directory named arxiv/wikipedia/theses, else other). Duplicate ids
// and malformed records are errors naming the offending file/line.
std::vector<Document> ingest(const std::filesystem::path& path, IngestFormat format);

void save_documents(const std::filesystem::path& path,
                    const std::vector<Document>& documents);
void save_pairs(const std::filesystem::path& path,
                const std::vector<AlignedPair>& pairs);
std::vector<AlignedPair> load_pairs(const std::filesystem::path& path,
                                    const std::map<std::string, Document>& documents);

std::map<std::string, Document> index_documents(const std::vector<Document>& documents);

struct BuildOptions {
  GenParams gen;
  PromptSpec prompt;
  SelectionWeights weights;
  MetricOptions metrics;
  double max_error_rate = 0.0;
  int threads = 1;
};

struct BuildReport {
  std::vector<AlignedPair> pairs;                    // ordered by original id
  std::vector<std::pair<std::string, std::string>> errors;  // (id, message)
};

// Generates, scores, and selects one paraphrase per original. Per-document
// failures are collected; the run throws only when the failure rate exceeds
// max_error_rate. Output order is by document id regardless of thread count.
BuildReport build_pairs(const std::vector<Document>& originals, Backend& backend,
                        const BuildOptions& options, const EmbeddingTable& emb);

// Seeded Fisher-Yates shuffle, then largest-remainder cuts. Deterministic
// across platforms for a given (ids, ratios, seed).
CorpusSplit split_corpus(const std::vector<AlignedPair>& pairs,
                         std::array<double, 3> ratios, std::uint64_t seed);

}  // namespace paraforge

#endif
