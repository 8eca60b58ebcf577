#include "paraforge/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "paraforge/errors.hpp"

namespace paraforge {

namespace {

using nlohmann::json;

std::uint64_t bounded_draw(std::mt19937_64& gen, std::uint64_t n) {
  // modulo-rejection; avoids implementation-defined distribution objects
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % n;
}

Document document_from_json(const json& record, const std::string& where) {
  for (const auto& [key, value] : record.items()) {
    (void)value;
    if (key != "id" && key != "source" && key != "text") {
      throw ValidationError(where + ": unknown document field '" + key + "'");
    }
  }
  if (!record.contains("id") || !record.contains("source") || !record.contains("text")) {
    throw ValidationError(where + ": document needs fields id, source, text");
  }
  Document doc;
  doc.id = record["id"].get<std::string>();
  doc.source = source_from_name(record["source"].get<std::string>());
  doc.text = record["text"].get<std::string>();
  if (doc.text.empty()) throw ValidationError(where + ": empty text for id " + doc.id);
  return doc;
}

json document_to_json(const Document& doc) {
  return json{{"id", doc.id}, {"source", source_name(doc.source)}, {"text", doc.text}};
}

}  // namespace

const char* source_name(Source source) {
  switch (source) {
    case Source::kArxiv: return "arxiv";
    case Source::kWikipedia: return "wikipedia";
    case Source::kTheses: return "theses";
    case Source::kOther: return "other";
  }
  return "other";
}

Source source_from_name(std::string_view name) {
  if (name == "arxiv") return Source::kArxiv;
  if (name == "wikipedia") return Source::kWikipedia;
  if (name == "theses") return Source::kTheses;
  if (name == "other") return Source::kOther;
  throw ValidationError("unknown source: " + std::string(name));
}

DocId DocId::parse(const std::string& id) {
  const std::size_t orig = id.find("-ORIG-");
  const std::size_t spun = id.find("-SPUN-");
  if ((orig == std::string::npos) == (spun == std::string::npos)) {
    throw ValidationError("document id must match <doc>-<ORIG|SPUN>-<para>: " + id);
  }
  DocId out;
  out.spun = spun != std::string::npos;
  const std::size_t mark = out.spun ? spun : orig;
  out.doc = id.substr(0, mark);
  out.para = id.substr(mark + 6);
  if (out.doc.empty() || out.para.empty()) {
    throw ValidationError("document id must match <doc>-<ORIG|SPUN>-<para>: " + id);
  }
  return out;
}

std::string DocId::str() const {
  return doc + (spun ? "-SPUN-" : "-ORIG-") + para;
}

DocId DocId::counterpart() const {
  DocId other = *this;
  other.spun = !other.spun;
  return other;
}

std::vector<Document> ingest(const std::filesystem::path& path, IngestFormat format) {
  std::vector<Document> documents;
  std::set<std::string> seen;

  auto add = [&](Document doc, const std::string& where) {
    if (!seen.insert(doc.id).second) {
      throw ValidationError(where + ": duplicate document id " + doc.id);
    }
    DocId::parse(doc.id);  // id shape check
    documents.push_back(std::move(doc));
  };

  if (format == IngestFormat::kJsonl) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus file: " + path.string());
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
      add(document_from_json(record, where), where);
    }
    return documents;
  }

  // paired-dirs
  if (!std::filesystem::is_directory(path)) {
    throw ValidationError("paired-dirs ingest expects a directory: " + path.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    Document doc;
    doc.id = file.stem().string();
    doc.source = Source::kOther;
    for (auto dir = file.parent_path(); !dir.empty(); dir = dir.parent_path()) {
      const std::string name = dir.filename().string();
      if (name == "arxiv" || name == "wikipedia" || name == "theses") {
        doc.source = source_from_name(name);
        break;
      }
      if (dir == path) break;
    }
    std::ifstream in(file, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    doc.text = text.str();
    while (!doc.text.empty() && (doc.text.back() == '\n' || doc.text.back() == '\r')) {
      doc.text.pop_back();
    }
    if (doc.text.empty()) {
      throw ValidationError(file.string() + ": empty document");
    }
    add(std::move(doc), file.string());
  }
  return documents;
}

void save_documents(const std::filesystem::path& path,
                    const std::vector<Document>& documents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const Document& doc : documents) {
    out << document_to_json(doc).dump() << "\n";
  }
}

void save_pairs(const std::filesystem::path& path, const std::vector<AlignedPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const AlignedPair& pair : pairs) {
    json record{
        {"original_id", pair.original.id},
        {"paraphrase_id", pair.paraphrase.id},
        {"label", pair.label == PairLabel::kMachine ? "machine" : "human"},
        {"generator", pair.generator},
        {"metrics",
         {{"sem_match", pair.metrics.sem_match},
          {"lm_like", pair.metrics.lm_like},
          {"rouge_l", pair.metrics.rouge_l},
          {"bleu", pair.metrics.bleu}}},
    };
    out << record.dump() << "\n";
  }
}

std::vector<AlignedPair> load_pairs(const std::filesystem::path& path,
                                    const std::map<std::string, Document>& documents) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open pair file: " + path.string());
  std::vector<AlignedPair> pairs;
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
    AlignedPair pair;
    const std::string original_id = record.at("original_id").get<std::string>();
    const std::string paraphrase_id = record.at("paraphrase_id").get<std::string>();
    auto lookup = [&](const std::string& id) {
      auto it = documents.find(id);
      if (it == documents.end()) {
        throw ValidationError(where + ": pair references unknown document " + id);
      }
      return it->second;
    };
    pair.original = lookup(original_id);
    pair.paraphrase = lookup(paraphrase_id);
    const std::string label = record.at("label").get<std::string>();
    if (label == "machine") {
      pair.label = PairLabel::kMachine;
    } else if (label == "human") {
      pair.label = PairLabel::kHuman;
    } else {
      throw ValidationError(where + ": unknown pair label " + label);
    }
    pair.generator = record.value("generator", "");
    if (pair.label == PairLabel::kHuman && !pair.generator.empty()) {
      throw ValidationError(where + ": human pair must not carry a generator digest");
    }
    const json& metrics = record.at("metrics");
    pair.metrics.sem_match = metrics.at("sem_match").get<double>();
    pair.metrics.lm_like = metrics.at("lm_like").get<double>();
    pair.metrics.rouge_l = metrics.at("rouge_l").get<double>();
    pair.metrics.bleu = metrics.at("bleu").get<double>();

    const DocId orig_id = DocId::parse(pair.original.id);
    const DocId para_id = DocId::parse(pair.paraphrase.id);
    if (orig_id.doc != para_id.doc || orig_id.para != para_id.para) {
      throw ValidationError(where + ": pair ids disagree on coordinates: " +
                            pair.original.id + " vs " + pair.paraphrase.id);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::map<std::string, Document> index_documents(const std::vector<Document>& documents) {
  std::map<std::string, Document> index;
  for (const Document& doc : documents) {
    if (!index.emplace(doc.id, doc).second) {
      throw ValidationError("duplicate document id " + doc.id);
    }
  }
  return index;
}

BuildReport build_pairs(const std::vector<Document>& originals, Backend& backend,
                        const BuildOptions& options, const EmbeddingTable& emb) {
  if (originals.empty()) throw ValidationError("build_pairs: no originals");

  std::vector<Document> ordered = originals;
  std::sort(ordered.begin(), ordered.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });

  struct Slot {
    bool ok = false;
    AlignedPair pair;
    std::string error;
  };
  std::vector<Slot> slots(ordered.size());

  const std::string digest = generator_digest(backend, options.prompt, options.gen);

  auto work = [&](std::size_t index) {
    const Document& original = ordered[index];
    Slot& slot = slots[index];
    try {
      const DocId id = DocId::parse(original.id);
      if (id.spun) {
        throw ValidationError("original document has a SPUN id: " + original.id);
      }
      GenParams gen = options.gen;
      // per-document seed stream keeps candidates independent across docs
      gen.seed = options.gen.seed ^ std::stoull(fnv1a_hex(original.id), nullptr, 16);
      CandidateSet set = paraphrase(backend, original.id, original.text, gen,
                                    options.prompt);
      score_candidates(set, original.text, emb, options.metrics);
      const std::size_t winner = select_candidate(set, options.weights);

      AlignedPair pair;
      pair.original = original;
      pair.paraphrase.id = id.counterpart().str();
      pair.paraphrase.source = original.source;
      pair.paraphrase.text = set.candidates[winner].text;
      pair.generator = digest;
      pair.label = PairLabel::kMachine;
      pair.metrics = *set.candidates[winner].metrics;
      slot.pair = std::move(pair);
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < ordered.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> workers;
    for (int t = 0; t < threads; ++t) {
      workers.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < ordered.size(); i = next++) work(i);
      }));
    }
    for (auto& worker : workers) worker.get();
  }

  BuildReport report;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (slots[i].ok) {
      report.pairs.push_back(std::move(slots[i].pair));
    } else {
      report.errors.emplace_back(ordered[i].id, slots[i].error);
    }
  }
  const double error_rate =
      static_cast<double>(report.errors.size()) / static_cast<double>(ordered.size());
  if (error_rate > options.max_error_rate) {
    std::string detail;
    for (std::size_t i = 0; i < report.errors.size() && i < 5; ++i) {
      detail += "\n  " + report.errors[i].first + ": " + report.errors[i].second;
    }
    throw Error("build_pairs: error rate " + std::to_string(error_rate) +
                " exceeds threshold " + std::to_string(options.max_error_rate) + detail);
  }
  return report;
}

CorpusSplit split_corpus(const std::vector<AlignedPair>& pairs,
                         std::array<double, 3> ratios, std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (r < 0.0) throw ValidationError("split: ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("split: ratios must sum to 1");
  }
  std::size_t nonzero = 0;
  for (double r : ratios) {
    if (r > 0.0) ++nonzero;
  }
  if (pairs.size() < nonzero) {
    throw ValidationError("split: fewer pairs than non-zero partitions");
  }

  std::vector<std::string> ids;
  ids.reserve(pairs.size());
  for (const AlignedPair& pair : pairs) ids.push_back(pair.original.id);
  std::sort(ids.begin(), ids.end());

  std::mt19937_64 gen(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[bounded_draw(gen, i)]);
  }

  const auto n = static_cast<double>(ids.size());
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratios[i] * n;
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - std::floor(exact);
    assigned += sizes[i];
  }
  while (assigned < ids.size()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i) {
      if (remainders[i] > remainders[best]) best = i;
    }
    ++sizes[best];
    remainders[best] = -1.0;
    ++assigned;
  }

  CorpusSplit split;
  split.seed = seed;
  split.ratios = ratios;
  auto cursor = ids.begin();
  split.train.assign(cursor, cursor + static_cast<std::ptrdiff_t>(sizes[0]));
  cursor += static_cast<std::ptrdiff_t>(sizes[0]);
  split.dev.assign(cursor, cursor + static_cast<std::ptrdiff_t>(sizes[1]));
  cursor += static_cast<std::ptrdiff_t>(sizes[1]);
  split.test.assign(cursor, cursor + static_cast<std::ptrdiff_t>(sizes[2]));
  return split;
}

}  // namespace paraforge
