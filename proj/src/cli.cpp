#include "paraforge/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "paraforge/annotations.hpp"
#include "paraforge/corpus.hpp"
#include "paraforge/detection.hpp"
#include "paraforge/errors.hpp"
#include "paraforge/evaluation.hpp"
#include "paraforge/generate.hpp"

namespace paraforge {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// config plumbing

struct KeySpec {
  std::set<std::string> leaves;
  std::map<std::string, KeySpec> sections;
  bool free_form = false;  // arbitrary keys allowed (e.g. named prediction files)
};

void validate_keys(const json& node, const KeySpec& spec, const std::string& path) {
  if (!node.is_object()) return;
  for (const auto& [key, value] : node.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (spec.free_form) continue;
    auto section = spec.sections.find(key);
    if (section != spec.sections.end()) {
      validate_keys(value, section->second, where);
      continue;
    }
    if (!spec.leaves.count(key)) {
      throw ValidationError("unknown config key: " + where);
    }
  }
}

KeySpec config_spec() {
  KeySpec backend;
  backend.leaves = {"kind",          "text",        "synonyms",
                    "mode",          "period",      "prob",
                    "endpoint",      "body_template", "response_path",
                    "api_key_env",   "requests_per_minute", "max_retries",
                    "backoff_initial_ms"};
  KeySpec prompt;
  prompt.leaves = {"instruction", "examples", "context_budget_tokens"};
  KeySpec params;
  params.leaves = {"max_new_tokens_ratio", "temperature", "candidates_per_original",
                   "retry_cap"};
  KeySpec generation;
  generation.leaves = {"threads"};
  generation.sections = {{"backend", backend}, {"prompt", prompt}, {"params", params}};

  KeySpec corpus;
  corpus.leaves = {"originals", "format",     "documents", "pairs",
                   "candidates", "split",     "ratios",    "max_error_rate"};

  KeySpec weights;
  weights.leaves = {"sem_match", "lm_like", "rouge_l", "bleu"};
  KeySpec selection;
  selection.leaves = {"bleu_max_n", "lm_order"};
  selection.sections = {{"weights", weights}};

  KeySpec detector;
  detector.leaves = {"kind",  "variance_floor", "ngram", "threshold", "order",
                     "alpha", "model",          "references", "examples"};

  KeySpec predictions;
  predictions.free_form = true;
  KeySpec evaluation;
  evaluation.leaves = {"iterations"};
  evaluation.sections = {{"predictions", predictions}};

  KeySpec triangle;
  triangle.leaves = {"originals", "human", "machine"};
  KeySpec annotations;
  annotations.leaves = {"records",     "control_system",
                        "ci_level",    "min_justification_tokens",
                        "copied_match_threshold", "match_ngram",
                        "task_texts"};
  annotations.sections = {{"triangle", triangle}};

  KeySpec scores;
  scores.leaves = {"pairs"};

  KeySpec root;
  root.leaves = {"seed", "out_dir", "embeddings", "scheme"};
  root.sections = {{"generation", generation}, {"corpus", corpus},
                   {"selection", selection},   {"detector", detector},
                   {"evaluation", evaluation}, {"annotations", annotations},
                   {"scores_by_backend", scores}};
  return root;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json config;
  try {
    config = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  validate_keys(config, config_spec(), "");
  return config;
}

const json& section(const json& config, const std::string& name) {
  static const json kEmpty = json::object();
  auto it = config.find(name);
  return it == config.end() ? kEmpty : *it;
}

template <typename T>
T get_or(const json& node, const std::string& key, T fallback) {
  auto it = node.find(key);
  return it == node.end() ? fallback : it->get<T>();
}

std::string require_string(const json& node, const std::string& key,
                           const std::string& context) {
  auto it = node.find(key);
  if (it == node.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw ValidationError("config key '" + context + "." + key + "' is required");
  }
  return it->get<std::string>();
}

// ---------------------------------------------------------------------------
// shared run state

struct Run {
  json config;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::vector<std::string> outputs;

  std::string note_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::ostringstream bytes;
      bytes << in.rdbuf();
      input_digests[path.string()] = fnv1a_hex(bytes.str());
    }
    return path.string();
  }

  std::filesystem::path output(const std::string& name) {
    outputs.push_back(name);
    return out_dir / name;
  }

  void finalize(const std::string& subcommand) {
    std::ofstream cfg(out_dir / "resolved_config.json", std::ios::binary);
    cfg << config.dump(2) << "\n";
    json manifest;
    manifest["tool"] = "paraforge";
    manifest["version"] = kVersion;
    manifest["subcommand"] = subcommand;
    manifest["seed"] = seed;
    manifest["config_digest"] = fnv1a_hex(config.dump());
    manifest["inputs"] = input_digests;
    manifest["outputs"] = outputs;
    std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
  }
};

Run make_run(const json& config) {
  Run run;
  run.config = config;
  run.seed = get_or<std::uint64_t>(config, "seed", 0);
  const std::string out = get_or<std::string>(config, "out_dir", "");
  if (out.empty()) throw ValidationError("config key 'out_dir' is required");
  run.out_dir = out;
  std::filesystem::create_directories(run.out_dir);
  return run;
}

Scheme config_scheme(const json& config) {
  return scheme_from_name(
      get_or<std::string>(config, "scheme", "whitespace-lower-nopunct"));
}

std::unique_ptr<Backend> make_backend(const json& backend_cfg) {
  const std::string kind = require_string(backend_cfg, "kind", "generation.backend");
  if (kind == "mock") {
    return std::make_unique<MockBackend>(get_or<std::string>(backend_cfg, "text", ""));
  }
  if (kind == "spinner") {
    SpinPolicy policy;
    policy.period = get_or<int>(backend_cfg, "period", 4);
    policy.prob = get_or<double>(backend_cfg, "prob", 0.15);
    const std::string mode = get_or<std::string>(backend_cfg, "mode", "every_kth");
    if (mode == "every_kth") {
      policy.mode = SpinPolicy::Mode::kEveryKth;
    } else if (mode == "probability") {
      policy.mode = SpinPolicy::Mode::kProbability;
    } else {
      throw ValidationError("generation.backend.mode must be every_kth or probability");
    }
    policy.synonyms = load_synonym_table(
        require_string(backend_cfg, "synonyms", "generation.backend"));
    return std::make_unique<SpinnerBackend>(std::move(policy));
  }
  if (kind == "remote") {
    RemoteBackendConfig remote;
    remote.endpoint = require_string(backend_cfg, "endpoint", "generation.backend");
    remote.body_template =
        require_string(backend_cfg, "body_template", "generation.backend");
    remote.response_path =
        require_string(backend_cfg, "response_path", "generation.backend");
    remote.api_key_env =
        get_or<std::string>(backend_cfg, "api_key_env", "PARAFORGE_API_KEY");
    remote.requests_per_minute = get_or<int>(backend_cfg, "requests_per_minute", 60);
    remote.max_retries = get_or<int>(backend_cfg, "max_retries", 3);
    remote.backoff_initial_ms = get_or<int>(backend_cfg, "backoff_initial_ms", 100);
    return std::make_unique<RemoteHttpBackend>(std::move(remote));
  }
  throw ValidationError("generation.backend.kind must be mock, spinner, or remote");
}

PromptSpec make_prompt_spec(const json& prompt_cfg, Run& run) {
  PromptSpec spec;
  spec.instruction = get_or<std::string>(prompt_cfg, "instruction",
                                         "Rephrase the following sentence.");
  spec.context_budget_tokens = get_or<int>(prompt_cfg, "context_budget_tokens", 2048);
  const std::string examples = get_or<std::string>(prompt_cfg, "examples", "");
  if (!examples.empty()) {
    spec.example_pairs = load_example_pairs(run.note_input(examples));
  }
  return spec;
}

GenParams make_gen_params(const json& params_cfg, std::uint64_t seed) {
  GenParams params;
  params.max_new_tokens_ratio = get_or<double>(params_cfg, "max_new_tokens_ratio", 0.9);
  params.temperature = get_or<double>(params_cfg, "temperature", 0.8);
  params.candidates_per_original =
      get_or<int>(params_cfg, "candidates_per_original", 4);
  params.retry_cap = get_or<int>(params_cfg, "retry_cap", 2);
  params.seed = seed;
  return params;
}

SelectionWeights make_weights(const json& selection_cfg) {
  SelectionWeights weights;
  const json& w = section(selection_cfg, "weights");
  weights.sem_match = get_or<double>(w, "sem_match", 0.5);
  weights.lm_like = get_or<double>(w, "lm_like", 0.5);
  weights.rouge_l = get_or<double>(w, "rouge_l", 0.5);
  weights.bleu = get_or<double>(w, "bleu", 0.5);
  return weights;
}

MetricOptions make_metric_options(const json& config) {
  MetricOptions options;
  options.scheme = config_scheme(config);
  const json& selection_cfg = section(config, "selection");
  options.bleu_max_n = get_or<int>(selection_cfg, "bleu_max_n", 4);
  options.lm_order = get_or<int>(selection_cfg, "lm_order", 1);
  return options;
}

std::vector<Document> load_originals(const json& config, Run& run) {
  const json& corpus_cfg = section(config, "corpus");
  const std::string path = require_string(corpus_cfg, "originals", "corpus");
  const std::string format = get_or<std::string>(corpus_cfg, "format", "jsonl");
  IngestFormat fmt;
  if (format == "jsonl") {
    fmt = IngestFormat::kJsonl;
  } else if (format == "paired-dirs") {
    fmt = IngestFormat::kPairedDirs;
  } else {
    throw ValidationError("corpus.format must be jsonl or paired-dirs");
  }
  std::vector<Document> docs = ingest(run.note_input(path), fmt);
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  return docs;
}

EmbeddingTable load_embeddings(const json& config, Run& run) {
  const std::string path = get_or<std::string>(config, "embeddings", "");
  if (path.empty()) throw ValidationError("config key 'embeddings' is required");
  return EmbeddingTable::load(run.note_input(path));
}

std::uint64_t doc_seed(std::uint64_t base, const std::string& id) {
  return base ^ std::stoull(fnv1a_hex(id), nullptr, 16);
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_generate(const json& config) {
  Run run = make_run(config);
  const json& gen_cfg = section(config, "generation");
  auto backend = make_backend(section(gen_cfg, "backend"));
  const PromptSpec prompt = make_prompt_spec(section(gen_cfg, "prompt"), run);
  const GenParams params = make_gen_params(section(gen_cfg, "params"), run.seed);
  const std::vector<Document> originals = load_originals(config, run);
  const std::string digest = generator_digest(*backend, prompt, params);

  std::ofstream out(run.output("candidates.jsonl"), std::ios::binary);
  for (const Document& original : originals) {
    GenParams per_doc = params;
    per_doc.seed = doc_seed(params.seed, original.id);
    const CandidateSet set =
        paraphrase(*backend, original.id, original.text, per_doc, prompt);
    json record;
    record["original_id"] = set.original_id;
    record["generator"] = digest;
    record["max_new_tokens"] = max_new_tokens(original.text, params.max_new_tokens_ratio);
    json texts = json::array();
    for (const Candidate& candidate : set.candidates) texts.push_back(candidate.text);
    record["candidates"] = std::move(texts);
    out << record.dump() << "\n";
  }
  run.finalize("generate");
  return 0;
}

int cmd_select(const json& config) {
  Run run = make_run(config);
  const json& corpus_cfg = section(config, "corpus");
  const std::vector<Document> originals = load_originals(config, run);
  const std::map<std::string, Document> by_id = index_documents(originals);
  const EmbeddingTable emb = load_embeddings(config, run);
  const SelectionWeights weights = make_weights(section(config, "selection"));
  const MetricOptions metric_options = make_metric_options(config);

  const std::string candidates_path = get_or<std::string>(
      corpus_cfg, "candidates", (run.out_dir / "candidates.jsonl").string());
  std::ifstream in(run.note_input(candidates_path));
  if (!in) throw ValidationError("cannot open candidates file: " + candidates_path);

  std::vector<Document> paraphrases;
  std::vector<AlignedPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = candidates_path + ":" + std::to_string(lineno);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    CandidateSet set;
    set.original_id = record.at("original_id").get<std::string>();
    for (const json& text : record.at("candidates")) {
      set.candidates.push_back({text.get<std::string>(), std::nullopt});
    }
    auto doc = by_id.find(set.original_id);
    if (doc == by_id.end()) {
      throw ValidationError(where + ": unknown original " + set.original_id);
    }
    score_candidates(set, doc->second.text, emb, metric_options);
    const std::size_t winner = select_candidate(set, weights);

    AlignedPair pair;
    pair.original = doc->second;
    pair.paraphrase.id = DocId::parse(doc->second.id).counterpart().str();
    pair.paraphrase.source = doc->second.source;
    pair.paraphrase.text = set.candidates[winner].text;
    pair.generator = record.value("generator", "");
    pair.label = PairLabel::kMachine;
    pair.metrics = *set.candidates[winner].metrics;
    paraphrases.push_back(pair.paraphrase);
    pairs.push_back(std::move(pair));
  }
  save_documents(run.output("paraphrases.jsonl"), paraphrases);
  save_pairs(run.output("pairs.jsonl"), pairs);
  run.finalize("select");
  return 0;
}

void write_split(const std::filesystem::path& path, const CorpusSplit& split) {
  json doc;
  doc["train"] = split.train;
  doc["dev"] = split.dev;
  doc["test"] = split.test;
  doc["seed"] = split.seed;
  doc["ratios"] = split.ratios;
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << "\n";
}

CorpusSplit read_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open split file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  CorpusSplit split;
  split.train = doc.at("train").get<std::vector<std::string>>();
  split.dev = doc.at("dev").get<std::vector<std::string>>();
  split.test = doc.at("test").get<std::vector<std::string>>();
  split.seed = doc.value("seed", 0ull);
  if (doc.contains("ratios")) {
    auto r = doc["ratios"].get<std::vector<double>>();
    if (r.size() == 3) split.ratios = {r[0], r[1], r[2]};
  }
  return split;
}

int cmd_build_corpus(const json& config) {
  Run run = make_run(config);
  const json& gen_cfg = section(config, "generation");
  const json& corpus_cfg = section(config, "corpus");
  auto backend = make_backend(section(gen_cfg, "backend"));

  BuildOptions options;
  options.prompt = make_prompt_spec(section(gen_cfg, "prompt"), run);
  options.gen = make_gen_params(section(gen_cfg, "params"), run.seed);
  options.weights = make_weights(section(config, "selection"));
  options.metrics = make_metric_options(config);
  options.max_error_rate = get_or<double>(corpus_cfg, "max_error_rate", 0.0);
  options.threads = get_or<int>(gen_cfg, "threads", 1);

  const std::vector<Document> originals = load_originals(config, run);
  const EmbeddingTable emb = load_embeddings(config, run);
  const BuildReport report = build_pairs(originals, *backend, options, emb);

  std::vector<Document> documents;
  for (const AlignedPair& pair : report.pairs) {
    documents.push_back(pair.original);
    documents.push_back(pair.paraphrase);
  }
  save_documents(run.output("documents.jsonl"), documents);
  save_pairs(run.output("pairs.jsonl"), report.pairs);

  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  if (corpus_cfg.contains("ratios")) {
    auto r = corpus_cfg["ratios"].get<std::vector<double>>();
    if (r.size() != 3) throw ValidationError("corpus.ratios must have 3 entries");
    ratios = {r[0], r[1], r[2]};
  }
  write_split(run.output("split.json"), split_corpus(report.pairs, ratios, run.seed));

  if (!report.errors.empty()) {
    json errors = json::array();
    for (const auto& [id, message] : report.errors) {
      errors.push_back({{"id", id}, {"error", message}});
    }
    std::ofstream err(run.output("errors.jsonl"), std::ios::binary);
    for (const json& entry : errors) err << entry.dump() << "\n";
    std::cerr << "build-corpus: " << report.errors.size()
              << " document(s) failed; see errors.jsonl\n";
  }
  run.finalize("build-corpus");
  return 0;
}

struct LabeledDocs {
  std::vector<TokenSeq> docs;
  std::vector<DetectLabel> labels;
};

LabeledDocs docs_for_ids(const std::vector<std::string>& pair_ids,
                         const std::map<std::string, Document>& documents,
                         Scheme scheme) {
  LabeledDocs out;
  for (const std::string& original_id : pair_ids) {
    const DocId id = DocId::parse(original_id);
    for (bool spun : {false, true}) {
      DocId side = id;
      side.spun = spun;
      auto doc = documents.find(side.str());
      if (doc == documents.end()) {
        throw ValidationError("split references unknown document " + side.str());
      }
      out.docs.push_back(tokenize(doc->second.text, scheme));
      out.labels.push_back(spun ? DetectLabel::kMachine : DetectLabel::kOriginal);
    }
  }
  return out;
}

int cmd_train_detector(const json& config) {
  Run run = make_run(config);
  const json& corpus_cfg = section(config, "corpus");
  const json& detector_cfg = section(config, "detector");
  const std::string kind = get_or<std::string>(detector_cfg, "kind", "nb");

  const std::vector<Document> documents =
      ingest(run.note_input(require_string(corpus_cfg, "documents", "corpus")),
             IngestFormat::kJsonl);
  const std::map<std::string, Document> by_id = index_documents(documents);
  const CorpusSplit split =
      read_split(run.note_input(require_string(corpus_cfg, "split", "corpus")));
  const Scheme scheme = config_scheme(config);
  const LabeledDocs train = docs_for_ids(split.train, by_id, scheme);

  if (kind == "nb") {
    const EmbeddingTable emb = load_embeddings(config, run);
    std::vector<FeatureVector> features;
    features.reserve(train.docs.size());
    for (const TokenSeq& doc : train.docs) features.push_back(embed_doc(doc, emb));
    const NBModel model =
        train_nb(features, train.labels,
                 get_or<double>(detector_cfg, "variance_floor", 1e-9), emb.digest());
    model.save(run.output("model.json"));
  } else if (kind == "nb-multinomial") {
    const MultinomialNBModel model = train_multinomial_nb(
        train.docs, train.labels, get_or<int>(detector_cfg, "order", 1),
        get_or<double>(detector_cfg, "alpha", 1.0));
    save_multinomial_nb(model, run.output("model.json"));
  } else {
    throw ValidationError("train-detector supports kind nb or nb-multinomial");
  }
  run.finalize("train-detector");
  return 0;
}

int cmd_detect(const json& config) {
  Run run = make_run(config);
  const json& corpus_cfg = section(config, "corpus");
  const json& detector_cfg = section(config, "detector");
  const std::string kind = get_or<std::string>(detector_cfg, "kind", "nb");
  const Scheme scheme = config_scheme(config);

  std::vector<Document> documents =
      ingest(run.note_input(require_string(corpus_cfg, "documents", "corpus")),
             IngestFormat::kJsonl);
  std::sort(documents.begin(), documents.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });

  std::ofstream out(run.output("predictions.jsonl"), std::ios::binary);
  auto emit = [&out](const std::string& id, const Prediction& pred) {
    json record{{"id", id},
                {"label", detect_label_name(pred.label)},
                {"confidence", pred.confidence},
                {"detector", pred.detector}};
    out << record.dump() << "\n";
  };

  if (kind == "nb" || kind == "nb-multinomial") {
    const std::string model_path = require_string(detector_cfg, "model", "detector");
    if (kind == "nb") {
      const EmbeddingTable emb = load_embeddings(config, run);
      const NBModel model = NBModel::load(run.note_input(model_path));
      if (!model.embedding_digest.empty() && model.embedding_digest != emb.digest()) {
        throw Error("model was trained with different embeddings (digest " +
                    model.embedding_digest + " vs " + emb.digest() + ")");
      }
      for (const Document& doc : documents) {
        emit(doc.id, nb_predict(model, embed_doc(tokenize(doc.text, scheme), emb)));
      }
    } else {
      const MultinomialNBModel model = load_multinomial_nb(run.note_input(model_path));
      for (const Document& doc : documents) {
        emit(doc.id, multinomial_nb_predict(model, tokenize(doc.text, scheme)));
      }
    }
  } else if (kind == "text-match") {
    const std::vector<Document> references =
        ingest(run.note_input(require_string(detector_cfg, "references", "detector")),
               IngestFormat::kJsonl);
    std::vector<TokenSeq> index;
    index.reserve(references.size());
    for (const Document& ref : references) index.push_back(tokenize(ref.text, scheme));
    const double threshold = get_or<double>(detector_cfg, "threshold", 0.5);
    const int n = get_or<int>(detector_cfg, "ngram", 3);
    for (const Document& doc : documents) {
      emit(doc.id,
           textmatch_detect(tokenize(doc.text, scheme), index, threshold, n).prediction);
    }
  } else if (kind == "few-shot") {
    auto backend = make_backend(section(section(config, "generation"), "backend"));
    std::ifstream ex(
        run.note_input(require_string(detector_cfg, "examples", "detector")));
    if (!ex) throw ValidationError("cannot open few-shot example file");
    std::vector<LabeledExample> examples;
    std::string line;
    while (std::getline(ex, line)) {
      if (line.empty()) continue;
      const json record = json::parse(line);
      examples.push_back(
          {record.at("text").get<std::string>(),
           detect_label_from_name(record.at("label").get<std::string>())});
    }
    for (const Document& doc : documents) {
      try {
        emit(doc.id, fewshot_detect(*backend, doc.text, examples));
      } catch (const UnparseableCompletionError& e) {
        std::cerr << "detect: abstained on " << doc.id << ": " << e.what() << "\n";
      }
    }
  } else {
    throw ValidationError(
        "detector.kind must be nb, nb-multinomial, text-match, or few-shot");
  }
  run.finalize("detect");
  return 0;
}

int cmd_evaluate(const json& config) {
  Run run = make_run(config);
  const json& corpus_cfg = section(config, "corpus");
  const json& eval_cfg = section(config, "evaluation");

  const std::vector<Document> documents =
      ingest(run.note_input(require_string(corpus_cfg, "documents", "corpus")),
             IngestFormat::kJsonl);

  std::map<std::string, DetectLabel> truth;
  std::map<std::string, Source> sources;
  for (const Document& doc : documents) {
    truth[doc.id] =
        DocId::parse(doc.id).spun ? DetectLabel::kMachine : DetectLabel::kOriginal;
    sources[doc.id] = doc.source;
  }

  // named prediction files, plus a seeded random baseline
  std::map<std::string, std::map<std::string, DetectLabel>> predictions;
  const json& files = section(eval_cfg, "predictions");
  if (files.empty()) {
    throw ValidationError("evaluation.predictions must name at least one file");
  }
  for (const auto& [name, path] : files.items()) {
    std::ifstream in(run.note_input(path.get<std::string>()));
    if (!in) {
      throw ValidationError("cannot open predictions file: " + path.get<std::string>());
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json record = json::parse(line);
      predictions[name][record.at("id").get<std::string>()] =
          detect_label_from_name(record.at("label").get<std::string>());
    }
  }
  {
    std::map<std::string, DetectLabel> random;
    for (const auto& [id, label] : truth) {
      (void)label;
      const std::uint64_t h = std::stoull(
          fnv1a_hex(id + "#" + std::to_string(run.seed)), nullptr, 16);
      random[id] = h & 1 ? DetectLabel::kMachine : DetectLabel::kOriginal;
    }
    predictions["random"] = std::move(random);
  }

  json report;
  report["provenance"] = {{"seed", run.seed}, {"version", kVersion}};
  json per_detector = json::object();
  std::map<std::string, std::map<std::string, double>> correctness;  // detector -> id -> 0/1

  std::ostringstream csv;
  csv << "detector,source,n,f1_macro,accuracy\n";
  for (const auto& [name, preds] : predictions) {
    ConfusionMatrix overall;
    std::map<Source, ConfusionMatrix> by_source;
    for (const auto& [id, pred] : preds) {
      auto t = truth.find(id);
      if (t == truth.end()) continue;  // prediction for a doc outside this corpus
      overall.add(t->second, pred);
      by_source[sources[id]].add(t->second, pred);
      correctness[name][id] = pred == t->second ? 1.0 : 0.0;
    }
    if (overall.total() == 0) {
      throw ValidationError("predictions of '" + name + "' share no ids with corpus");
    }
    json entry;
    entry["n"] = overall.total();
    entry["f1_macro"] = f1_macro(overall);
    entry["accuracy"] = accuracy(overall);
    csv << name << ",all," << overall.total() << "," << f1_macro(overall) << ","
        << accuracy(overall) << "\n";
    json per_source = json::object();
    for (const auto& [source, cm] : by_source) {
      per_source[source_name(source)] = {{"n", cm.total()},
                                         {"f1_macro", f1_macro(cm)},
                                         {"accuracy", accuracy(cm)}};
      csv << name << "," << source_name(source) << "," << cm.total() << ","
          << f1_macro(cm) << "," << accuracy(cm) << "\n";
    }
    entry["per_source"] = std::move(per_source);
    per_detector[name] = std::move(entry);
  }
  report["per_detector"] = std::move(per_detector);

  // pairwise significance on shared per-document correctness
  const int iterations = get_or<int>(eval_cfg, "iterations", 10000);
  json significance = json::object();
  for (const auto& [name_a, corr_a] : correctness) {
    for (const auto& [name_b, corr_b] : correctness) {
      if (name_a >= name_b) continue;
      std::vector<double> a, b;
      for (const auto& [id, value] : corr_a) {
        auto it = corr_b.find(id);
        if (it == corr_b.end()) continue;
        a.push_back(value);
        b.push_back(it->second);
      }
      if (a.size() < 2) continue;
      const StatResult perm = permutation_test(a, b, iterations, run.seed);
      significance[name_a + " vs " + name_b] = {
          {"method", "permutation"},
          {"statistic", perm.statistic},
          {"p_value", perm.p_value},
          {"n", a.size()},
      };
    }
  }
  report["significance"] = std::move(significance);

  std::ofstream json_out(run.output("report.json"), std::ios::binary);
  json_out << report.dump(2) << "\n";
  std::ofstream csv_out(run.output("report.csv"), std::ios::binary);
  csv_out << csv.str();
  run.finalize("evaluate");
  return 0;
}

int cmd_analyze_annotations(const json& config) {
  Run run = make_run(config);
  const json& ann_cfg = section(config, "annotations");
  const std::vector<AnnotationRecord> raw =
      load_annotations(run.note_input(require_string(ann_cfg, "records", "annotations")));

  FilterOptions filter_options;
  filter_options.copied_match_threshold =
      get_or<double>(ann_cfg, "copied_match_threshold", 0.9);
  filter_options.min_justification_tokens =
      get_or<int>(ann_cfg, "min_justification_tokens", 3);
  filter_options.match_ngram = get_or<int>(ann_cfg, "match_ngram", 3);

  std::map<std::string, std::string> task_texts;
  const std::string task_path = get_or<std::string>(ann_cfg, "task_texts", "");
  if (!task_path.empty()) {
    std::ifstream in(run.note_input(task_path));
    if (!in) throw ValidationError("cannot open task text file: " + task_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json record = json::parse(line);
      task_texts[record.at("item_id").get<std::string>()] =
          record.at("text").get<std::string>();
    }
  }
  const FilterResult filtered = filter_assessments(raw, task_texts, filter_options);
  const std::vector<AnnotationRecord>& records = filtered.kept;

  json report;
  report["n_records"] = raw.size();
  report["n_kept"] = records.size();
  json rejections = json::array();
  for (const Rejection& r : filtered.rejected) {
    rejections.push_back({{"participant_id", r.participant_id},
                          {"item_id", r.item_id},
                          {"reason", r.reason}});
  }
  report["rejections"] = std::move(rejections);

  const std::string control = get_or<std::string>(ann_cfg, "control_system", "");
  const double ci_level = get_or<double>(ann_cfg, "ci_level", 0.95);
  bool any_answers = false;
  for (const AnnotationRecord& r : records) any_answers |= r.answer.has_value();
  if (any_answers && !control.empty()) {
    json systems = json::array();
    for (const SystemReport& row : analyze_classification(records, control, ci_level)) {
      json entry;
      entry["system"] = row.system;
      entry["mean_accuracy"] = row.mean_accuracy;
      entry["ci"] = {row.ci_lo, row.ci_hi};
      entry["dont_know_ratio"] = row.dont_know_ratio;
      entry["n_participants"] = row.n_participants;
      if (row.t_vs_control) {
        entry["t_vs_control"] = *row.t_vs_control;
        entry["p_vs_control"] = *row.p_vs_control;
        entry["p_bonferroni"] = *row.p_bonferroni;
      }
      systems.push_back(std::move(entry));
    }
    report["classification"] = std::move(systems);

    // agreement over items rated by the modal number of raters
    std::map<std::string, std::array<std::uint64_t, 3>> item_counts;
    for (const AnnotationRecord& r : records) {
      if (r.answer) ++item_counts[r.item_id][static_cast<std::size_t>(*r.answer)];
    }
    std::map<std::uint64_t, std::size_t> count_freq;
    for (const auto& [item, counts] : item_counts) {
      ++count_freq[counts[0] + counts[1] + counts[2]];
    }
    std::uint64_t modal = 0;
    std::size_t best = 0;
    for (const auto& [raters, freq] : count_freq) {
      if (freq > best) {
        best = freq;
        modal = raters;
      }
    }
    std::vector<std::vector<std::uint64_t>> matrix;
    for (const auto& [item, counts] : item_counts) {
      if (counts[0] + counts[1] + counts[2] == modal) {
        matrix.push_back({counts[0], counts[1], counts[2]});
      }
    }
    if (modal >= 2 && !matrix.empty()) {
      const AgreementResult agreement = fleiss_kappa(matrix);
      report["agreement"] = {{"kappa", agreement.kappa},
                             {"n_items", agreement.n_items},
                             {"n_raters_per_item", agreement.n_raters_per_item}};
    }
  }

  const auto likert = likert_summary(records);
  if (!likert.empty()) {
    json rows = json::object();
    for (const auto& [system, row] : likert) {
      rows[system] = {{"n", row.n},
                      {"clarity", {{"mean", row.mean[0]}, {"std", row.stddev[0]}}},
                      {"fluency", {{"mean", row.mean[1]}, {"std", row.stddev[1]}}},
                      {"coherence", {{"mean", row.mean[2]}, {"std", row.stddev[2]}}}};
    }
    report["likert"] = std::move(rows);
  }

  report["duration_outliers"] = duration_outliers(records);

  const DemographicsSummary demo = demographics_summary(records);
  if (!demo.value_counts.empty()) {
    json d;
    d["counts"] = demo.value_counts;
    json numeric = json::object();
    for (const auto& [key, stats] : demo.numeric) {
      numeric[key] = {{"mean", stats[0]}, {"min", stats[1]}, {"max", stats[2]}};
    }
    d["numeric"] = std::move(numeric);
    report["demographics"] = std::move(d);
  }

  const json& triangle_cfg = section(ann_cfg, "triangle");
  if (!triangle_cfg.empty()) {
    auto read_lines = [&run](const std::string& path) {
      std::ifstream in(run.note_input(path));
      if (!in) throw ValidationError("cannot open text file: " + path);
      std::vector<std::string> lines;
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
      }
      return lines;
    };
    const EmbeddingTable emb = load_embeddings(config, run);
    const SimilarityTriangle triangle = similarity_triangle(
        read_lines(require_string(triangle_cfg, "originals", "annotations.triangle")),
        read_lines(require_string(triangle_cfg, "human", "annotations.triangle")),
        read_lines(require_string(triangle_cfg, "machine", "annotations.triangle")),
        emb);
    report["similarity_triangle"] = {
        {"human_vs_original", triangle.human_vs_original},
        {"machine_vs_original", triangle.machine_vs_original},
        {"human_vs_machine", triangle.human_vs_machine}};
  }

  std::ofstream out(run.output("annotation_report.json"), std::ios::binary);
  out << report.dump(2) << "\n";
  run.finalize("analyze-annotations");
  return 0;
}

int cmd_scores_by_backend(const json& config) {
  Run run = make_run(config);
  const json& scores_cfg = section(config, "scores_by_backend");
  if (!scores_cfg.contains("pairs")) {
    throw ValidationError("scores_by_backend.pairs must list pair files");
  }

  struct Accumulator {
    double sem = 0, lm = 0, rouge = 0, bleu = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Accumulator> by_backend;
  for (const json& path : scores_cfg["pairs"]) {
    std::ifstream in(run.note_input(path.get<std::string>()));
    if (!in) {
      throw ValidationError("cannot open pair file: " + path.get<std::string>());
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json record = json::parse(line);
      const std::string generator = record.value("generator", "");
      const std::string backend = generator.substr(0, generator.find('|'));
      const json& metrics = record.at("metrics");
      Accumulator& acc = by_backend[backend.empty() ? "human" : backend];
      acc.sem += metrics.at("sem_match").get<double>();
      acc.lm += metrics.at("lm_like").get<double>();
      acc.rouge += metrics.at("rouge_l").get<double>();
      acc.bleu += metrics.at("bleu").get<double>();
      ++acc.n;
    }
  }

  std::ofstream out(run.output("scores_by_backend.csv"), std::ios::binary);
  out << "backend,n_pairs,sem_match,lm_like,rouge_l,bleu\n";
  for (const auto& [backend, acc] : by_backend) {
    const auto n = static_cast<double>(acc.n);
    out << backend << "," << acc.n << "," << acc.sem / n << "," << acc.lm / n << ","
        << acc.rouge / n << "," << acc.bleu / n << "\n";
  }
  run.finalize("scores-by-backend");
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"paraforge: machine-paraphrase corpus construction, detection, "
               "and study analytics"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::string out_flag;

  const std::vector<std::pair<std::string, int (*)(const json&)>> subcommands = {
      {"generate", cmd_generate},
      {"select", cmd_select},
      {"build-corpus", cmd_build_corpus},
      {"train-detector", cmd_train_detector},
      {"detect", cmd_detect},
      {"evaluate", cmd_evaluate},
      {"analyze-annotations", cmd_analyze_annotations},
      {"scores-by-backend", cmd_scores_by_backend},
  };

  std::map<std::string, int (*)(const json&)> dispatch;
  for (const auto& [name, fn] : subcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed_flag, "override config seed");
    sub->add_option("--out", out_flag, "override config out_dir");
    dispatch[name] = fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    json config = load_config(config_path);
    if (seed_flag) config["seed"] = *seed_flag;
    if (!out_flag.empty()) config["out_dir"] = out_flag;
    return dispatch[app.get_subcommands().front()->get_name()](config);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace paraforge
