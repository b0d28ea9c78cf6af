#include "tor/app.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "jsonl.hpp"
#include "tor/error.hpp"
#include "tor/oracle.hpp"
#include "tor/remote.hpp"
#include "tor/text.hpp"

namespace tor {

namespace fs = std::filesystem;
using detail::json;
using detail::ordered_json;

namespace {

std::shared_ptr<const EmbeddingProvider> make_query_embedder(const std::string& kind,
                                                             std::size_t dim,
                                                             std::uint64_t seed) {
  if (kind == "hash") return std::make_shared<HashEmbedder>(dim, seed);
  if (kind == "remote") {
    return std::make_shared<RemoteEmbedder>(RemoteEndpoint::from_env(kEmbedEnvPrefix), dim);
  }
  throw ConfigError("unknown embedder kind \"" + kind + "\"");
}

ordered_json embedder_spec_json(const EmbedderSpec& s) {
  ordered_json j;
  j["kind"] = s.kind;
  j["dim"] = s.dim;
  if (s.kind == "precomputed") {
    j["precomputed_path"] = s.precomputed_path.string();
    j["query_kind"] = s.query_kind;
  }
  return j;
}

EmbedderSpec embedder_spec_from_json(const json& j) {
  EmbedderSpec s;
  s.kind = j.value("kind", s.kind);
  s.dim = j.value("dim", s.dim);
  s.precomputed_path = j.value("precomputed_path", std::string());
  s.query_kind = j.value("query_kind", s.query_kind);
  return s;
}

ordered_json stats_json(const RunStats& s) {
  ordered_json j;
  j["api_calls"] = s.api_calls;
  j["distinct_docs"] = s.distinct_docs;
  j["rate"] = s.rate();
  j["evidence_count"] = s.evidence_count;
  j["parse_failures"] = s.parse_failures;
  j["provider_errors"] = s.provider_errors;
  j["pruned_repetitive"] = s.pruned_repetitive;
  j["pruned_relevance"] = s.pruned_relevance;
  j["pruned_within_path"] = s.pruned_within_path;
  j["exhausted_paths"] = s.exhausted_paths;
  return j;
}

RunStats stats_from_json(const json& j) {
  RunStats s;
  s.api_calls = j.value("api_calls", 0);
  s.distinct_docs = j.value("distinct_docs", 0);
  s.evidence_count = j.value("evidence_count", 0);
  s.parse_failures = j.value("parse_failures", 0);
  s.provider_errors = j.value("provider_errors", 0);
  s.pruned_repetitive = j.value("pruned_repetitive", 0);
  s.pruned_relevance = j.value("pruned_relevance", 0);
  s.pruned_within_path = j.value("pruned_within_path", 0);
  s.exhausted_paths = j.value("exhausted_paths", 0);
  return s;
}

void accumulate(RunStats& total, const RunStats& s) {
  total.api_calls += s.api_calls;
  total.distinct_docs += s.distinct_docs;
  total.evidence_count += s.evidence_count;
  total.parse_failures += s.parse_failures;
  total.provider_errors += s.provider_errors;
  total.pruned_repetitive += s.pruned_repetitive;
  total.pruned_relevance += s.pruned_relevance;
  total.pruned_within_path += s.pruned_within_path;
  total.exhausted_paths += s.exhausted_paths;
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(detail::read_file(path.string()));
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::unique_ptr<LlmProvider> make_llm(const RunConfig& config) {
  if (config.provider == "scripted") {
    return std::make_unique<ScriptedOracle>(ScriptedOracle::load(config.rules_path));
  }
  return std::make_unique<RemoteChatProvider>(RemoteEndpoint::from_env(kLlmEnvPrefix));
}

// File name for a question id; ids are free text, so anything outside a safe
// set is replaced.
std::string trace_file_name(const std::string& id) {
  std::string name;
  for (char c : id) {
    bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                c == '-' || c == '_' || c == '.';
    name.push_back(safe ? c : '_');
  }
  if (name.empty() || name == "." || name == "..") name = "_" + name;
  return name + ".json";
}

std::string outcome_trace_json(const QuestionOutcome& o) {
  ordered_json j;
  if (o.tree) j = ordered_json::parse(trace_to_json(*o.tree));
  j["id"] = o.id;
  if (o.answer) {
    ordered_json a;
    a["full_response"] = o.answer->full_response;
    a["extracted_answer"] = o.answer->extracted_answer;
    a["answer_pattern_found"] = o.answer->answer_pattern_found;
    a["evidence_included"] = o.answer->evidence_included;
    a["call_index"] = o.answer->call_index;
    j["answer"] = std::move(a);
  }
  j["retrieved_ids"] = o.retrieved_ids;
  if (!o.error.empty()) j["error"] = o.error;
  return j.dump(2) + "\n";
}

}  // namespace

IngestSummary cmd_ingest(const IngestConfig& config) {
  const EmbedderSpec& spec = config.embedder;
  if (spec.dim == 0) throw ConfigError("embedding dimension must be positive");

  std::shared_ptr<const EmbeddingProvider> provider;
  if (spec.kind == "precomputed") {
    if (spec.precomputed_path.empty()) throw ConfigError("precomputed embedder needs a vector file");
    auto query = make_query_embedder(spec.query_kind, spec.dim, config.seed);
    provider = std::make_shared<PrecomputedEmbedder>(
        PrecomputedEmbedder::load(spec.precomputed_path, query));
  } else {
    provider = make_query_embedder(spec.kind, spec.dim, config.seed);
  }

  CorpusIndex index =
      ingest_corpus(config.corpus_path, *provider, IngestOptions{config.embed_title});

  std::ostringstream body;
  write_index(body, index);
  std::string contents = body.str();

  IngestSummary summary;
  summary.count = index.size();
  summary.dim = index.dim();
  summary.provider_id = index.provider_id();
  summary.checksum = hex64(fnv1a64(contents));

  ordered_json manifest;
  manifest["count"] = summary.count;
  manifest["dim"] = summary.dim;
  manifest["provider_id"] = summary.provider_id;
  manifest["embedder"] = embedder_spec_json(spec);
  manifest["embed_title"] = config.embed_title;
  manifest["seed"] = config.seed;
  manifest["checksum"] = summary.checksum;

  fs::create_directories(config.index_dir);
  detail::write_file((config.index_dir / "index.jsonl").string(), contents);
  detail::write_file((config.index_dir / "manifest.json").string(), manifest.dump(2) + "\n");
  return summary;
}

LoadedIndex load_index_dir(const fs::path& index_dir) {
  fs::path manifest_path = index_dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw ConfigError("no index at " + index_dir.string() + " (manifest.json missing)");
  }
  json manifest = read_json_file(manifest_path);

  LoadedIndex loaded;
  loaded.spec = embedder_spec_from_json(manifest.value("embedder", json::object()));
  loaded.seed = manifest.value("seed", std::uint64_t{0});
  std::size_t dim = manifest.value("dim", loaded.spec.dim);
  std::string provider_id = manifest.value("provider_id", std::string());

  std::string contents = detail::read_file((index_dir / "index.jsonl").string());
  std::string expected = manifest.value("checksum", std::string());
  if (!expected.empty() && hex64(fnv1a64(contents)) != expected) {
    throw Error("index checksum mismatch in " + index_dir.string());
  }
  std::istringstream in(contents);
  loaded.index = read_index(in, provider_id);

  // Queries go through the model family that built the paragraph vectors.
  std::string query_kind = loaded.spec.kind == "precomputed" ? loaded.spec.query_kind
                                                              : loaded.spec.kind;
  loaded.query_embedder = make_query_embedder(query_kind, dim, loaded.seed);
  if (loaded.query_embedder->id() != provider_id) {
    throw ConfigError("index was built with \"" + provider_id + "\" but queries would use \"" +
                      loaded.query_embedder->id() + "\"");
  }
  return loaded;
}

void RunConfig::validate() const {
  if (mode != "tor" && mode != "cor" && mode != "oner") {
    throw ConfigError("mode must be tor, cor or oner, got \"" + mode + "\"");
  }
  tree.validate();
  if (chain.max_turns < 1) throw ConfigError("max_turns must be at least 1");
  if (chain.per_turn_k < 1) throw ConfigError("per-turn k must be at least 1");
  if (oner_k < 1) throw ConfigError("k must be at least 1");
  if (budget_tokens == 0) throw ConfigError("token budget must be positive");
  if (scored_limit == 0) throw ConfigError("scored paragraph limit must be positive");
  if (provider != "scripted" && provider != "remote") {
    throw ConfigError("provider must be scripted or remote, got \"" + provider + "\"");
  }
  if (provider == "scripted" && rules_path.empty()) {
    throw ConfigError("the scripted provider needs a rules file");
  }
  if (retry_attempts < 1) throw ConfigError("retry attempts must be at least 1");
  if (retry_backoff_ms < 0) throw ConfigError("retry backoff must not be negative");
  if (index_dir.empty()) throw ConfigError("an index directory is required");
  if (dataset_path.empty() == !question.has_value()) {
    throw ConfigError("give exactly one of a dataset or a single question");
  }
  if (output_dir.empty()) throw ConfigError("an output directory is required");
  if (parallel < 1) throw ConfigError("parallel must be at least 1");
}

std::string run_config_to_json(const RunConfig& c) {
  ordered_json j;
  j["mode"] = c.mode;
  j["widths"] = c.tree.widths;
  j["relevance_pruning"] = c.tree.relevance_pruning;
  j["repetitive_pruning"] = c.tree.repetitive_pruning;
  j["repetitive_scope"] = std::string(to_string(c.tree.repetitive_scope));
  j["within_path_dedup"] = c.tree.within_path_dedup;
  j["expansion"] = std::string(to_string(c.tree.expansion));
  j["max_turns"] = c.chain.max_turns;
  j["per_turn_k"] = c.chain.per_turn_k;
  j["oner_k"] = c.oner_k;
  j["fusion"] = std::string(to_string(c.fusion));
  j["budget_tokens"] = c.budget_tokens;
  j["estimator"] = std::string(to_string(c.estimator));
  j["scored_limit"] = c.scored_limit;
  j["provider"] = c.provider;
  j["rules_path"] = c.rules_path.string();
  j["prompt_dir"] = c.prompt_dir ? ordered_json(c.prompt_dir->string()) : ordered_json();
  j["demo_dir"] = c.demo_dir ? ordered_json(c.demo_dir->string()) : ordered_json();
  j["demo_count"] = c.demo_count;
  j["retry_attempts"] = c.retry_attempts;
  j["retry_backoff_ms"] = c.retry_backoff_ms;
  j["index_dir"] = c.index_dir.string();
  j["dataset_path"] = c.dataset_path.string();
  j["question"] = c.question ? ordered_json(*c.question) : ordered_json();
  j["output_dir"] = c.output_dir.string();
  j["seed"] = c.seed;
  j["parallel"] = c.parallel;
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");

  RunConfig c;
  try {
    c.mode = j.value("mode", c.mode);
    c.tree.widths = j.value("widths", c.tree.widths);
    c.tree.relevance_pruning = j.value("relevance_pruning", c.tree.relevance_pruning);
    c.tree.repetitive_pruning = j.value("repetitive_pruning", c.tree.repetitive_pruning);
    std::string scope = j.value("repetitive_scope", std::string("accepted"));
    if (scope == "accepted") {
      c.tree.repetitive_scope = RepetitiveScope::AcceptedOnly;
    } else if (scope == "seen") {
      c.tree.repetitive_scope = RepetitiveScope::SeenAnywhere;
    } else {
      throw ConfigError("unknown repetitive_scope \"" + scope + "\"");
    }
    c.tree.within_path_dedup = j.value("within_path_dedup", c.tree.within_path_dedup);
    std::string expansion = j.value("expansion", std::string("mpc"));
    auto e = parse_expansion(expansion);
    if (!e) throw ConfigError("unknown expansion \"" + expansion + "\"");
    c.tree.expansion = *e;
    c.chain.max_turns = j.value("max_turns", c.chain.max_turns);
    c.chain.per_turn_k = j.value("per_turn_k", c.chain.per_turn_k);
    c.oner_k = j.value("oner_k", c.oner_k);
    std::string fusion = j.value("fusion", std::string("evidence"));
    auto f = parse_fusion(fusion);
    if (!f) throw ConfigError("unknown fusion \"" + fusion + "\"");
    c.fusion = *f;
    c.budget_tokens = j.value("budget_tokens", c.budget_tokens);
    std::string estimator = j.value("estimator", std::string("whitespace"));
    auto est = parse_token_estimator(estimator);
    if (!est) throw ConfigError("unknown estimator \"" + estimator + "\"");
    c.estimator = *est;
    c.scored_limit = j.value("scored_limit", c.scored_limit);
    c.provider = j.value("provider", c.provider);
    c.rules_path = j.value("rules_path", std::string());
    if (auto it = j.find("prompt_dir"); it != j.end() && it->is_string()) {
      c.prompt_dir = it->get<std::string>();
    }
    if (auto it = j.find("demo_dir"); it != j.end() && it->is_string()) {
      c.demo_dir = it->get<std::string>();
    }
    c.demo_count = j.value("demo_count", c.demo_count);
    c.retry_attempts = j.value("retry_attempts", c.retry_attempts);
    c.retry_backoff_ms = j.value("retry_backoff_ms", c.retry_backoff_ms);
    c.index_dir = j.value("index_dir", std::string());
    c.dataset_path = j.value("dataset_path", std::string());
    if (auto it = j.find("question"); it != j.end() && it->is_string()) {
      c.question = it->get<std::string>();
    }
    c.output_dir = j.value("output_dir", std::string());
    c.seed = j.value("seed", c.seed);
    c.parallel = j.value("parallel", c.parallel);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run config field: ") + e.what());
  }
  return c;
}

QuestionOutcome answer_question(const std::string& id, const std::string& question,
                                const RunConfig& config, const CorpusIndex& index,
                                const EmbeddingProvider& embedder, const LlmProvider& llm,
                                const PromptLibrary& prompts) {
  RetryPolicy retry{config.retry_attempts, std::chrono::milliseconds(config.retry_backoff_ms),
                    2.0};
  LlmSession session(llm, retry);

  QuestionOutcome out;
  out.id = id;
  out.question = question;
  if (config.mode == "tor") {
    out.tree = run_tree(question, config.tree, index, embedder, session, prompts);
  } else if (config.mode == "cor") {
    out.tree = run_chain(question, config.chain, index, embedder, session, prompts);
  } else {
    out.tree = run_oner(question, config.oner_k, index, embedder);
  }

  // OneR pseudo-evidence carries no analysis, so only the paragraph format fits.
  FusionStrategy fusion = config.mode == "oner" ? FusionStrategy::ParagraphBased : config.fusion;
  out.answer = generate_answer(question, out.tree->pool, fusion, session, prompts,
                               config.budget_tokens, config.estimator);
  out.retrieved_ids = select_scored_paragraphs(out.tree->pool, out.answer->full_response,
                                               embedder, config.scored_limit);
  return out;
}

RunSummary cmd_run(const RunConfig& config, std::ostream& log) {
  config.validate();

  LoadedIndex loaded = load_index_dir(config.index_dir);
  if (loaded.spec.kind != "remote" && loaded.seed != config.seed) {
    throw ConfigError("run seed " + std::to_string(config.seed) +
                      " differs from the index seed " + std::to_string(loaded.seed));
  }

  std::vector<QAExample> examples;
  if (config.question) {
    examples.push_back(QAExample{"q1", *config.question, {}, {}});
  } else {
    examples = load_dataset(config.dataset_path);
  }

  std::unique_ptr<LlmProvider> llm = make_llm(config);
  PromptLibrary prompts = PromptLibrary::load(config.prompt_dir, config.demo_dir);
  prompts.limit_demos(config.demo_count);

  fs::create_directories(config.output_dir / "traces");
  detail::write_file((config.output_dir / "run_config.json").string(), run_config_to_json(config));

  bool reproducible = llm->deterministic() && loaded.spec.kind != "remote" &&
                      !(loaded.spec.kind == "precomputed" && loaded.spec.query_kind == "remote");
  ordered_json manifest;
  manifest["llm_provider"] = llm->id();
  manifest["embedding_provider"] = loaded.index.provider_id();
  manifest["index_size"] = loaded.index.size();
  manifest["questions"] = examples.size();
  manifest["reproducible"] = reproducible;
  detail::write_file((config.output_dir / "manifest.json").string(), manifest.dump(2) + "\n");

  std::vector<QuestionOutcome> outcomes(examples.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < examples.size(); i = next++) {
      const QAExample& ex = examples[i];
      try {
        outcomes[i] = answer_question(ex.id, ex.question, config, loaded.index,
                                      *loaded.query_embedder, *llm, prompts);
      } catch (const std::exception& e) {
        outcomes[i].id = ex.id;
        outcomes[i].question = ex.question;
        outcomes[i].error = e.what();
        std::lock_guard lock(log_mutex);
        log << "question " << ex.id << " failed: " << e.what() << "\n";
      }
    }
  };
  std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.parallel), examples.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  RunSummary summary;
  summary.questions = examples.size();
  std::string answers;
  for (const QuestionOutcome& o : outcomes) {
    detail::write_file((config.output_dir / "traces" / trace_file_name(o.id)).string(),
                       outcome_trace_json(o));
    RunStats stats = o.tree ? o.tree->stats : RunStats{};
    int fusion_calls = o.answer ? o.answer->fusion_calls : 0;
    if (!o.error.empty()) ++summary.failed;
    accumulate(summary.totals, stats);
    summary.fusion_calls += fusion_calls;

    ordered_json record;
    record["id"] = o.id;
    record["question"] = o.question;
    record["prediction"] = o.answer ? o.answer->extracted_answer : std::string();
    record["full_response"] = o.answer ? o.answer->full_response : std::string();
    record["answer_pattern_found"] = o.answer && o.answer->answer_pattern_found;
    record["retrieved_ids"] = o.retrieved_ids;
    record["stats"] = stats_json(stats);
    record["fusion_calls"] = fusion_calls;
    if (!o.error.empty()) record["error"] = o.error;
    answers += record.dump() + "\n";
  }
  detail::write_file((config.output_dir / "answers.jsonl").string(), answers);

  ordered_json stats;
  stats["questions"] = summary.questions;
  stats["failed"] = summary.failed;
  stats["totals"] = stats_json(summary.totals);
  stats["fusion_calls"] = summary.fusion_calls;
  detail::write_file((config.output_dir / "stats.json").string(), stats.dump(2) + "\n");
  return summary;
}

std::vector<ExampleResult> load_answers(const fs::path& answers_path) {
  std::ifstream in(answers_path);
  if (!in) throw Error("cannot open " + answers_path.string());
  std::vector<ExampleResult> results;
  detail::for_each_jsonl(in, [&](const json& r, std::size_t line) {
    ExampleResult res;
    res.id = detail::require_string(r, "id", line);
    res.prediction = r.value("prediction", std::string());
    try {
      res.retrieved_ids = r.value("retrieved_ids", std::vector<std::string>{});
      res.stats = stats_from_json(r.value("stats", json::object()));
      res.fusion_calls = r.value("fusion_calls", 0);
    } catch (const json::exception& e) {
      throw FormatError(e.what(), line);
    }
    results.push_back(std::move(res));
  });
  return results;
}

MetricsReport cmd_eval(const fs::path& dataset_path, const fs::path& run_dir) {
  std::vector<QAExample> dataset = load_dataset(dataset_path);
  std::vector<ExampleResult> results = load_answers(run_dir / "answers.jsonl");
  MetricsReport report = evaluate_run(dataset, results);
  detail::write_file((run_dir / "report.json").string(), report_to_json(report));
  detail::write_file((run_dir / "report.txt").string(), report_to_table(report));
  return report;
}

}  // namespace tor
