#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tor/corpus.hpp"
#include "tor/eval.hpp"
#include "tor/fusion.hpp"
#include "tor/llm.hpp"
#include "tor/tree.hpp"

namespace tor {

// How paragraph and query vectors are produced.
struct EmbedderSpec {
  std::string kind = "hash";  // hash | remote | precomputed
  std::size_t dim = 256;
  std::filesystem::path precomputed_path;  // precomputed only
  std::string query_kind = "hash";         // precomputed only: hash | remote
};

struct IngestConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path index_dir;
  EmbedderSpec embedder;
  bool embed_title = true;
  std::uint64_t seed = 0;
};

struct IngestSummary {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::string provider_id;
  std::string checksum;
};

// Writes <index_dir>/index.jsonl and <index_dir>/manifest.json.
IngestSummary cmd_ingest(const IngestConfig& config);

struct LoadedIndex {
  CorpusIndex index;
  std::shared_ptr<const EmbeddingProvider> query_embedder;
  EmbedderSpec spec;
  std::uint64_t seed = 0;
};

LoadedIndex load_index_dir(const std::filesystem::path& index_dir);

struct RunConfig {
  std::string mode = "tor";  // tor | cor | oner
  TreeConfig tree;
  ChainConfig chain;
  int oner_k = 5;
  FusionStrategy fusion = FusionStrategy::EvidenceBased;
  std::size_t budget_tokens = 4096;
  TokenEstimator estimator = TokenEstimator::Whitespace;
  std::size_t scored_limit = 15;

  std::string provider = "scripted";  // scripted | remote
  std::filesystem::path rules_path;
  std::optional<std::filesystem::path> prompt_dir;
  std::optional<std::filesystem::path> demo_dir;
  std::size_t demo_count = PromptLibrary::kDefaultDemoCount;
  int retry_attempts = 3;
  int retry_backoff_ms = 500;

  std::filesystem::path index_dir;
  std::filesystem::path dataset_path;
  std::optional<std::string> question;  // single question instead of a dataset
  std::filesystem::path output_dir;

  std::uint64_t seed = 0;
  int parallel = 1;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(std::string_view json);

struct QuestionOutcome {
  std::string id;
  std::string question;
  std::optional<TreeResult> tree;
  std::optional<AnswerResult> answer;
  std::vector<std::string> retrieved_ids;
  std::string error;  // nonempty when the question failed
};

struct RunSummary {
  std::size_t questions = 0;
  std::size_t failed = 0;
  RunStats totals;
  int fusion_calls = 0;
};

// Answers one question end to end: search (tor/cor/oner), fusion, scored
// paragraph selection. Provider failures inside the search degrade; a failing
// fusion call throws.
QuestionOutcome answer_question(const std::string& id, const std::string& question,
                                const RunConfig& config, const CorpusIndex& index,
                                const EmbeddingProvider& embedder, const LlmProvider& llm,
                                const PromptLibrary& prompts);

// Runs every question and writes into config.output_dir:
//   run_config.json    resolved configuration
//   manifest.json      provider ids and reproducibility flag
//   traces/<id>.json   one trace per question
//   answers.jsonl      one record per question, dataset order
//   stats.json         aggregate RunStats
// Per-question failures are logged to `log` and recorded; they do not abort.
RunSummary cmd_run(const RunConfig& config, std::ostream& log);

// Reads answers.jsonl from `run_dir`, scores it against the dataset and writes
// report.json and report.txt into `run_dir`.
MetricsReport cmd_eval(const std::filesystem::path& dataset_path,
                       const std::filesystem::path& run_dir);

std::vector<ExampleResult> load_answers(const std::filesystem::path& answers_path);

}  // namespace tor
