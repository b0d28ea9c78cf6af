// tor: ingest a corpus, run Tree of Reviews (or a baseline) over questions,
// and score the answers.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tor/app.hpp"
#include "tor/error.hpp"

namespace fs = std::filesystem;

namespace {

struct IngestArgs {
  std::string corpus;
  std::string index;
  std::string embedder = "hash";
  std::size_t dim = 256;
  std::string vectors;
  std::string query_embedder = "hash";
  bool no_title = false;
  std::uint64_t seed = 0;
};

// Everything `run` accepts. Values are only applied on top of the base
// config (defaults or --config) when the flag was actually given.
struct RunArgs {
  std::string config;
  std::string mode;
  std::size_t depth = 0;
  std::vector<std::size_t> widths;
  std::string expansion;
  std::string fusion;
  bool no_relevance = false;
  bool no_repetitive = false;
  std::string repetitive_scope;
  bool no_within_path_dedup = false;
  std::size_t budget = 0;
  std::string estimator;
  int k = 0;
  int max_turns = 0;
  std::size_t scored_limit = 0;
  std::string provider;
  std::string rules;
  std::string prompt_dir;
  std::string demos_dir;
  std::size_t demo_count = 0;
  int retries = 0;
  int backoff_ms = 0;
  std::string index;
  std::string dataset;
  std::string question;
  std::string out;
  std::uint64_t seed = 0;
  int parallel = 1;
};

struct EvalArgs {
  std::string dataset;
  std::string run;
};

bool given(const CLI::App& app, const std::string& name) { return app.count(name) > 0; }

std::uint64_t index_seed(const fs::path& index_dir) {
  std::ifstream in(index_dir / "manifest.json");
  if (!in) return 0;
  try {
    return nlohmann::json::parse(in).value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception&) {
    return 0;
  }
}

tor::RunConfig build_run_config(const CLI::App& app, const RunArgs& a) {
  tor::RunConfig c;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw tor::ConfigError("cannot open " + a.config);
    std::stringstream buf;
    buf << in.rdbuf();
    c = tor::run_config_from_json(buf.str());
  }

  if (given(app, "--mode")) c.mode = a.mode;
  if (given(app, "--widths")) c.tree.widths = a.widths;
  if (given(app, "--depth")) {
    if (a.depth == 0) throw tor::ConfigError("--depth must be at least 1");
    if (given(app, "--widths")) {
      if (a.widths.size() != a.depth) {
        throw tor::ConfigError("--depth " + std::to_string(a.depth) + " disagrees with " +
                               std::to_string(a.widths.size()) + " --widths values");
      }
    } else {
      // First layer keeps its width, deeper layers take the last one.
      std::vector<std::size_t> w = c.tree.widths;
      w.resize(a.depth, w.empty() ? 3 : w.back());
      c.tree.widths = w;
    }
  }
  if (given(app, "--expansion")) c.tree.expansion = *tor::parse_expansion(a.expansion);
  if (given(app, "--fusion")) c.fusion = *tor::parse_fusion(a.fusion);
  if (a.no_relevance) c.tree.relevance_pruning = false;
  if (a.no_repetitive) c.tree.repetitive_pruning = false;
  if (given(app, "--repetitive-scope")) {
    c.tree.repetitive_scope = a.repetitive_scope == "seen" ? tor::RepetitiveScope::SeenAnywhere
                                                           : tor::RepetitiveScope::AcceptedOnly;
  }
  if (a.no_within_path_dedup) c.tree.within_path_dedup = false;
  if (given(app, "--budget")) c.budget_tokens = a.budget;
  if (given(app, "--estimator")) c.estimator = *tor::parse_token_estimator(a.estimator);
  if (given(app, "--k")) {
    c.oner_k = a.k;
    c.chain.per_turn_k = a.k;
  }
  if (given(app, "--max-turns")) c.chain.max_turns = a.max_turns;
  if (given(app, "--scored-limit")) c.scored_limit = a.scored_limit;
  if (given(app, "--provider")) c.provider = a.provider;
  if (given(app, "--rules")) c.rules_path = a.rules;
  if (given(app, "--prompt-dir")) c.prompt_dir = a.prompt_dir;
  if (given(app, "--demos-dir")) c.demo_dir = a.demos_dir;
  if (given(app, "--demo-count")) c.demo_count = a.demo_count;
  if (given(app, "--retries")) c.retry_attempts = a.retries;
  if (given(app, "--backoff-ms")) c.retry_backoff_ms = a.backoff_ms;
  if (given(app, "--index")) c.index_dir = a.index;
  if (given(app, "--dataset")) {
    c.dataset_path = a.dataset;
    c.question.reset();
  }
  if (given(app, "--question")) {
    c.question = a.question;
    c.dataset_path.clear();
  }
  if (given(app, "--out")) c.output_dir = a.out;
  if (given(app, "--parallel")) c.parallel = a.parallel;
  if (given(app, "--seed")) {
    c.seed = a.seed;
  } else if (a.config.empty()) {
    c.seed = index_seed(c.index_dir);
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree of Reviews retrieval and answering"};
  app.require_subcommand(1);

  IngestArgs ia;
  CLI::App* ingest = app.add_subcommand("ingest", "Embed a corpus into an index directory");
  ingest->add_option("--corpus", ia.corpus, "Line-delimited {id, title, text} records")
      ->required();
  ingest->add_option("--index", ia.index, "Output index directory")->required();
  ingest->add_option("--embedder", ia.embedder, "Paragraph embedder")
      ->check(CLI::IsMember({"hash", "remote", "precomputed"}));
  ingest->add_option("--dim", ia.dim, "Embedding dimension");
  ingest->add_option("--vectors", ia.vectors, "Precomputed {id, values} file");
  ingest->add_option("--query-embedder", ia.query_embedder,
                     "Query embedder for precomputed vectors")
      ->check(CLI::IsMember({"hash", "remote"}));
  ingest->add_flag("--no-title", ia.no_title, "Embed paragraph text without its title");
  ingest->add_option("--seed", ia.seed, "Seed of the hash embedder");

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "Answer questions and write traces");
  run->add_option("--config", ra.config, "Start from a saved run_config.json");
  run->add_option("--mode", ra.mode, "Search mode")->check(CLI::IsMember({"tor", "cor", "oner"}));
  run->add_option("--depth", ra.depth, "Maximum tree depth");
  run->add_option("--widths", ra.widths, "Retrieval width per layer, e.g. 5,3,3")
      ->delimiter(',');
  run->add_option("--expansion", ra.expansion, "Query expansion strategy")
      ->check(CLI::IsMember({"direct", "cot", "mpc"}));
  run->add_option("--fusion", ra.fusion, "Evidence fusion strategy")
      ->check(CLI::IsMember({"analysis", "paragraph", "evidence"}));
  run->add_flag("--no-relevance-pruning", ra.no_relevance, "Expand rejected paragraphs too");
  run->add_flag("--no-repetitive-pruning", ra.no_repetitive,
                "Review paragraphs already inside accepted evidence");
  run->add_option("--repetitive-scope", ra.repetitive_scope, "What counts as already seen")
      ->check(CLI::IsMember({"accepted", "seen"}));
  run->add_flag("--no-within-path-dedup", ra.no_within_path_dedup,
                "Allow a paragraph to repeat on one path");
  run->add_option("--budget", ra.budget, "Token budget of the fusion prompt");
  run->add_option("--estimator", ra.estimator, "Token estimator")
      ->check(CLI::IsMember({"whitespace", "chars4"}));
  run->add_option("--k", ra.k, "Retrieval k for oner and cor");
  run->add_option("--max-turns", ra.max_turns, "Turns of the cor chain");
  run->add_option("--scored-limit", ra.scored_limit, "Paragraphs kept for recall");
  run->add_option("--provider", ra.provider, "Completion provider")
      ->check(CLI::IsMember({"scripted", "remote"}));
  run->add_option("--rules", ra.rules, "Scripted oracle rules file");
  run->add_option("--prompt-dir", ra.prompt_dir, "Instruction overrides");
  run->add_option("--demos-dir", ra.demos_dir, "Demonstration overrides");
  run->add_option("--demo-count", ra.demo_count, "Demonstrations per template");
  run->add_option("--retries", ra.retries, "Attempts per completion on transport errors");
  run->add_option("--backoff-ms", ra.backoff_ms, "Initial retry backoff");
  run->add_option("--index", ra.index, "Index directory");
  run->add_option("--dataset", ra.dataset, "Line-delimited questions");
  run->add_option("--question", ra.question, "Answer a single question");
  run->add_option("--out", ra.out, "Output directory");
  run->add_option("--seed", ra.seed, "Run seed (defaults to the index seed)");
  run->add_option("--parallel", ra.parallel, "Questions answered concurrently");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "Score a run directory");
  eval->add_option("--dataset", ea.dataset, "Dataset with gold answers")->required();
  eval->add_option("--run", ea.run, "Run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      tor::IngestConfig config;
      config.corpus_path = ia.corpus;
      config.index_dir = ia.index;
      config.embedder.kind = ia.embedder;
      config.embedder.dim = ia.dim;
      config.embedder.precomputed_path = ia.vectors;
      config.embedder.query_kind = ia.query_embedder;
      config.embed_title = !ia.no_title;
      config.seed = ia.seed;
      tor::IngestSummary s = tor::cmd_ingest(config);
      std::cout << "indexed " << s.count << " paragraphs (" << s.provider_id << ", checksum "
                << s.checksum << ")\n";
    } else if (*run) {
      tor::RunConfig config = build_run_config(*run, ra);
      tor::RunSummary s = tor::cmd_run(config, std::cerr);
      std::cout << "answered " << s.questions - s.failed << "/" << s.questions
                << " questions, " << s.totals.api_calls << " review calls, " << s.fusion_calls
                << " fusion calls; output in " << config.output_dir.string() << "\n";
    } else if (*eval) {
      tor::MetricsReport report = tor::cmd_eval(ea.dataset, ea.run);
      std::cout << tor::report_to_table(report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
