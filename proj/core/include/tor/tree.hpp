#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tor/corpus.hpp"
#include "tor/llm.hpp"
#include "tor/review.hpp"

namespace tor {

enum class RepetitiveScope {
  AcceptedOnly,  // ids inside accepted evidence
  SeenAnywhere,  // ids of any node already reviewed
};

std::string_view to_string(RepetitiveScope s) noexcept;

struct TreeConfig {
  // widths[d] is the retrieval k for layer d+1; the tree depth is widths.size().
  std::vector<std::size_t> widths{5, 3, 3};
  bool relevance_pruning = true;
  bool repetitive_pruning = true;
  RepetitiveScope repetitive_scope = RepetitiveScope::AcceptedOnly;
  bool within_path_dedup = true;
  ExpansionStrategy expansion = ExpansionStrategy::Mpc;

  std::size_t max_depth() const noexcept { return widths.size(); }

  // Throws ConfigError for an empty width list or a zero width.
  void validate() const;
};

// Upper bound on review calls for Direct/CoT expansion:
// sum over d of prod_{j<=d} widths[j].
std::size_t max_review_calls(const std::vector<std::size_t>& widths);

struct ChainConfig {
  int max_turns = 3;
  int per_turn_k = 5;
};

// An accepted reasoning path with its brief analysis. OneR pseudo-evidence is
// the only kind with an empty analysis.
struct Evidence {
  std::vector<Paragraph> path;
  std::string brief_analysis;
  int accepted_at_call = 0;
};

class EvidencePool {
 public:
  void add(Evidence evidence);

  const std::vector<Evidence>& evidences() const noexcept { return evidences_; }
  const std::set<std::string>& accepted_ids() const noexcept { return accepted_ids_; }
  bool contains(const std::string& id) const { return accepted_ids_.contains(id); }
  std::size_t size() const noexcept { return evidences_.size(); }
  bool empty() const noexcept { return evidences_.empty(); }

 private:
  std::vector<Evidence> evidences_;
  std::set<std::string> accepted_ids_;
};

struct RunStats {
  int api_calls = 0;
  int distinct_docs = 0;
  int evidence_count = 0;
  int parse_failures = 0;
  int provider_errors = 0;
  int pruned_repetitive = 0;
  int pruned_relevance = 0;
  int pruned_within_path = 0;
  int exhausted_paths = 0;

  // distinct_docs / api_calls, 0 when no calls were made.
  double rate() const noexcept;

  friend bool operator==(const RunStats&, const RunStats&) = default;
};

struct PrunedCandidate {
  std::string paragraph_id;
  std::string reason;  // "repetitive" or "within_path"
};

// One node of the audit trace. Node 0 is the root and holds the question.
struct TraceNode {
  int id = 0;
  int parent = -1;
  int depth = 0;
  std::string paragraph_id;
  std::vector<std::string> context_ids;  // chain mode: the whole reviewed context
  std::string incoming_query;            // query whose retrieval produced the node
  int rank = 0;                          // 1-based rank in that retrieval
  double score = 0.0;
  // root | accept | search | reject | parse_failure | provider_error
  std::string decision;
  std::string thought;
  std::string new_query;
  std::string brief_analysis;
  std::optional<bool> supported;
  std::string failure_reason;
  std::vector<CallRecord> calls;
  std::optional<MpcCompletion> mpc;
  bool exhausted = false;  // Search at the maximum depth
  std::vector<PrunedCandidate> pruned;
  std::vector<int> children;
};

struct Trace {
  std::string mode;  // tor | cor | oner
  std::string question;
  std::vector<TraceNode> nodes;
  std::vector<std::string> notes;
};

struct TreeResult {
  EvidencePool pool;
  RunStats stats;
  Trace trace;
};

// Depth-first Tree of Reviews over `index`. Layer 1 is the top widths[0]
// paragraphs for the question; children are visited in retrieval rank order.
// Provider and parse failures degrade to Reject and are tallied.
TreeResult run_tree(std::string_view question, const TreeConfig& config, const CorpusIndex& index,
                    const EmbeddingProvider& embedder, LlmSession& session,
                    const PromptLibrary& prompts);

// Chain-of-reviews baseline: one path whose context accumulates every
// retrieved paragraph, reviewed with the CoR template each turn.
TreeResult run_chain(std::string_view question, const ChainConfig& config,
                     const CorpusIndex& index, const EmbeddingProvider& embedder,
                     LlmSession& session, const PromptLibrary& prompts);

// One-step retrieval: a single pseudo-evidence holding the top-k paragraphs.
// No completion calls happen here.
TreeResult run_oner(std::string_view question, int k, const CorpusIndex& index,
                    const EmbeddingProvider& embedder);

// Pretty-printed JSON document with the trace, evidence pool and stats.
// Byte-stable for identical inputs.
std::string trace_to_json(const TreeResult& result);

}  // namespace tor
