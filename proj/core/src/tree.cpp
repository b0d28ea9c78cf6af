#include "tor/tree.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "tor/error.hpp"

namespace tor {

std::string_view to_string(RepetitiveScope s) noexcept {
  return s == RepetitiveScope::AcceptedOnly ? "accepted" : "seen";
}

void TreeConfig::validate() const {
  if (widths.empty()) throw ConfigError("tree needs at least one layer");
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("tree layer widths must be positive");
  }
}

std::size_t max_review_calls(const std::vector<std::size_t>& widths) {
  std::size_t total = 0;
  std::size_t layer = 1;
  for (std::size_t w : widths) {
    layer *= w;
    total += layer;
  }
  return total;
}

void EvidencePool::add(Evidence evidence) {
  for (const Paragraph& p : evidence.path) accepted_ids_.insert(p.id);
  evidences_.push_back(std::move(evidence));
}

double RunStats::rate() const noexcept {
  return api_calls > 0 ? static_cast<double>(distinct_docs) / api_calls : 0.0;
}

namespace {

void apply_decision(TraceNode& node, const ReviewResult& review) {
  node.calls = review.calls;
  node.mpc = review.mpc;
  if (const auto* failure = std::get_if<ParseFailure>(&review.outcome)) {
    node.decision = "parse_failure";
    node.failure_reason = failure->reason;
    return;
  }
  const auto& d = std::get<ReviewDecision>(review.outcome);
  node.decision = std::string(to_string(d.action));
  node.thought = d.thought;
  node.new_query = d.new_query;
  node.brief_analysis = d.brief_analysis;
  node.supported = d.supported;
}

TraceNode root_node(std::string_view question) {
  TraceNode root;
  root.decision = "root";
  root.incoming_query = std::string(question);
  return root;
}

class TreeSearch {
 public:
  TreeSearch(std::string_view question, const TreeConfig& config, const CorpusIndex& index,
             const EmbeddingProvider& embedder, LlmSession& session, const PromptLibrary& prompts)
      : question_(question),
        config_(config),
        index_(index),
        embedder_(embedder),
        session_(session),
        prompts_(prompts),
        first_call_(session.calls()) {}

  TreeResult run() {
    result_.trace.mode = "tor";
    result_.trace.question = question_;
    result_.trace.notes.push_back("within-path filtering is applied after the top-k cut");
    result_.trace.nodes.push_back(root_node(question_));

    std::vector<Paragraph> path;
    expand(0, path, question_, 1);

    result_.stats.api_calls = session_.calls() - first_call_;
    result_.stats.distinct_docs = static_cast<int>(retrieved_.size());
    result_.stats.evidence_count = static_cast<int>(result_.pool.size());
    return std::move(result_);
  }

 private:
  bool blocked_by_repetition(const std::string& id) const {
    if (result_.pool.contains(id)) return true;
    return config_.repetitive_scope == RepetitiveScope::SeenAnywhere && reviewed_.contains(id);
  }

  // Retrieves children of `parent` for `query` at layer `depth` and visits
  // them in rank order.
  void expand(int parent, std::vector<Paragraph>& path, const std::string& query,
              std::size_t depth) {
    std::vector<RetrievalHit> hits;
    try {
      hits = index_.retrieve(query, static_cast<int>(config_.widths[depth - 1]), embedder_);
    } catch (const std::exception& e) {
      ++result_.stats.provider_errors;
      result_.trace.nodes[static_cast<std::size_t>(parent)].failure_reason =
          std::string("retrieval failed: ") + e.what();
      return;
    }
    for (const RetrievalHit& hit : hits) retrieved_.insert(hit.paragraph.id);

    for (std::size_t rank = 0; rank < hits.size(); ++rank) {
      const Paragraph& paragraph = hits[rank].paragraph;
      auto& parent_node = result_.trace.nodes[static_cast<std::size_t>(parent)];
      bool on_path = std::any_of(path.begin(), path.end(),
                                 [&](const Paragraph& p) { return p.id == paragraph.id; });
      if (config_.within_path_dedup && on_path) {
        ++result_.stats.pruned_within_path;
        parent_node.pruned.push_back({paragraph.id, "within_path"});
        continue;
      }
      if (config_.repetitive_pruning && blocked_by_repetition(paragraph.id)) {
        ++result_.stats.pruned_repetitive;
        parent_node.pruned.push_back({paragraph.id, "repetitive"});
        continue;
      }

      int node_id = static_cast<int>(result_.trace.nodes.size());
      TraceNode node;
      node.id = node_id;
      node.parent = parent;
      node.depth = static_cast<int>(depth);
      node.paragraph_id = paragraph.id;
      node.incoming_query = query;
      node.rank = static_cast<int>(rank + 1);
      node.score = hits[rank].score;
      parent_node.children.push_back(node_id);
      result_.trace.nodes.push_back(std::move(node));
      reviewed_.insert(paragraph.id);

      path.push_back(paragraph);
      visit(node_id, path, query, depth);
      path.pop_back();
    }
  }

  TraceNode& node(int id) { return result_.trace.nodes[static_cast<std::size_t>(id)]; }

  void visit(int id, std::vector<Paragraph>& path, const std::string& incoming_query,
             std::size_t depth) {
    const bool can_expand = depth < config_.max_depth();
    ReviewResult review;
    try {
      review = review_path(question_, path, config_.expansion, session_, prompts_, can_expand);
    } catch (const std::exception& e) {
      ++result_.stats.provider_errors;
      node(id).decision = "provider_error";
      node(id).failure_reason = e.what();
      return;
    }
    apply_decision(node(id), review);

    if (std::holds_alternative<ParseFailure>(review.outcome)) {
      ++result_.stats.parse_failures;
      return;
    }
    const auto& decision = std::get<ReviewDecision>(review.outcome);
    switch (decision.action) {
      case ReviewAction::Accept:
        result_.pool.add(Evidence{path, decision.brief_analysis, review.calls.front().call_index});
        return;
      case ReviewAction::Search:
        if (!can_expand) {
          node(id).exhausted = true;
          ++result_.stats.exhausted_paths;
          return;
        }
        expand(id, path, decision.new_query, depth + 1);
        return;
      case ReviewAction::Reject:
        if (!can_expand) return;
        if (config_.relevance_pruning) {
          ++result_.stats.pruned_relevance;
          return;
        }
        expand_rejected(id, path, incoming_query, depth);
        return;
    }
  }

  // Without relevance pruning a rejected node is still expanded. Reject
  // carries no query, so MPC generates one and Direct/CoT reuse the query
  // that retrieved the node.
  void expand_rejected(int id, std::vector<Paragraph>& path, const std::string& incoming_query,
                       std::size_t depth) {
    if (config_.expansion != ExpansionStrategy::Mpc) {
      expand(id, path, incoming_query, depth + 1);
      return;
    }
    MpcResult mpc;
    try {
      mpc = generate_mpc_query(question_, path, session_, prompts_);
    } catch (const std::exception& e) {
      ++result_.stats.provider_errors;
      node(id).failure_reason = e.what();
      return;
    }
    node(id).calls.push_back(mpc.call);
    if (auto* failure = std::get_if<ParseFailure>(&mpc.outcome)) {
      ++result_.stats.parse_failures;
      node(id).failure_reason = failure->reason;
      return;
    }
    auto& completion = std::get<MpcCompletion>(mpc.outcome);
    node(id).mpc = completion;
    expand(id, path, completion.info, depth + 1);
  }

  std::string question_;
  const TreeConfig& config_;
  const CorpusIndex& index_;
  const EmbeddingProvider& embedder_;
  LlmSession& session_;
  const PromptLibrary& prompts_;
  int first_call_;

  TreeResult result_;
  std::unordered_set<std::string> retrieved_;
  std::unordered_set<std::string> reviewed_;
};

}  // namespace

TreeResult run_tree(std::string_view question, const TreeConfig& config, const CorpusIndex& index,
                    const EmbeddingProvider& embedder, LlmSession& session,
                    const PromptLibrary& prompts) {
  config.validate();
  if (index.empty()) throw ConfigError("run_tree: corpus index is empty");
  if (question.empty()) throw std::invalid_argument("run_tree: empty question");
  return TreeSearch(question, config, index, embedder, session, prompts).run();
}

TreeResult run_chain(std::string_view question, const ChainConfig& config,
                     const CorpusIndex& index, const EmbeddingProvider& embedder,
                     LlmSession& session, const PromptLibrary& prompts) {
  if (config.max_turns < 1) throw ConfigError("run_chain: max_turns must be >= 1");
  if (config.per_turn_k < 1) throw ConfigError("run_chain: per_turn_k must be >= 1");
  if (index.empty()) throw ConfigError("run_chain: corpus index is empty");

  const int first_call = session.calls();
  TreeResult result;
  result.trace.mode = "cor";
  result.trace.question = std::string(question);
  result.trace.nodes.push_back(root_node(question));

  std::vector<Paragraph> context;
  std::unordered_set<std::string> in_context;
  std::string query(question);
  int parent = 0;

  for (int turn = 1; turn <= config.max_turns; ++turn) {
    std::vector<RetrievalHit> hits = index.retrieve(query, config.per_turn_k, embedder);
    for (const RetrievalHit& hit : hits) {
      if (in_context.insert(hit.paragraph.id).second) context.push_back(hit.paragraph);
    }

    TraceNode node;
    node.id = static_cast<int>(result.trace.nodes.size());
    node.parent = parent;
    node.depth = turn;
    node.incoming_query = query;
    for (const Paragraph& p : context) node.context_ids.push_back(p.id);
    result.trace.nodes[static_cast<std::size_t>(parent)].children.push_back(node.id);
    result.trace.nodes.push_back(std::move(node));
    TraceNode& current = result.trace.nodes.back();
    parent = current.id;

    ReviewResult review;
    try {
      review = review_with_template(TemplateName::Cor, question, context, session, prompts);
    } catch (const std::exception& e) {
      ++result.stats.provider_errors;
      current.decision = "provider_error";
      current.failure_reason = e.what();
      break;
    }
    apply_decision(current, review);
    if (std::holds_alternative<ParseFailure>(review.outcome)) {
      ++result.stats.parse_failures;
      break;
    }
    const auto& decision = std::get<ReviewDecision>(review.outcome);
    if (decision.action == ReviewAction::Accept) {
      result.pool.add(Evidence{context, decision.brief_analysis, review.calls.front().call_index});
      break;
    }
    if (decision.action == ReviewAction::Reject) break;
    if (turn == config.max_turns) {
      current.exhausted = true;
      ++result.stats.exhausted_paths;
      break;
    }
    query = decision.new_query;
  }

  result.stats.api_calls = session.calls() - first_call;
  result.stats.distinct_docs = static_cast<int>(in_context.size());
  result.stats.evidence_count = static_cast<int>(result.pool.size());
  return result;
}

TreeResult run_oner(std::string_view question, int k, const CorpusIndex& index,
                    const EmbeddingProvider& embedder) {
  if (k < 1) throw ConfigError("run_oner: k must be >= 1");
  std::vector<RetrievalHit> hits = index.retrieve(question, k, embedder);

  TreeResult result;
  result.trace.mode = "oner";
  result.trace.question = std::string(question);
  result.trace.nodes.push_back(root_node(question));

  Evidence evidence;
  TraceNode node;
  node.id = 1;
  node.depth = 1;
  node.parent = 0;
  node.incoming_query = std::string(question);
  node.decision = "retrieved";
  for (const RetrievalHit& hit : hits) {
    evidence.path.push_back(hit.paragraph);
    node.context_ids.push_back(hit.paragraph.id);
  }
  result.trace.nodes[0].children.push_back(1);
  result.trace.nodes.push_back(std::move(node));
  result.pool.add(std::move(evidence));

  result.stats.distinct_docs = static_cast<int>(hits.size());
  result.stats.evidence_count = 1;
  return result;
}

}  // namespace tor
