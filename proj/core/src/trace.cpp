#include "jsonl.hpp"
#include "tor/tree.hpp"

namespace tor {

namespace {

using detail::ordered_json;

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

ordered_json node_json(const TraceNode& n) {
  ordered_json j;
  j["id"] = n.id;
  j["parent"] = n.parent;
  j["depth"] = n.depth;
  if (!n.paragraph_id.empty()) j["paragraph_id"] = n.paragraph_id;
  if (!n.context_ids.empty()) j["context_ids"] = n.context_ids;
  j["query"] = n.incoming_query;
  if (n.rank > 0) {
    j["rank"] = n.rank;
    j["score"] = n.score;
  }
  j["decision"] = n.decision;
  if (!n.thought.empty()) j["thought"] = n.thought;
  if (n.supported) j["supported"] = *n.supported;
  if (!n.new_query.empty()) j["new_query"] = n.new_query;
  if (!n.brief_analysis.empty()) j["brief_analysis"] = n.brief_analysis;
  if (!n.failure_reason.empty()) j["failure_reason"] = n.failure_reason;
  if (n.exhausted) j["exhausted"] = true;
  if (n.mpc) {
    j["mpc"] = ordered_json{{"info", n.mpc->info}, {"answer", n.mpc->answer}};
  }
  if (!n.calls.empty()) {
    ordered_json calls = ordered_json::array();
    for (const CallRecord& c : n.calls) {
      calls.push_back(ordered_json{{"call_index", c.call_index},
                                   {"template", std::string(to_string(c.template_name))},
                                   {"response", c.response}});
    }
    j["calls"] = std::move(calls);
  }
  if (!n.pruned.empty()) {
    ordered_json pruned = ordered_json::array();
    for (const PrunedCandidate& p : n.pruned) {
      pruned.push_back(ordered_json{{"paragraph_id", p.paragraph_id}, {"reason", p.reason}});
    }
    j["pruned"] = std::move(pruned);
  }
  j["children"] = n.children;
  return j;
}

}  // namespace

std::string trace_to_json(const TreeResult& result) {
  ordered_json doc;
  doc["mode"] = result.trace.mode;
  doc["question"] = result.trace.question;
  doc["notes"] = result.trace.notes;
  doc["stats"] = stats_json(result.stats);

  ordered_json evidence = ordered_json::array();
  for (const Evidence& e : result.pool.evidences()) {
    ordered_json item;
    std::vector<std::string> ids;
    for (const Paragraph& p : e.path) ids.push_back(p.id);
    item["path"] = ids;
    item["brief_analysis"] = e.brief_analysis;
    item["accepted_at_call"] = e.accepted_at_call;
    evidence.push_back(std::move(item));
  }
  doc["evidence"] = std::move(evidence);

  ordered_json nodes = ordered_json::array();
  for (const TraceNode& n : result.trace.nodes) nodes.push_back(node_json(n));
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

}  // namespace tor
