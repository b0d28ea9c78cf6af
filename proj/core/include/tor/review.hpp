#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tor/corpus.hpp"
#include "tor/llm.hpp"

namespace tor {

enum class ReviewAction { Reject, Search, Accept };

std::string_view to_string(ReviewAction a) noexcept;

// Outcome of one paragraphs review. Search carries a nonempty new query,
// Accept a nonempty brief analysis, Reject neither.
struct ReviewDecision {
  ReviewAction action = ReviewAction::Reject;
  std::string thought;
  std::string new_query;
  std::string brief_analysis;
  // Step-2 judgment when the model emitted one. Recorded only; the step-3
  // action token decides.
  std::optional<bool> supported;

  static ReviewDecision reject(std::string thought = {});
  static ReviewDecision search(std::string query, std::string thought = {});
  static ReviewDecision accept(std::string analysis, std::string thought = {});

  bool valid() const noexcept;

  friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

struct ParseFailure {
  std::string raw_text;
  std::string reason;
  int step_reached = 1;

  friend bool operator==(const ParseFailure&, const ParseFailure&) = default;
};

using ReviewOutcome = std::variant<ReviewDecision, ParseFailure>;

enum class ExpansionStrategy { Direct, CoT, Mpc };

std::string_view to_string(ExpansionStrategy s) noexcept;
std::optional<ExpansionStrategy> parse_expansion(std::string_view s) noexcept;

// Parses the three-step review format. Never throws.
//
//   step 1: the first of [RELEVANT] / [IRRELEVANT]; [IRRELEVANT] is a Reject
//           no matter what follows.
//   step 2: optional [SUPPORTED] / [UNSUPPORTED], recorded only.
//   step 3: exactly one of [ANSWER] / [QUERY] after step 1, with a nonempty
//           payload.
//
// A payload is the rest of its line up to the next "- Field:" label; when that
// is empty it continues on the following lines until a labeled line.
ReviewOutcome parse_review_output(std::string_view text);

// The response a well-behaved model would give for `decision`.
std::string render_canonical_review(const ReviewDecision& decision);

struct MpcCompletion {
  std::string info;    // generated missing paragraph, used as the next query
  std::string answer;  // kept for the trace only

  friend bool operator==(const MpcCompletion&, const MpcCompletion&) = default;
};

std::variant<MpcCompletion, ParseFailure> parse_mpc_output(std::string_view text);
std::string render_canonical_mpc(const MpcCompletion& completion);

// "#1 <title>\n<text>" blocks joined by newlines, in path order.
std::string render_documents(std::span<const Paragraph> paragraphs);

struct CallRecord {
  int call_index = 0;
  TemplateName template_name = TemplateName::ReviewCot;
  std::string response;
};

struct ReviewResult {
  ReviewOutcome outcome;
  std::vector<CallRecord> calls;
  std::optional<MpcCompletion> mpc;
};

struct MpcResult {
  std::variant<MpcCompletion, ParseFailure> outcome;
  CallRecord call;
};

// One review completion over `path` with an explicit template.
ReviewResult review_with_template(TemplateName template_name, std::string_view question,
                                  std::span<const Paragraph> path, LlmSession& session,
                                  const PromptLibrary& prompts);

// Reviews the root-to-leaf `path`. Direct uses the review_direct template,
// CoT and MPC use review_cot. Under MPC a Search outcome is followed by one
// MPC completion whose [INFO] payload replaces the query, unless
// `expand_on_search` is false (the caller will not use the query).
//
// Provider exceptions propagate; the tree search decides how to degrade.
ReviewResult review_path(std::string_view question, std::span<const Paragraph> path,
                         ExpansionStrategy strategy, LlmSession& session,
                         const PromptLibrary& prompts, bool expand_on_search = true);

MpcResult generate_mpc_query(std::string_view question, std::span<const Paragraph> path,
                             LlmSession& session, const PromptLibrary& prompts);

}  // namespace tor
