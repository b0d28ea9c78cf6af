#include "tor/review.hpp"

#include <array>

#include "tor/text.hpp"

namespace tor {

namespace {

constexpr std::string_view kRelevant = "[RELEVANT]";
constexpr std::string_view kIrrelevant = "[IRRELEVANT]";
constexpr std::string_view kSupported = "[SUPPORTED]";
constexpr std::string_view kUnsupported = "[UNSUPPORTED]";
constexpr std::string_view kAnswer = "[ANSWER]";
constexpr std::string_view kQuery = "[QUERY]";
constexpr std::string_view kInfo = "[INFO]";

constexpr std::array<std::string_view, 5> kFieldLabels = {"Thought", "Judgment", "Output",
                                                          "Information", "Answer"};

bool is_blank(char c) noexcept { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

struct Field {
  std::size_t start = 0;  // position of the '-'
  std::size_t value = 0;  // first byte after the ':'
  std::string_view label;
};

// A "- Label:" marker starting exactly at `pos`.
std::optional<Field> field_at(std::string_view text, std::size_t pos) {
  if (pos >= text.size() || text[pos] != '-') return std::nullopt;
  if (pos > 0 && !is_blank(text[pos - 1])) return std::nullopt;
  std::size_t i = pos + 1;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  for (std::string_view label : kFieldLabels) {
    if (text.substr(i, label.size()) != label) continue;
    std::size_t j = i + label.size();
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
    if (j < text.size() && text[j] == ':') return Field{pos, j + 1, label};
  }
  return std::nullopt;
}

std::optional<Field> next_field(std::string_view text, std::size_t from, std::size_t to) {
  to = std::min(to, text.size());
  for (std::size_t i = from; i < to; ++i) {
    if (auto f = field_at(text, i); f && f->start < to) return f;
  }
  return std::nullopt;
}

// Rest of the line after `pos` up to the next field marker. When that is
// empty (and no marker cut it short) the payload continues on the following
// lines until a labeled field begins.
std::string extract_payload(std::string_view text, std::size_t pos) {
  std::size_t line_end = text.find('\n', pos);
  if (line_end == std::string_view::npos) line_end = text.size();

  if (auto f = next_field(text, pos, line_end)) {
    return std::string(trim(text.substr(pos, f->start - pos)));
  }
  std::string_view rest = trim(text.substr(pos, line_end - pos));
  if (!rest.empty()) return std::string(rest);

  std::string collected;
  std::size_t cursor = line_end;
  while (cursor < text.size()) {
    std::size_t start = cursor + 1;
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::optional<Field> f = next_field(text, start, end);
    std::size_t stop = f ? f->start : end;
    std::string_view piece = text.substr(start, stop - start);
    if (!collected.empty() || !trim(piece).empty()) {
      collected.append(piece).push_back('\n');
    }
    if (f) break;
    cursor = end;
  }
  return std::string(trim(collected));
}

std::size_t find_token(std::string_view text, std::string_view token, std::size_t from = 0) {
  return from > text.size() ? std::string_view::npos : text.find(token, from);
}

// Payload of the last "Thought:" field that starts within [from, to).
std::string last_thought(std::string_view text, std::size_t from, std::size_t to) {
  std::optional<Field> last;
  for (auto f = next_field(text, from, to); f; f = next_field(text, f->value, to)) {
    if (f->label == "Thought") last = f;
  }
  return last ? extract_payload(text, last->value) : std::string();
}

ParseFailure fail(std::string_view text, std::string reason, int step) {
  return ParseFailure{std::string(text), std::move(reason), step};
}

void append_field(std::string& out, std::string_view label, std::string_view value) {
  out.append("- ").append(label).append(": ").append(value).push_back('\n');
}

}  // namespace

std::string_view to_string(ReviewAction a) noexcept {
  switch (a) {
    case ReviewAction::Reject: return "reject";
    case ReviewAction::Search: return "search";
    case ReviewAction::Accept: return "accept";
  }
  return "unknown";
}

std::string_view to_string(ExpansionStrategy s) noexcept {
  switch (s) {
    case ExpansionStrategy::Direct: return "direct";
    case ExpansionStrategy::CoT: return "cot";
    case ExpansionStrategy::Mpc: return "mpc";
  }
  return "unknown";
}

std::optional<ExpansionStrategy> parse_expansion(std::string_view s) noexcept {
  if (s == "direct") return ExpansionStrategy::Direct;
  if (s == "cot") return ExpansionStrategy::CoT;
  if (s == "mpc") return ExpansionStrategy::Mpc;
  return std::nullopt;
}

ReviewDecision ReviewDecision::reject(std::string thought) {
  ReviewDecision d;
  d.action = ReviewAction::Reject;
  d.thought = std::move(thought);
  return d;
}

ReviewDecision ReviewDecision::search(std::string query, std::string thought) {
  ReviewDecision d;
  d.action = ReviewAction::Search;
  d.new_query = std::move(query);
  d.thought = std::move(thought);
  return d;
}

ReviewDecision ReviewDecision::accept(std::string analysis, std::string thought) {
  ReviewDecision d;
  d.action = ReviewAction::Accept;
  d.brief_analysis = std::move(analysis);
  d.thought = std::move(thought);
  return d;
}

bool ReviewDecision::valid() const noexcept {
  switch (action) {
    case ReviewAction::Reject: return new_query.empty() && brief_analysis.empty();
    case ReviewAction::Search: return !new_query.empty() && brief_analysis.empty();
    case ReviewAction::Accept: return !brief_analysis.empty() && new_query.empty();
  }
  return false;
}

ReviewOutcome parse_review_output(std::string_view text) {
  std::size_t rel = find_token(text, kRelevant);
  std::size_t irr = find_token(text, kIrrelevant);
  if (rel == std::string_view::npos && irr == std::string_view::npos) {
    return fail(text, "no [RELEVANT] or [IRRELEVANT] judgment", 1);
  }
  if (irr < rel) {
    return ReviewDecision::reject(last_thought(text, 0, irr));
  }

  std::size_t after_step1 = rel + kRelevant.size();
  std::optional<bool> supported;
  std::size_t sup = find_token(text, kSupported, after_step1);
  std::size_t unsup = find_token(text, kUnsupported, after_step1);
  std::size_t after_step2 = after_step1;
  if (sup != std::string_view::npos || unsup != std::string_view::npos) {
    supported = sup < unsup;
    after_step2 = *supported ? sup + kSupported.size() : unsup + kUnsupported.size();
  }

  std::size_t ans = find_token(text, kAnswer, after_step1);
  std::size_t qry = find_token(text, kQuery, after_step1);
  int action_step = supported ? 3 : 2;
  if (ans != std::string_view::npos && qry != std::string_view::npos) {
    return fail(text, "both [ANSWER] and [QUERY] present", action_step);
  }
  if (ans == std::string_view::npos && qry == std::string_view::npos) {
    return fail(text, "no [ANSWER] or [QUERY] action", action_step);
  }

  bool accept = ans != std::string_view::npos;
  std::size_t token_pos = accept ? ans : qry;
  std::size_t payload_pos = token_pos + (accept ? kAnswer.size() : kQuery.size());
  std::string payload = extract_payload(text, payload_pos);
  if (payload.empty()) {
    return fail(text, accept ? "empty [ANSWER] payload" : "empty [QUERY] payload", action_step);
  }

  std::string thought = last_thought(text, std::min(after_step2, token_pos), token_pos);
  ReviewDecision d = accept ? ReviewDecision::accept(std::move(payload), std::move(thought))
                            : ReviewDecision::search(std::move(payload), std::move(thought));
  d.supported = supported;
  return d;
}

std::string render_canonical_review(const ReviewDecision& decision) {
  std::string out;
  if (decision.action == ReviewAction::Reject) {
    if (!decision.thought.empty()) append_field(out, "Thought", decision.thought);
    append_field(out, "Judgment", kIrrelevant);
    return out;
  }
  append_field(out, "Thought", "The documents contain information related to the question.");
  append_field(out, "Judgment", kRelevant);
  if (decision.supported) {
    append_field(out, "Thought", *decision.supported
                                     ? "The documents cover every hop of the question."
                                     : "Part of the information is still missing.");
    append_field(out, "Judgment", *decision.supported ? kSupported : kUnsupported);
  }
  if (!decision.thought.empty()) append_field(out, "Thought", decision.thought);
  if (decision.action == ReviewAction::Accept) {
    append_field(out, "Output", std::string(kAnswer) + " " + decision.brief_analysis);
  } else {
    append_field(out, "Output", std::string(kQuery) + " " + decision.new_query);
  }
  return out;
}

std::variant<MpcCompletion, ParseFailure> parse_mpc_output(std::string_view text) {
  std::size_t info = find_token(text, kInfo);
  if (info == std::string_view::npos) return fail(text, "no [INFO] field", 1);
  MpcCompletion c;
  c.info = extract_payload(text, info + kInfo.size());
  if (c.info.empty()) return fail(text, "empty [INFO] payload", 1);
  std::size_t ans = find_token(text, kAnswer, info + kInfo.size());
  if (ans != std::string_view::npos) c.answer = extract_payload(text, ans + kAnswer.size());
  return c;
}

std::string render_canonical_mpc(const MpcCompletion& completion) {
  std::string out;
  append_field(out, "Thought", "The references lack the information needed for the next hop.");
  append_field(out, "Information", std::string(kInfo) + " " + completion.info);
  append_field(out, "Answer", std::string(kAnswer) + " " + completion.answer);
  return out;
}

std::string render_documents(std::span<const Paragraph> paragraphs) {
  std::string out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (i) out.push_back('\n');
    out.append("#").append(std::to_string(i + 1)).append(" ").append(paragraphs[i].title);
    out.push_back('\n');
    out.append(paragraphs[i].text);
  }
  return out;
}

namespace {

CompletionRequest make_request(TemplateName name, std::string_view question,
                               std::span<const Paragraph> path, const PromptLibrary& prompts) {
  const PromptTemplate& tmpl = prompts.get(name);
  std::string slot = name == TemplateName::Mpc ? "R" : "D";
  CompletionRequest req;
  req.prompt = render_prompt(tmpl, {{"Q", std::string(question)}, {slot, render_documents(path)}});
  req.tag.template_name = name;
  req.tag.question = std::string(question);
  for (const Paragraph& p : path) req.tag.path_ids.push_back(p.id);
  return req;
}

}  // namespace

ReviewResult review_with_template(TemplateName template_name, std::string_view question,
                                  std::span<const Paragraph> path, LlmSession& session,
                                  const PromptLibrary& prompts) {
  CompletionResponse response =
      session.complete(make_request(template_name, question, path, prompts));
  ReviewResult result{parse_review_output(response.text), {}, std::nullopt};
  result.calls.push_back({response.call_index, template_name, std::move(response.text)});
  return result;
}

MpcResult generate_mpc_query(std::string_view question, std::span<const Paragraph> path,
                             LlmSession& session, const PromptLibrary& prompts) {
  CompletionResponse response =
      session.complete(make_request(TemplateName::Mpc, question, path, prompts));
  return MpcResult{parse_mpc_output(response.text),
                   {response.call_index, TemplateName::Mpc, response.text}};
}

ReviewResult review_path(std::string_view question, std::span<const Paragraph> path,
                         ExpansionStrategy strategy, LlmSession& session,
                         const PromptLibrary& prompts, bool expand_on_search) {
  if (path.empty()) throw std::invalid_argument("review_path: empty path");
  TemplateName name = strategy == ExpansionStrategy::Direct ? TemplateName::ReviewDirect
                                                            : TemplateName::ReviewCot;
  ReviewResult result = review_with_template(name, question, path, session, prompts);

  auto* decision = std::get_if<ReviewDecision>(&result.outcome);
  if (strategy != ExpansionStrategy::Mpc || !expand_on_search || !decision ||
      decision->action != ReviewAction::Search) {
    return result;
  }

  MpcResult mpc = generate_mpc_query(question, path, session, prompts);
  result.calls.push_back(std::move(mpc.call));
  if (auto* completion = std::get_if<MpcCompletion>(&mpc.outcome)) {
    decision->new_query = completion->info;
    result.mpc = std::move(*completion);
  } else {
    result.outcome = std::get<ParseFailure>(std::move(mpc.outcome));
  }
  return result;
}

}  // namespace tor
