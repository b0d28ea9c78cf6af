#include "tor/fusion.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "tor/error.hpp"
#include "tor/review.hpp"
#include "tor/text.hpp"

namespace tor {

std::string_view to_string(FusionStrategy s) noexcept {
  switch (s) {
    case FusionStrategy::AnalysisBased: return "analysis";
    case FusionStrategy::ParagraphBased: return "paragraph";
    case FusionStrategy::EvidenceBased: return "evidence";
  }
  return "unknown";
}

std::optional<FusionStrategy> parse_fusion(std::string_view s) noexcept {
  if (s == "analysis") return FusionStrategy::AnalysisBased;
  if (s == "paragraph") return FusionStrategy::ParagraphBased;
  if (s == "evidence") return FusionStrategy::EvidenceBased;
  return std::nullopt;
}

TemplateName fusion_template(FusionStrategy s) noexcept {
  switch (s) {
    case FusionStrategy::AnalysisBased: return TemplateName::FusionAnalysis;
    case FusionStrategy::ParagraphBased: return TemplateName::FusionParagraph;
    case FusionStrategy::EvidenceBased: return TemplateName::FusionEvidence;
  }
  return TemplateName::FusionEvidence;
}

namespace {

std::string_view context_slot(FusionStrategy s) noexcept {
  switch (s) {
    case FusionStrategy::AnalysisBased: return "A";
    case FusionStrategy::ParagraphBased: return "D";
    case FusionStrategy::EvidenceBased: return "E";
  }
  return "E";
}

std::vector<Paragraph> distinct_paragraphs(std::span<const Evidence> evidences) {
  std::vector<Paragraph> out;
  std::unordered_set<std::string> seen;
  for (const Evidence& e : evidences) {
    for (const Paragraph& p : e.path) {
      if (seen.insert(p.id).second) out.push_back(p);
    }
  }
  return out;
}

}  // namespace

std::string render_evidence_block(std::span<const Evidence> evidences, FusionStrategy strategy) {
  std::string out;
  switch (strategy) {
    case FusionStrategy::AnalysisBased:
      for (std::size_t i = 0; i < evidences.size(); ++i) {
        if (i) out.push_back('\n');
        out.append(std::to_string(i + 1)).append(". ").append(evidences[i].brief_analysis);
      }
      break;
    case FusionStrategy::ParagraphBased:
      out = render_documents(distinct_paragraphs(evidences));
      break;
    case FusionStrategy::EvidenceBased:
      for (std::size_t i = 0; i < evidences.size(); ++i) {
        if (i) out.push_back('\n');
        out.append("Evidence ").append(std::to_string(i + 1)).push_back('\n');
        out.append("Assertions:").append(evidences[i].brief_analysis).push_back('\n');
        out.append("Documents:").append(render_documents(evidences[i].path));
      }
      break;
  }
  return out;
}

PackedEvidence pack_evidence(std::string_view question, const EvidencePool& pool,
                             FusionStrategy strategy, const PromptLibrary& prompts,
                             std::size_t budget_tokens, TokenEstimator estimator) {
  const PromptTemplate& tmpl = prompts.get(fusion_template(strategy));
  std::span<const Evidence> all(pool.evidences());

  auto render = [&](std::size_t n) {
    PackedEvidence p;
    p.block = render_evidence_block(all.first(n), strategy);
    p.prompt = render_prompt(
        tmpl, {{std::string(context_slot(strategy)), p.block}, {"Q", std::string(question)}});
    p.prompt_tokens = estimate_tokens(p.prompt, estimator);
    p.included.resize(n);
    std::iota(p.included.begin(), p.included.end(), std::size_t{0});
    return p;
  };

  PackedEvidence best = render(0);
  if (best.prompt_tokens > budget_tokens) {
    throw ConfigError("token budget " + std::to_string(budget_tokens) +
                      " is smaller than the fusion prompt without evidence (" +
                      std::to_string(best.prompt_tokens) + " tokens)");
  }
  for (std::size_t n = 1; n <= all.size(); ++n) {
    PackedEvidence candidate = render(n);
    if (candidate.prompt_tokens > budget_tokens) break;
    best = std::move(candidate);
  }
  return best;
}

ExtractedAnswer extract_answer(std::string_view response) {
  static constexpr std::string_view kPattern = "the answer is";
  std::string lower = to_lower_ascii(response);
  std::size_t pos = lower.rfind(kPattern);
  if (pos == std::string::npos) return {std::string(trim(response)), false};

  std::string_view rest = response.substr(pos + kPattern.size());
  rest = rest.substr(0, rest.find('\n'));
  rest = trim(rest);
  if (!rest.empty() && rest.front() == ':') rest = trim(rest.substr(1));
  while (!rest.empty() && rest.back() == '.') rest = trim(rest.substr(0, rest.size() - 1));
  return {std::string(rest), true};
}

AnswerResult generate_answer(std::string_view question, const EvidencePool& pool,
                             FusionStrategy strategy, LlmSession& session,
                             const PromptLibrary& prompts, std::size_t budget_tokens,
                             TokenEstimator estimator) {
  PackedEvidence packed = pack_evidence(question, pool, strategy, prompts, budget_tokens, estimator);

  CompletionRequest request;
  request.prompt = std::move(packed.prompt);
  request.max_context_tokens = static_cast<int>(budget_tokens);
  request.tag.template_name = fusion_template(strategy);
  request.tag.question = std::string(question);
  std::span<const Evidence> included(pool.evidences().data(), packed.included.size());
  for (const Paragraph& p : distinct_paragraphs(included)) request.tag.path_ids.push_back(p.id);

  CompletionResponse response = session.complete(request);
  ExtractedAnswer extracted = extract_answer(response.text);

  AnswerResult result;
  result.full_response = std::move(response.text);
  result.extracted_answer = std::move(extracted.answer);
  result.answer_pattern_found = extracted.pattern_found;
  result.evidence_included = std::move(packed.included);
  result.fusion_calls = 1;
  result.call_index = response.call_index;
  return result;
}

std::string evidence_text(const Evidence& evidence) {
  std::string out;
  for (const Paragraph& p : evidence.path) {
    out.append(paragraph_embedding_text(p, true)).push_back('\n');
  }
  out.append(evidence.brief_analysis);
  return out;
}

std::vector<std::string> select_scored_paragraphs(const EvidencePool& pool,
                                                  std::string_view final_response,
                                                  const EmbeddingProvider& embedder,
                                                  std::size_t limit) {
  const auto& evidences = pool.evidences();
  auto flatten = [&](const std::vector<std::size_t>& order) {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (std::size_t i : order) {
      for (const Paragraph& p : evidences[i].path) {
        if (ids.size() == limit) return ids;
        if (seen.insert(p.id).second) ids.push_back(p.id);
      }
    }
    return ids;
  };

  std::vector<std::size_t> order(evidences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (pool.accepted_ids().size() <= limit || trim(final_response).empty()) return flatten(order);

  Embedding target = embedder.embed(final_response);
  std::vector<double> scores;
  scores.reserve(evidences.size());
  for (const Evidence& e : evidences) {
    scores.push_back(cosine_similarity(embedder.embed(evidence_text(e)), target));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return flatten(order);
}

}  // namespace tor
