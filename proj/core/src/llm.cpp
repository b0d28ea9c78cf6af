#include "tor/llm.hpp"

#include <stdexcept>
#include <thread>

#include "tor/error.hpp"

namespace tor {

std::string_view to_string(TemplateName name) noexcept {
  switch (name) {
    case TemplateName::ReviewCot: return "review_cot";
    case TemplateName::ReviewDirect: return "review_direct";
    case TemplateName::Mpc: return "mpc";
    case TemplateName::FusionAnalysis: return "fusion_analysis";
    case TemplateName::FusionParagraph: return "fusion_paragraph";
    case TemplateName::FusionEvidence: return "fusion_evidence";
    case TemplateName::Cor: return "cor";
  }
  return "unknown";
}

std::optional<TemplateName> parse_template_name(std::string_view s) noexcept {
  for (TemplateName t : kAllTemplates) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::vector<PromptSlot> default_slot_layout(TemplateName name) {
  switch (name) {
    case TemplateName::ReviewCot:
    case TemplateName::ReviewDirect:
    case TemplateName::Cor:
      return {{"Q", "Question:"}, {"D", "Documents: "}};
    case TemplateName::Mpc:
      return {{"Q", "Question:"}, {"R", "References: "}};
    case TemplateName::FusionParagraph:
      return {{"D", "Documents:"}, {"Q", "Question:"}};
    case TemplateName::FusionAnalysis:
      return {{"A", "Assertions:"}, {"Q", "Question:"}};
    case TemplateName::FusionEvidence:
      return {{"E", "Evidence:"}, {"Q", "Question:"}};
  }
  return {};
}

std::string_view default_instruction_label(TemplateName name) noexcept {
  switch (name) {
    case TemplateName::FusionAnalysis:
    case TemplateName::FusionParagraph:
    case TemplateName::FusionEvidence:
      return "Instruct:";
    default:
      return "Instruction:";
  }
}

std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string, std::less<>>& bindings) {
  for (const PromptSlot& slot : tmpl.slots) {
    if (!bindings.contains(slot.name)) {
      throw ConfigError("render_prompt(" + std::string(to_string(tmpl.name)) +
                        "): missing binding for slot \"" + slot.name + "\"");
    }
  }

  std::string out;
  out.append(tmpl.instruction_label).append(tmpl.instruction).push_back('\n');
  if (!tmpl.demos.empty()) {
    out.append("Demonstration:");
    for (std::size_t i = 0; i < tmpl.demos.size(); ++i) {
      if (i) out.append("\n\n");
      out.append(tmpl.demos[i]);
    }
    out.push_back('\n');
  }
  for (const PromptSlot& slot : tmpl.slots) {
    out.append(slot.label).append(bindings.find(slot.name)->second).push_back('\n');
  }
  return out;
}

std::string_view to_string(TokenEstimator e) noexcept {
  switch (e) {
    case TokenEstimator::Whitespace: return "whitespace";
    case TokenEstimator::CharsPerFour: return "chars4";
  }
  return "unknown";
}

std::optional<TokenEstimator> parse_token_estimator(std::string_view s) noexcept {
  if (s == "whitespace") return TokenEstimator::Whitespace;
  if (s == "chars4") return TokenEstimator::CharsPerFour;
  return std::nullopt;
}

std::size_t estimate_tokens(std::string_view text, TokenEstimator estimator) noexcept {
  if (estimator == TokenEstimator::CharsPerFour) return (text.size() + 3) / 4;
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

LlmSession::LlmSession(const LlmProvider& provider, RetryPolicy retry)
    : provider_(provider), retry_(retry) {
  if (retry_.max_attempts < 1) throw std::invalid_argument("RetryPolicy: max_attempts must be >= 1");
}

CompletionResponse LlmSession::complete(const CompletionRequest& request) {
  if (request.temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
  if (request.max_context_tokens <= 0) {
    throw std::invalid_argument("max_context_tokens must be positive");
  }

  auto backoff = retry_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    auto start = std::chrono::steady_clock::now();
    try {
      std::string text = provider_.complete(request);
      auto elapsed = std::chrono::steady_clock::now() - start;
      CompletionResponse response;
      response.text = std::move(text);
      response.provider_latency_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
      response.call_index = ++calls_;
      return response;
    } catch (const TransportError&) {
      if (attempt >= retry_.max_attempts) throw;
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::chrono::milliseconds::rep>(static_cast<double>(backoff.count()) *
                                                    retry_.multiplier));
  }
}

}  // namespace tor
