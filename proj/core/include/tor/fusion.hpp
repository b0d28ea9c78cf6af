#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tor/corpus.hpp"
#include "tor/llm.hpp"
#include "tor/tree.hpp"

namespace tor {

enum class FusionStrategy { AnalysisBased, ParagraphBased, EvidenceBased };

std::string_view to_string(FusionStrategy s) noexcept;
std::optional<FusionStrategy> parse_fusion(std::string_view s) noexcept;
TemplateName fusion_template(FusionStrategy s) noexcept;

// Context block for the given evidences in the strategy's format:
//   analysis:  numbered brief analyses
//   paragraph: the evidences' paragraphs, deduplicated by id
//   evidence:  "Evidence i" groups of "Assertions:" and "Documents:"
std::string render_evidence_block(std::span<const Evidence> evidences, FusionStrategy strategy);

struct PackedEvidence {
  std::string block;
  std::vector<std::size_t> included;  // always a prefix 0..n-1 of the pool
  std::string prompt;
  std::size_t prompt_tokens = 0;
};

// Greedy prefix packing: evidence is added in acceptance order until the next
// one would push the full rendered prompt over `budget_tokens`. Throws
// ConfigError when the prompt without any evidence already exceeds the budget.
PackedEvidence pack_evidence(std::string_view question, const EvidencePool& pool,
                             FusionStrategy strategy, const PromptLibrary& prompts,
                             std::size_t budget_tokens, TokenEstimator estimator);

struct ExtractedAnswer {
  std::string answer;
  bool pattern_found = false;
};

// Text after the last case-insensitive "the answer is", up to the end of that
// line, trimmed, with trailing periods removed. Falls back to the whole
// response (trimmed) with pattern_found == false.
ExtractedAnswer extract_answer(std::string_view response);

struct AnswerResult {
  std::string full_response;
  std::string extracted_answer;
  bool answer_pattern_found = false;
  std::vector<std::size_t> evidence_included;
  int fusion_calls = 0;
  int call_index = 0;
};

AnswerResult generate_answer(std::string_view question, const EvidencePool& pool,
                             FusionStrategy strategy, LlmSession& session,
                             const PromptLibrary& prompts, std::size_t budget_tokens = 4096,
                             TokenEstimator estimator = TokenEstimator::Whitespace);

// Text used to embed one evidence when re-ranking: each paragraph's
// "title\ntext" followed by the brief analysis.
std::string evidence_text(const Evidence& evidence);

// Paragraph ids scored for recall. With at most `limit` distinct ids the pool
// is returned as-is (acceptance then path order, no embedding calls).
// Otherwise evidences are ranked by cosine similarity to `final_response` and
// flattened in that order, deduplicated and cut at `limit`.
std::vector<std::string> select_scored_paragraphs(const EvidencePool& pool,
                                                  std::string_view final_response,
                                                  const EmbeddingProvider& embedder,
                                                  std::size_t limit = 15);

}  // namespace tor
