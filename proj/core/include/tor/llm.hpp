#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tor {

enum class TemplateName {
  ReviewCot,
  ReviewDirect,
  Mpc,
  FusionAnalysis,
  FusionParagraph,
  FusionEvidence,
  Cor,
};

inline constexpr TemplateName kAllTemplates[] = {
    TemplateName::ReviewCot,       TemplateName::ReviewDirect,    TemplateName::Mpc,
    TemplateName::FusionAnalysis,  TemplateName::FusionParagraph, TemplateName::FusionEvidence,
    TemplateName::Cor,
};

std::string_view to_string(TemplateName name) noexcept;
std::optional<TemplateName> parse_template_name(std::string_view s) noexcept;

struct PromptSlot {
  std::string name;   // binding key: "Q", "D", "R", "A" or "E"
  std::string label;  // exact label text, e.g. "Documents: "
};

struct PromptTemplate {
  TemplateName name = TemplateName::ReviewCot;
  std::string instruction_label;  // "Instruction:" or "Instruct:"
  std::string instruction;
  std::vector<std::string> demos;
  std::vector<PromptSlot> slots;
};

// Instruction, then the demonstration block (omitted when there are no demos),
// then one labeled line per slot in layout order. Throws ConfigError naming
// the first slot missing from `bindings`.
std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string, std::less<>>& bindings);

// Slot layout of each template's "Prompt Format" block.
std::vector<PromptSlot> default_slot_layout(TemplateName name);
std::string_view default_instruction_label(TemplateName name) noexcept;

// The seven templates with their demonstrations.
class PromptLibrary {
 public:
  static constexpr std::size_t kDefaultDemoCount = 3;

  // Instructions and the "default" demonstration set compiled into the library.
  static PromptLibrary builtin();

  // `<prompt_dir>/<template>.txt` instruction files and optional
  // `<demo_dir>/<template>.txt` demo files (demos separated by a "###" line).
  // Missing files fall back to the built-in assets.
  static PromptLibrary load(const std::optional<std::filesystem::path>& prompt_dir,
                            const std::optional<std::filesystem::path>& demo_dir);

  const PromptTemplate& get(TemplateName name) const;

  // Keeps at most `count` demonstrations per template.
  void limit_demos(std::size_t count);

 private:
  std::map<TemplateName, PromptTemplate> templates_;
};

// Splits demo file contents on lines consisting of "###".
std::vector<std::string> split_demos(std::string_view contents);

enum class TokenEstimator {
  Whitespace,    // whitespace-separated token count
  CharsPerFour,  // ceil(bytes / 4)
};

std::string_view to_string(TokenEstimator e) noexcept;
std::optional<TokenEstimator> parse_token_estimator(std::string_view s) noexcept;

std::size_t estimate_tokens(std::string_view text,
                            TokenEstimator estimator = TokenEstimator::Whitespace) noexcept;

// Identifies what a request is about; scripted oracles match on it and remote
// providers ignore it.
struct RequestTag {
  TemplateName template_name = TemplateName::ReviewCot;
  std::string question;
  std::vector<std::string> path_ids;
};

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_context_tokens = 4096;
  RequestTag tag;
};

struct CompletionResponse {
  std::string text;
  std::int64_t provider_latency_ms = 0;
  int call_index = 0;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;

  virtual std::string id() const = 0;

  // Throws TransportError for retryable failures; any other exception is
  // surfaced immediately. Must be safe to call concurrently.
  virtual std::string complete(const CompletionRequest& request) const = 0;

  // True when identical requests always produce identical text.
  virtual bool deterministic() const { return false; }
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

// Per-run gateway to a provider: validates requests, retries transport
// failures with exponential backoff and numbers successful calls 1, 2, 3...
class LlmSession {
 public:
  explicit LlmSession(const LlmProvider& provider, RetryPolicy retry = {});

  LlmSession(const LlmSession&) = delete;
  LlmSession& operator=(const LlmSession&) = delete;

  CompletionResponse complete(const CompletionRequest& request);

  int calls() const noexcept { return calls_.load(); }
  const LlmProvider& provider() const noexcept { return provider_; }

 private:
  const LlmProvider& provider_;
  RetryPolicy retry_;
  std::atomic<int> calls_{0};
};

}  // namespace tor
