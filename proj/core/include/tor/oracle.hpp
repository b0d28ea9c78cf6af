#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tor/llm.hpp"

namespace tor {

// One scripted reply. Every matcher that is set must hold; unset matchers
// match anything.
struct OracleRule {
  std::vector<TemplateName> templates;
  std::optional<std::string> question;
  std::optional<std::string> question_contains;
  std::optional<std::vector<std::string>> path;  // exact id sequence
  std::optional<std::string> last;               // id of the last path paragraph
  std::optional<std::string> contains;           // id anywhere on the path
  std::optional<std::string> excludes;           // id absent from the path
  std::optional<std::size_t> depth;              // path length
  std::string response;

  bool matches(const RequestTag& tag) const;
};

// Deterministic test double. The first matching rule wins; without a match
// the default response is used, and without a default the call fails.
//
// Responses may use {question}, {last_id}, {depth} and {path} placeholders.
class ScriptedOracle final : public LlmProvider {
 public:
  ScriptedOracle(std::vector<OracleRule> rules, std::optional<std::string> default_response);

  // Line-delimited rules. Recognized keys: template (string or array),
  // question, question_contains, path, last, contains, excludes, depth,
  // response; a line {"default": "..."} sets the fallback response.
  static ScriptedOracle load(std::istream& in);
  static ScriptedOracle load(const std::filesystem::path& path);

  std::string id() const override { return "scripted"; }
  std::string complete(const CompletionRequest& request) const override;
  bool deterministic() const override { return true; }

  const std::vector<OracleRule>& rules() const noexcept { return rules_; }

 private:
  std::vector<OracleRule> rules_;
  std::optional<std::string> default_response_;
};

}  // namespace tor
