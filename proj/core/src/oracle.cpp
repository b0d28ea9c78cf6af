#include "tor/oracle.hpp"

#include <algorithm>
#include <fstream>

#include "jsonl.hpp"
#include "tor/error.hpp"
#include "tor/text.hpp"

namespace tor {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string expand_placeholders(std::string text, const RequestTag& tag) {
  replace_all(text, "{question}", tag.question);
  replace_all(text, "{last_id}", tag.path_ids.empty() ? std::string() : tag.path_ids.back());
  replace_all(text, "{depth}", std::to_string(tag.path_ids.size()));
  replace_all(text, "{path}", join(tag.path_ids, " "));
  return text;
}

std::optional<std::string> optional_string(const detail::json& r, std::string_view key,
                                           std::size_t line) {
  auto it = r.find(key);
  if (it == r.end()) return std::nullopt;
  if (!it->is_string()) throw FormatError("\"" + std::string(key) + "\" must be a string", line);
  return it->get<std::string>();
}

OracleRule parse_rule(const detail::json& r, std::size_t line) {
  static const char* kKnown[] = {"template", "question", "question_contains", "path", "last",
                                 "contains", "excludes", "depth",    "response"};
  for (const auto& [key, value] : r.items()) {
    if (std::none_of(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return key == k; })) {
      throw FormatError("unknown rule field \"" + key + "\"", line);
    }
  }

  OracleRule rule;
  rule.response = detail::require_string(r, "response", line);

  if (auto it = r.find("template"); it != r.end()) {
    std::vector<std::string> names;
    if (it->is_string()) {
      names.push_back(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& n : *it) {
        if (!n.is_string()) throw FormatError("\"template\" entries must be strings", line);
        names.push_back(n.get<std::string>());
      }
    } else {
      throw FormatError("\"template\" must be a string or an array", line);
    }
    for (const std::string& n : names) {
      auto t = parse_template_name(n);
      if (!t) throw FormatError("unknown template \"" + n + "\"", line);
      rule.templates.push_back(*t);
    }
  }

  rule.question = optional_string(r, "question", line);
  rule.question_contains = optional_string(r, "question_contains", line);
  rule.last = optional_string(r, "last", line);
  rule.contains = optional_string(r, "contains", line);
  rule.excludes = optional_string(r, "excludes", line);

  if (auto it = r.find("path"); it != r.end()) {
    if (!it->is_array()) throw FormatError("\"path\" must be an array of ids", line);
    std::vector<std::string> ids;
    for (const auto& id : *it) {
      if (!id.is_string()) throw FormatError("\"path\" must be an array of ids", line);
      ids.push_back(id.get<std::string>());
    }
    rule.path = std::move(ids);
  }
  if (auto it = r.find("depth"); it != r.end()) {
    if (!it->is_number_unsigned()) throw FormatError("\"depth\" must be a non-negative integer", line);
    rule.depth = it->get<std::size_t>();
  }
  return rule;
}

}  // namespace

bool OracleRule::matches(const RequestTag& tag) const {
  if (!templates.empty() &&
      std::find(templates.begin(), templates.end(), tag.template_name) == templates.end()) {
    return false;
  }
  if (question && *question != tag.question) return false;
  if (question_contains && tag.question.find(*question_contains) == std::string::npos) {
    return false;
  }
  if (path && *path != tag.path_ids) return false;
  if (last && (tag.path_ids.empty() || tag.path_ids.back() != *last)) return false;
  auto on_path = [&](const std::string& id) {
    return std::find(tag.path_ids.begin(), tag.path_ids.end(), id) != tag.path_ids.end();
  };
  if (contains && !on_path(*contains)) return false;
  if (excludes && on_path(*excludes)) return false;
  if (depth && *depth != tag.path_ids.size()) return false;
  return true;
}

ScriptedOracle::ScriptedOracle(std::vector<OracleRule> rules,
                               std::optional<std::string> default_response)
    : rules_(std::move(rules)), default_response_(std::move(default_response)) {}

ScriptedOracle ScriptedOracle::load(std::istream& in) {
  std::vector<OracleRule> rules;
  std::optional<std::string> fallback;
  detail::for_each_jsonl(in, [&](const detail::json& r, std::size_t line) {
    if (r.contains("default")) {
      if (r.size() != 1 || !r["default"].is_string()) {
        throw FormatError("a default line holds only {\"default\": \"...\"}", line);
      }
      if (fallback) throw FormatError("second default response", line);
      fallback = r["default"].get<std::string>();
      return;
    }
    rules.push_back(parse_rule(r, line));
  });
  return ScriptedOracle(std::move(rules), std::move(fallback));
}

ScriptedOracle ScriptedOracle::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open oracle rules " + path.string());
  return load(in);
}

std::string ScriptedOracle::complete(const CompletionRequest& request) const {
  for (const OracleRule& rule : rules_) {
    if (rule.matches(request.tag)) return expand_placeholders(rule.response, request.tag);
  }
  if (default_response_) return expand_placeholders(*default_response_, request.tag);
  throw Error("scripted oracle: no rule matches template " +
              std::string(to_string(request.tag.template_name)) + " with path [" +
              join(request.tag.path_ids, ", ") + "] and there is no default");
}

}  // namespace tor
