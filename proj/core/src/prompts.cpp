#include <fstream>
#include <sstream>

#include "assets.hpp"
#include "tor/error.hpp"
#include "tor/llm.hpp"
#include "tor/text.hpp"

namespace tor {

namespace {

std::string builtin_asset(const std::string& rel) {
  const auto& assets = detail::builtin_assets();
  auto it = assets.find(rel);
  if (it == assets.end()) throw ConfigError("missing built-in asset " + rel);
  return it->second;
}

std::optional<std::string> read_if_exists(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PromptTemplate make_template(TemplateName name, std::string_view instruction,
                             std::vector<std::string> demos) {
  PromptTemplate t;
  t.name = name;
  t.instruction_label = std::string(default_instruction_label(name));
  t.instruction = std::string(trim(instruction));
  t.demos = std::move(demos);
  t.slots = default_slot_layout(name);
  return t;
}

}  // namespace

std::vector<std::string> split_demos(std::string_view contents) {
  std::vector<std::string> demos;
  std::string current;
  auto flush = [&] {
    std::string_view t = trim(current);
    if (!t.empty()) demos.emplace_back(t);
    current.clear();
  };
  for (std::string_view line : split_lines(contents)) {
    if (trim(line) == "###") {
      flush();
    } else {
      current.append(line).push_back('\n');
    }
  }
  flush();
  return demos;
}

PromptLibrary PromptLibrary::builtin() { return load(std::nullopt, std::nullopt); }

PromptLibrary PromptLibrary::load(const std::optional<std::filesystem::path>& prompt_dir,
                                  const std::optional<std::filesystem::path>& demo_dir) {
  PromptLibrary lib;
  for (TemplateName name : kAllTemplates) {
    std::string file = std::string(to_string(name)) + ".txt";

    std::optional<std::string> instruction;
    if (prompt_dir) instruction = read_if_exists(*prompt_dir / file);
    if (!instruction) instruction = builtin_asset("prompts/" + file);

    std::optional<std::string> demos;
    if (demo_dir) demos = read_if_exists(*demo_dir / file);
    if (!demos) demos = builtin_asset("demos/default/" + file);

    lib.templates_.emplace(name, make_template(name, *instruction, split_demos(*demos)));
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(TemplateName name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw ConfigError("no template named " + std::string(to_string(name)));
  }
  return it->second;
}

void PromptLibrary::limit_demos(std::size_t count) {
  for (auto& [name, tmpl] : templates_) {
    if (tmpl.demos.size() > count) tmpl.demos.resize(count);
  }
}

}  // namespace tor
