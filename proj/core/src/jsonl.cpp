#include "jsonl.hpp"

#include <fstream>
#include <sstream>

#include "tor/error.hpp"
#include "tor/text.hpp"

namespace tor::detail {

void for_each_jsonl(std::istream& in, const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw FormatError("expected a JSON object", line_no);
    fn(record, line_no);
  }
}

std::string require_string(const json& record, std::string_view key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw FormatError("missing string field \"" + std::string(key) + "\"", line);
  }
  return it->get<std::string>();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed for " + path);
}

}  // namespace tor::detail
