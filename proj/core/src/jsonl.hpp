#pragma once

#include <functional>
#include <istream>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tor::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Calls `fn(record, line_number)` for every non-blank line. Lines that are not
// JSON objects raise FormatError with the line number.
void for_each_jsonl(std::istream& in, const std::function<void(const json&, std::size_t)>& fn);

// Required string field; FormatError naming the field otherwise.
std::string require_string(const json& record, std::string_view key, std::size_t line);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace tor::detail
