#pragma once

#include <map>
#include <string>

namespace tor::detail {

// Relative asset path (e.g. "prompts/review_cot.txt") -> file contents.
const std::map<std::string, std::string, std::less<>>& builtin_assets();

}  // namespace tor::detail
