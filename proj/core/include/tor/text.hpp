#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tor {

std::string_view trim(std::string_view s) noexcept;

// Splits on '\n'. A trailing '\r' is stripped from each line.
std::vector<std::string_view> split_lines(std::string_view s);

std::string to_lower_ascii(std::string_view s);

// Lowercased alphanumeric runs; every other byte is a separator. Non-ASCII
// bytes are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> word_tokens(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// 64-bit FNV-1a, stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string hex64(std::uint64_t value);

}  // namespace tor
