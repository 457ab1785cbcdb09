#pragma once

// Line-oriented parsing shared by the graph and replay readers.

#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fgb/errors.hpp"

namespace fgb::detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline bool is_blank_or_comment(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, std::string_view what) {
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InvalidParameter("cannot parse " + std::string(what) + " from '" +
                           std::string(token) + "'");
  }
  return value;
}

// Parses "<key> <int>".
inline std::size_t parse_header(std::string_view line, std::string_view key) {
  const auto tokens = split_ws(trim(line));
  if (tokens.size() != 2 || tokens[0] != key) {
    throw InvalidParameter("expected '" + std::string(key) + " <int>', got '" +
                           std::string(line) + "'");
  }
  return parse_number<std::size_t>(tokens[1], key);
}

// Shortest round-trip decimal representation; locale independent.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace fgb::detail
