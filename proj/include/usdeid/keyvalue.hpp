#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "usdeid/error.hpp"

// Plain-text "key = value" files: one entry per line, '#' starts a comment,
// blank lines ignored, keys may repeat. Used for tunables and phantom specs.

namespace usdeid::kv {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<Entry> parse(std::string_view text) {
  std::vector<Entry> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::rejected_input, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::rejected_input, "line " + std::to_string(line_no) + ": empty key");
    out.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

inline double to_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorKind::rejected_input, std::string(what) + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline long long to_int(std::string_view s, std::string_view what) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::rejected_input, std::string(what) + ": not an integer: '" + std::string(s) + "'");
  return v;
}

/// Split on commas; the final piece keeps any remaining commas when
/// max_parts is reached.
inline std::vector<std::string> split(std::string_view s, std::size_t max_parts = 0) {
  std::vector<std::string> out;
  while (true) {
    if (max_parts && out.size() + 1 == max_parts) {
      out.emplace_back(s);
      return out;
    }
    const auto comma = s.find(',');
    out.emplace_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) return out;
    s = s.substr(comma + 1);
  }
}

}  // namespace usdeid::kv
