#pragma once

// CSV helpers shared by the readers in this library. Not installed.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ecc::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

using Fields = std::array<std::string_view, 8>;
using FieldScratch = std::array<std::string, 8>;

/// Splits a line into exactly `expected` (<= 8) fields. Double-quoted CSV
/// fields are unquoted into `scratch`; views stay valid until the next call.
inline bool split_fields(std::string_view line, char delimiter, std::size_t expected, Fields& out,
                         FieldScratch& scratch) {
  std::size_t found = 0;
  std::size_t pos = 0;
  while (true) {
    if (found == expected) return false;
    if (delimiter == ',' && pos < line.size() && line[pos] == '"') {
      std::string& buf = scratch[found];
      buf.clear();
      std::size_t i = pos + 1;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            buf.push_back('"');
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        buf.push_back(line[i++]);
      }
      if (!closed) return false;
      out[found++] = buf;
      if (i == line.size()) return found == expected;
      if (line[i] != delimiter) return false;
      pos = i + 1;
      continue;
    }
    const auto d = line.find(delimiter, pos);
    out[found++] = trim(line.substr(pos, d == std::string_view::npos ? std::string_view::npos : d - pos));
    if (d == std::string_view::npos) return found == expected;
    pos = d + 1;
  }
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> to_int64(std::string_view s) {
  std::int64_t v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Quotes a field when it contains a delimiter, quote or newline.
inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace ecc::detail
