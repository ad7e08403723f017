#pragma once

// Byte-level string helpers. Input is UTF-8; only ASCII and the Latin-1
// supplement get case handling, which covers English and German.

#include <contrapro/error.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace contrapro::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_ascii_lower(char c) { return c >= 'a' && c <= 'z'; }

/// Letters for tokenization purposes: ASCII letters and any non-ASCII byte.
inline bool is_letter_byte(char c) { return is_ascii_alpha(c) || static_cast<unsigned char>(c) >= 0x80; }

/// Length of the UTF-8 sequence introduced by `lead` (1 for invalid leads).
inline std::size_t utf8_sequence_length(unsigned char lead) {
  if (lead < 0xC0) return 1;
  if (lead < 0xE0) return 2;
  if (lead < 0xF0) return 3;
  return 4;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

template <class Range>
std::string join(const Range& parts, std::string_view sep = " ") {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out += sep;
    out += p;
    first = false;
  }
  return out;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (is_ascii_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Latin-1 capitals live at U+00C0..U+00DE (C3 80..C3 9E) except U+00D7;
// the lowercase partner is +0x20 in the second byte.
inline bool is_latin1_upper_seq(unsigned char b0, unsigned char b1) {
  return b0 == 0xC3 && b1 >= 0x80 && b1 <= 0x9E && b1 != 0x97;
}
inline bool is_latin1_lower_seq(unsigned char b0, unsigned char b1) {
  return b0 == 0xC3 && b1 >= 0x9F && b1 <= 0xBF && b1 != 0xB7;
}

inline std::string utf8_lower(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto b0 = static_cast<unsigned char>(out[i]);
    if (is_ascii_upper(out[i])) {
      out[i] = static_cast<char>(out[i] - 'A' + 'a');
    } else if (i + 1 < out.size() && is_latin1_upper_seq(b0, static_cast<unsigned char>(out[i + 1]))) {
      out[i + 1] = static_cast<char>(static_cast<unsigned char>(out[i + 1]) + 0x20);
      ++i;
    }
  }
  return out;
}

inline std::string utf8_upper(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto b0 = static_cast<unsigned char>(out[i]);
    if (is_ascii_lower(out[i])) {
      out[i] = static_cast<char>(out[i] - 'a' + 'A');
    } else if (i + 1 < out.size() && is_latin1_lower_seq(b0, static_cast<unsigned char>(out[i + 1])) &&
               static_cast<unsigned char>(out[i + 1]) != 0x9F) {  // ß has no single-char capital
      out[i + 1] = static_cast<char>(static_cast<unsigned char>(out[i + 1]) - 0x20);
      ++i;
    }
  }
  return out;
}

inline bool starts_upper(std::string_view s) {
  if (s.empty()) return false;
  if (is_ascii_upper(s[0])) return true;
  return s.size() >= 2 && is_latin1_upper_seq(static_cast<unsigned char>(s[0]), static_cast<unsigned char>(s[1]));
}

inline bool starts_lower(std::string_view s) {
  if (s.empty()) return false;
  if (is_ascii_lower(s[0])) return true;
  return s.size() >= 2 && is_latin1_lower_seq(static_cast<unsigned char>(s[0]), static_cast<unsigned char>(s[1]));
}

inline bool starts_letter(std::string_view s) { return !s.empty() && is_letter_byte(s[0]); }

/// Upper-cases the first character only.
inline std::string capitalize(std::string_view s) {
  if (s.empty()) return {};
  std::size_t n = utf8_sequence_length(static_cast<unsigned char>(s[0]));
  return utf8_upper(s.substr(0, n)) + std::string(s.substr(n));
}

/// Re-cases `word` after the pattern of `model`: ALL CAPS, Capitalized, or lower.
inline std::string match_case(std::string_view word, std::string_view model) {
  std::string lower = utf8_lower(word);
  bool has_lower = false;
  bool has_upper = false;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (is_ascii_lower(model[i])) has_lower = true;
    if (is_ascii_upper(model[i])) has_upper = true;
  }
  if (model.size() > 1 && has_upper && !has_lower) return utf8_upper(lower);
  if (starts_upper(model)) return capitalize(lower);
  return lower;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 14695981039346656037ULL) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

/// Reads LF-separated lines. A missing final newline still yields a line; an
/// empty file yields none.
inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace contrapro::text
