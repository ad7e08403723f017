#pragma once

// Moses-compatible tokenizer subset: symbol splitting, comma and period
// handling, multi-dot runs, English clitics, and a small nonbreaking-prefix
// list. Output is byte-faithful; no normalization or escaping is applied.

#include <contrapro/text.hpp>

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace contrapro {

enum class Side { source, target };

inline std::string_view to_string(Side s) { return s == Side::source ? "src" : "tgt"; }

namespace detail {

// Multi-byte punctuation that is split off like ASCII symbols.
inline constexpr std::array<std::string_view, 13> kUnicodePunct = {
    "\xC2\xAB", "\xC2\xBB", "\xC2\xBF", "\xC2\xA1",          // « » ¿ ¡
    "\xE2\x80\x9E", "\xE2\x80\x9C", "\xE2\x80\x9D",          // „ “ ”
    "\xE2\x80\x9A", "\xE2\x80\x98", "\xE2\x80\x99",          // ‚ ‘ ’
    "\xE2\x80\xA6", "\xE2\x80\x93", "\xE2\x80\x94"};         // ellipsis, en dash, em dash

inline constexpr std::array<std::string_view, 20> kEnglishNonbreaking = {
    "Mr", "Mrs", "Ms", "Dr", "Prof", "St", "Jr", "Sr", "Mt", "Inc",
    "Ltd", "Co", "Corp", "Gen", "Gov", "Sen", "Rep", "Capt", "Lt", "Sgt"};

inline constexpr std::array<std::string_view, 16> kGermanNonbreaking = {
    "Hr", "Fr", "Dr", "Prof", "Nr", "bzw", "usw", "ca", "evtl", "ggf",
    "vgl", "Str", "Tel", "Abs", "Jh", "Mio"};

inline bool is_nonbreaking(std::string_view prefix, Side side) {
  // Single uppercase letters are initials.
  if (prefix.size() == 1 && text::is_ascii_upper(prefix[0])) return true;
  if (side == Side::source)
    return std::find(kEnglishNonbreaking.begin(), kEnglishNonbreaking.end(), prefix) != kEnglishNonbreaking.end();
  return std::find(kGermanNonbreaking.begin(), kGermanNonbreaking.end(), prefix) != kGermanNonbreaking.end();
}

/// Length of a splittable symbol starting at `i`, or 0.
inline std::size_t symbol_length(std::string_view s, std::size_t i) {
  char c = s[i];
  auto u = static_cast<unsigned char>(c);
  if (u < 0x80) {
    if (text::is_ascii_alpha(c) || text::is_ascii_digit(c)) return 0;
    if (c == '.' || c == '\'' || c == ',' || c == '-') return 0;
    return 1;
  }
  for (auto p : kUnicodePunct)
    if (s.substr(i, p.size()) == p) return p.size();
  return 0;
}

inline void push_nonempty(std::vector<std::string>& out, std::string piece) {
  if (!piece.empty()) out.push_back(std::move(piece));
}

// Commas survive only between two digits.
inline std::vector<std::string> split_commas(const std::string& w) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == ',') {
      bool keep = i > 0 && i + 1 < w.size() && text::is_ascii_digit(w[i - 1]) && text::is_ascii_digit(w[i + 1]);
      if (!keep) {
        push_nonempty(out, std::move(cur));
        cur.clear();
        out.emplace_back(",");
        continue;
      }
    }
    cur += w[i];
  }
  push_nonempty(out, std::move(cur));
  return out;
}

inline std::vector<std::string> split_multidots(const std::string& w) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t i = 0;
  while (i < w.size()) {
    if (w[i] == '.' && i + 1 < w.size() && w[i + 1] == '.') {
      std::size_t j = i;
      while (j < w.size() && w[j] == '.') ++j;
      push_nonempty(out, std::move(cur));
      cur.clear();
      out.push_back(w.substr(i, j - i));
      i = j;
      continue;
    }
    cur += w[i++];
  }
  push_nonempty(out, std::move(cur));
  return out;
}

// English: an apostrophe followed by a letter opens a clitic segment ("'s",
// "'Neil"); "n't" pulls its n from the host. Any other apostrophe is a token.
inline std::vector<std::string> split_apostrophes_en(const std::string& w) {
  std::vector<std::string> segs;
  std::string cur;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != '\'') {
      cur += w[i];
      continue;
    }
    push_nonempty(segs, std::move(cur));
    cur.clear();
    if (i + 1 < w.size() && text::is_letter_byte(w[i + 1]))
      cur = "'";
    else
      segs.emplace_back("'");
  }
  push_nonempty(segs, std::move(cur));

  for (std::size_t k = 1; k < segs.size(); ++k) {
    auto& prev = segs[k - 1];
    auto& seg = segs[k];
    if ((seg == "'t" || seg == "'T") && prev != "'" && (prev.back() == 'n' || prev.back() == 'N')) {
      seg.insert(seg.begin(), prev.back());
      prev.pop_back();
    }
  }
  std::vector<std::string> out;
  for (auto& s : segs) push_nonempty(out, std::move(s));
  return out;
}

inline std::vector<std::string> split_apostrophes_other(const std::string& w) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : w) {
    if (c == '\'') {
      push_nonempty(out, std::move(cur));
      cur.clear();
      out.emplace_back("'");
    } else {
      cur += c;
    }
  }
  push_nonempty(out, std::move(cur));
  return out;
}

inline bool all_dots(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c == '.'; });
}

}  // namespace detail

/// Tokenizes one line into surface strings.
inline std::vector<std::string> tokenize_words(std::string_view line, Side side) {
  std::vector<std::string> pieces;
  for (const auto& chunk : text::split_whitespace(line)) {
    std::vector<std::string> words;
    std::string cur;
    std::size_t i = 0;
    while (i < chunk.size()) {
      std::size_t n = detail::symbol_length(chunk, i);
      if (n > 0) {
        detail::push_nonempty(words, std::move(cur));
        cur.clear();
        words.push_back(chunk.substr(i, n));
        i += n;
      } else {
        cur += chunk[i++];
      }
    }
    detail::push_nonempty(words, std::move(cur));

    for (const auto& w : words) {
      if (w.size() == 1 && detail::symbol_length(w, 0) == 1) {
        pieces.push_back(w);
        continue;
      }
      for (const auto& a : detail::split_commas(w))
        for (const auto& b : detail::split_multidots(a)) {
          auto parts = side == Side::source ? detail::split_apostrophes_en(b) : detail::split_apostrophes_other(b);
          for (auto& p : parts) pieces.push_back(std::move(p));
        }
    }
  }

  // Sentence-internal and final periods, Moses style.
  std::vector<std::string> out;
  out.reserve(pieces.size() + 4);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string& p = pieces[i];
    if (p.size() > 1 && p.back() == '.' && !detail::all_dots(p)) {
      std::string_view pre(p.data(), p.size() - 1);
      bool dotted_abbrev = pre.find('.') != std::string_view::npos &&
                           std::any_of(pre.begin(), pre.end(), [](char c) { return text::is_letter_byte(c); });
      bool next_lower = i + 1 < pieces.size() && text::starts_lower(pieces[i + 1]);
      if (!(dotted_abbrev || detail::is_nonbreaking(pre, side) || next_lower)) {
        out.emplace_back(pre);
        out.emplace_back(".");
        continue;
      }
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace contrapro
