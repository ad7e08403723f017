#pragma once

// Corpus BLEU with the 13a (mteval-v13a) tokenizer, 4-gram, single
// reference, exponential smoothing of zero-match orders as in sacrebleu.

#include <contrapro/error.hpp>
#include <contrapro/text.hpp>

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace contrapro {

namespace detail {

inline bool is_13a_symbol(unsigned char c) {
  return (c >= '{' && c <= '~') || (c >= '[' && c <= '`') || (c >= ' ' && c <= '&') || (c >= '(' && c <= '+') ||
         (c >= ':' && c <= '@') || c == '/';
}

inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Left-to-right, non-overlapping rewrite of two-character matches, the way
// a regex substitution scans.
template <class Match, class Emit>
std::string rewrite_pairs(const std::string& s, Match match, Emit emit) {
  std::string out;
  out.reserve(s.size() + s.size() / 4);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && match(static_cast<unsigned char>(s[i]), static_cast<unsigned char>(s[i + 1]))) {
      emit(out, s[i], s[i + 1]);
      i += 2;
    } else {
      out += s[i++];
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<std::string> tokenize_13a(std::string_view line) {
  std::string s;
  s.reserve(line.size() + 2);
  for (std::size_t i = 0; i < line.size();) {
    if (line.substr(i, 9) == "<skipped>") {
      i += 9;
    } else if (line.substr(i, 2) == "-\n") {
      i += 2;
    } else {
      s += line[i] == '\n' ? ' ' : line[i];
      ++i;
    }
  }
  if (s.find('&') != std::string::npos) {
    auto replace_all = [&](std::string_view from, std::string_view to) {
      std::string r;
      std::size_t pos = 0;
      for (std::size_t hit; (hit = s.find(from, pos)) != std::string::npos; pos = hit + from.size())
        r.append(s, pos, hit - pos).append(to);
      r.append(s, pos);
      s = std::move(r);
    };
    replace_all("&quot;", "\"");
    replace_all("&amp;", "&");
    replace_all("&lt;", "<");
    replace_all("&gt;", ">");
  }
  s = " " + s + " ";

  std::string t;
  t.reserve(s.size() * 2);
  for (char c : s) {
    if (detail::is_13a_symbol(static_cast<unsigned char>(c))) {
      t += ' ';
      t += c;
      t += ' ';
    } else {
      t += c;
    }
  }
  using detail::is_digit;
  auto is_pc = [](unsigned char c) { return c == '.' || c == ','; };
  t = detail::rewrite_pairs(
      t, [&](unsigned char a, unsigned char b) { return !is_digit(a) && is_pc(b); },
      [](std::string& o, char a, char b) { o.append({a, ' ', b, ' '}); });
  t = detail::rewrite_pairs(
      t, [&](unsigned char a, unsigned char b) { return is_pc(a) && !is_digit(b); },
      [](std::string& o, char a, char b) { o.append({' ', a, ' ', b}); });
  t = detail::rewrite_pairs(
      t, [&](unsigned char a, unsigned char b) { return is_digit(a) && b == '-'; },
      [](std::string& o, char a, char b) { o.append({a, ' ', b, ' '}); });
  return text::split_whitespace(t);
}

struct BleuStats {
  std::array<std::size_t, 4> correct{};
  std::array<std::size_t, 4> total{};
  std::size_t sys_len = 0;
  std::size_t ref_len = 0;

  void add(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
    sys_len += hyp.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, std::size_t> ref_counts;
      for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[{ref.begin() + i, ref.begin() + i + n}];
      std::map<std::vector<std::string>, std::size_t> hyp_counts;
      for (std::size_t i = 0; i + n <= hyp.size(); ++i) ++hyp_counts[{hyp.begin() + i, hyp.begin() + i + n}];
      for (const auto& [gram, c] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) correct[n - 1] += std::min(c, it->second);
      }
      total[n - 1] += hyp.size() >= n ? hyp.size() - n + 1 : 0;
    }
  }

  double score() const {
    // log(0) stand-in, so a missing order drives the score to 0
    constexpr double kLogZero = -9999999999.0;
    std::array<double, 4> prec{};
    double smooth = 1.0;
    for (std::size_t n = 0; n < 4; ++n) {
      if (total[n] == 0) break;
      if (correct[n] == 0) {
        smooth *= 2;
        prec[n] = 100.0 / (smooth * static_cast<double>(total[n]));
      } else {
        prec[n] = 100.0 * static_cast<double>(correct[n]) / static_cast<double>(total[n]);
      }
    }
    double bp = 1.0;
    if (sys_len < ref_len)
      bp = sys_len > 0 ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(sys_len)) : 0.0;
    double sum = 0;
    for (double p : prec) sum += p > 0 ? std::log(p) : kLogZero;
    return bp * std::exp(sum / 4);
  }
};

/// Corpus BLEU in [0, 100]. Uncased lowercases both sides before tokenizing.
inline double compute_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                           bool cased = true) {
  if (hypotheses.size() != references.size())
    throw UsageError("bleu: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                     std::to_string(references.size()) + " references");
  BleuStats st;
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    auto prep = [&](const std::string& s) {
      std::string_view v = s;
      while (!v.empty() && text::is_space(v.back())) v.remove_suffix(1);
      return tokenize_13a(cased ? std::string(v) : text::utf8_lower(v));
    };
    st.add(prep(hypotheses[k]), prep(references[k]));
  }
  return st.score();
}

}  // namespace contrapro
