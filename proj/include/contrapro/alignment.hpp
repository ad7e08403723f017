#pragma once

// Word alignments for one sentence pair, Pharaoh "i-j" I/O, symmetrization
// heuristics, and per-word alignment statistics.

#include <contrapro/corpus.hpp>
#include <contrapro/error.hpp>
#include <contrapro/text.hpp>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace contrapro {

struct Link {
  std::size_t src = 0;
  std::size_t tgt = 0;

  auto operator<=>(const Link&) const = default;
};

/// Link set for one sentence pair; `src` indexes the source (English) side.
struct Alignment {
  std::set<Link> links;

  bool contains(std::size_t s, std::size_t t) const { return links.count({s, t}) > 0; }
  bool empty() const { return links.empty(); }
  std::size_t size() const { return links.size(); }

  std::vector<std::size_t> targets_of(std::size_t s) const {
    std::vector<std::size_t> out;
    for (auto it = links.lower_bound({s, 0}); it != links.end() && it->src == s; ++it) out.push_back(it->tgt);
    return out;
  }

  bool operator==(const Alignment&) const = default;

  /// Pharaoh format: "i-j" pairs separated by spaces, sorted by (i, j).
  std::string to_pharaoh() const {
    std::string out;
    for (const auto& l : links) {
      if (!out.empty()) out += ' ';
      out += std::to_string(l.src) + "-" + std::to_string(l.tgt);
    }
    return out;
  }

  static Alignment from_pharaoh(std::string_view line) {
    Alignment a;
    for (const auto& tok : text::split_whitespace(line)) {
      auto dash = tok.find('-');
      bool ok = dash != std::string::npos && dash > 0 && dash + 1 < tok.size() &&
                std::all_of(tok.begin(), tok.begin() + static_cast<std::ptrdiff_t>(dash), text::is_ascii_digit) &&
                std::all_of(tok.begin() + static_cast<std::ptrdiff_t>(dash) + 1, tok.end(), text::is_ascii_digit);
      if (!ok) throw StructuralError("malformed alignment link '" + tok + "'");
      a.links.insert({std::stoull(tok.substr(0, dash)), std::stoull(tok.substr(dash + 1))});
    }
    return a;
  }

  void check_bounds(std::size_t src_len, std::size_t tgt_len) const {
    for (const auto& l : links)
      if (l.src >= src_len || l.tgt >= tgt_len)
        throw StructuralError("alignment link " + std::to_string(l.src) + "-" + std::to_string(l.tgt) +
                              " outside sentence lengths " + std::to_string(src_len) + "x" + std::to_string(tgt_len));
  }
};

/// One Alignment per sentence pair, grouped by document like the corpus.
using CorpusAlignment = std::vector<std::vector<Alignment>>;

inline std::vector<std::string> to_pharaoh_lines(const CorpusAlignment& al) {
  std::vector<std::string> lines;
  for (const auto& doc : al)
    for (const auto& a : doc) lines.push_back(a.to_pharaoh());
  return lines;
}

/// Splits flat Pharaoh lines into the corpus' document structure and checks
/// every link against the sentence lengths.
inline CorpusAlignment parse_corpus_alignment(const std::vector<std::string>& lines, const ParallelCorpus& corpus) {
  if (lines.size() != corpus.pair_count())
    throw StructuralError("alignment file has " + std::to_string(lines.size()) + " lines, corpus has " +
                          std::to_string(corpus.pair_count()) + " sentence pairs");
  CorpusAlignment out;
  std::size_t k = 0;
  for (const auto& doc : corpus.documents) {
    auto& d = out.emplace_back();
    for (const auto& pair : doc.pairs) {
      Alignment a;
      try {
        a = Alignment::from_pharaoh(lines[k]);
        a.check_bounds(pair.source.size(), pair.target.size());
      } catch (const StructuralError& e) {
        throw StructuralError("alignment line " + std::to_string(k + 1) + ": " + e.what());
      }
      d.push_back(std::move(a));
      ++k;
    }
  }
  return out;
}

enum class Symmetrization { intersection, union_, grow_diag_final_and };

inline Symmetrization parse_symmetrization(std::string_view s) {
  if (s == "intersection" || s == "intersect") return Symmetrization::intersection;
  if (s == "union") return Symmetrization::union_;
  if (s == "grow-diag-final-and" || s == "gdfa") return Symmetrization::grow_diag_final_and;
  throw UsageError("unknown symmetrization heuristic '" + std::string(s) + "'");
}

inline std::string_view to_string(Symmetrization h) {
  switch (h) {
    case Symmetrization::intersection: return "intersection";
    case Symmetrization::union_: return "union";
    case Symmetrization::grow_diag_final_and: return "grow-diag-final-and";
  }
  return "?";
}

namespace detail {

class LinkGrid {
public:
  LinkGrid(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_(rows * cols, 0) {}

  bool in_bounds(long r, long c) const {
    return r >= 0 && c >= 0 && static_cast<std::size_t>(r) < rows_ && static_cast<std::size_t>(c) < cols_;
  }
  bool get(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c) { cells_[r * cols_ + c] = 1; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<char> cells_;
};

}  // namespace detail

/// Combines two directional alignments of the same sentence pair.
inline Alignment symmetrize(const Alignment& fwd, const Alignment& rev, Symmetrization heuristic) {
  Alignment inter;
  std::set_intersection(fwd.links.begin(), fwd.links.end(), rev.links.begin(), rev.links.end(),
                        std::inserter(inter.links, inter.links.end()));
  if (heuristic == Symmetrization::intersection) return inter;

  Alignment uni;
  std::set_union(fwd.links.begin(), fwd.links.end(), rev.links.begin(), rev.links.end(),
                 std::inserter(uni.links, uni.links.end()));
  if (heuristic == Symmetrization::union_ || uni.empty()) return uni;

  std::size_t rows = 0;
  std::size_t cols = 0;
  for (const auto& l : uni.links) {
    rows = std::max(rows, l.src + 1);
    cols = std::max(cols, l.tgt + 1);
  }
  detail::LinkGrid in_union(rows, cols);
  for (const auto& l : uni.links) in_union.set(l.src, l.tgt);

  detail::LinkGrid result(rows, cols);
  std::vector<char> src_aligned(rows, 0);
  std::vector<char> tgt_aligned(cols, 0);
  auto add = [&](std::size_t r, std::size_t c) {
    result.set(r, c);
    src_aligned[r] = 1;
    tgt_aligned[c] = 1;
  };
  for (const auto& l : inter.links) add(l.src, l.tgt);

  static constexpr long kNeighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        if (!result.get(r, c)) continue;
        for (const auto& d : kNeighbors) {
          long nr = static_cast<long>(r) + d[0];
          long nc = static_cast<long>(c) + d[1];
          if (!result.in_bounds(nr, nc)) continue;
          auto ur = static_cast<std::size_t>(nr);
          auto uc = static_cast<std::size_t>(nc);
          if ((!src_aligned[ur] || !tgt_aligned[uc]) && in_union.get(ur, uc) && !result.get(ur, uc)) {
            add(ur, uc);
            grew = true;
          }
        }
      }
  }

  // final-and, forward direction first
  for (const Alignment* directional : {&fwd, &rev})
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        if (!src_aligned[r] && !tgt_aligned[c] && directional->contains(r, c)) add(r, c);

  Alignment out;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (result.get(r, c)) out.links.insert({r, c});
  return out;
}

struct AlignmentStatRow {
  std::string target;
  double count = 0.0;
  double probability = 0.0;
};

struct AlignmentStats {
  std::string source_word;
  /// Occurrences of the source word, aligned or not.
  std::size_t occurrences = 0;
  std::vector<AlignmentStatRow> rows;
};

/// Where `src_word` (case-folded) is aligned to on the target side. Each
/// occurrence carries unit mass split evenly over its links, so the
/// probabilities sum to at most one.
inline AlignmentStats alignment_stats(const ParallelCorpus& corpus, const CorpusAlignment& alignments,
                                      std::string_view src_word) {
  if (alignments.size() != corpus.documents.size())
    throw UsageError("alignments cover " + std::to_string(alignments.size()) + " documents, corpus has " +
                     std::to_string(corpus.documents.size()));
  AlignmentStats stats;
  stats.source_word = std::string(src_word);
  const std::string needle = text::utf8_lower(src_word);
  std::map<std::string, double> counts;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& doc = corpus.documents[d];
    if (alignments[d].size() != doc.size())
      throw UsageError("alignments for document '" + doc.doc_id + "' cover " + std::to_string(alignments[d].size()) +
                       " of " + std::to_string(doc.size()) + " pairs");
    for (std::size_t p = 0; p < doc.size(); ++p) {
      const auto& pair = doc.pairs[p];
      for (std::size_t i = 0; i < pair.source.size(); ++i) {
        if (text::utf8_lower(pair.source[i]) != needle) continue;
        ++stats.occurrences;
        auto tgts = alignments[d][p].targets_of(i);
        for (auto t : tgts) counts[pair.target[t]] += 1.0 / static_cast<double>(tgts.size());
      }
    }
  }
  for (const auto& [word, c] : counts)
    stats.rows.push_back({word, c, c / static_cast<double>(stats.occurrences)});
  std::stable_sort(stats.rows.begin(), stats.rows.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  return stats;
}

}  // namespace contrapro
