#pragma once

#include <contrapro/error.hpp>
#include <contrapro/text.hpp>
#include <contrapro/tokenize.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace contrapro {

struct Token {
  std::string surface;
  std::size_t index = 0;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  Side lang = Side::source;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens.at(i).surface; }

  std::vector<std::string> words() const {
    std::vector<std::string> w;
    w.reserve(tokens.size());
    for (const auto& t : tokens) w.push_back(t.surface);
    return w;
  }

  /// Tokens joined by single spaces.
  std::string text() const { return text::join(words()); }

  bool operator==(const Sentence&) const = default;

  static Sentence from_words(const std::vector<std::string>& words, Side lang) {
    Sentence s;
    s.lang = lang;
    s.tokens.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i].empty()) throw StructuralError("empty token at position " + std::to_string(i));
      s.tokens.push_back({words[i], i});
    }
    return s;
  }
};

/// Tokenizes raw text into indexed tokens.
inline std::vector<Token> tokenize(std::string_view raw, Side lang) {
  auto words = tokenize_words(raw, lang);
  std::vector<Token> out;
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) out.push_back({std::move(words[i]), i});
  return out;
}

/// Builds a sentence from a raw line, either tokenizing it or trusting the
/// existing whitespace segmentation.
inline Sentence make_sentence(std::string_view raw, Side lang, bool pretokenized) {
  return Sentence::from_words(pretokenized ? text::split_whitespace(raw) : tokenize_words(raw, lang), lang);
}

struct SentencePair {
  Sentence source;
  Sentence target;

  const Sentence& side(Side s) const { return s == Side::source ? source : target; }
};

struct ParallelDocument {
  std::string doc_id;
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
};

struct ParallelCorpus {
  std::string corpus_id;
  std::vector<ParallelDocument> documents;
  /// True when no document boundaries were supplied; context may then cross
  /// real document breaks.
  bool synthetic_boundaries = false;

  std::size_t pair_count() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d.size();
    return n;
  }

  const ParallelDocument* find(std::string_view doc_id) const {
    for (const auto& d : documents)
      if (d.doc_id == doc_id) return &d;
    return nullptr;
  }

  void validate() const {
    std::set<std::string_view> seen;
    for (const auto& d : documents)
      if (!seen.insert(d.doc_id).second) throw StructuralError("duplicate document id '" + d.doc_id + "'");
  }
};

struct LoadOptions {
  bool pretokenized = false;
  std::string corpus_id;
};

/// Parses a boundary file: strictly increasing decimal end indices, one per line.
inline std::vector<std::size_t> parse_boundaries(const std::vector<std::string>& lines) {
  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto fields = text::split_whitespace(lines[i]);
    if (fields.empty()) continue;
    const auto& f = fields.front();
    if (fields.size() != 1 || !std::all_of(f.begin(), f.end(), text::is_ascii_digit))
      throw StructuralError("boundary line " + std::to_string(i + 1) + " is not a decimal index: '" + lines[i] + "'");
    ends.push_back(std::stoull(f));
  }
  return ends;
}

inline std::vector<std::size_t> read_boundaries(const std::string& path) {
  return parse_boundaries(text::read_lines(path));
}

inline std::string document_id(std::size_t k) { return "doc" + std::to_string(k); }

/// Assembles a corpus from line-aligned source and target lines. Without
/// `boundaries` the whole input becomes one synthetic document.
inline ParallelCorpus build_parallel_corpus(const std::vector<std::string>& src_lines,
                                            const std::vector<std::string>& tgt_lines,
                                            const std::optional<std::vector<std::size_t>>& boundaries,
                                            const LoadOptions& opts = {}) {
  if (src_lines.size() != tgt_lines.size())
    throw StructuralError("line-count mismatch: source has " + std::to_string(src_lines.size()) +
                          " lines, target has " + std::to_string(tgt_lines.size()));
  const std::size_t n = src_lines.size();

  std::vector<std::size_t> ends;
  ParallelCorpus corpus;
  corpus.corpus_id = opts.corpus_id;
  if (boundaries) {
    ends = *boundaries;
    std::size_t prev = 0;
    for (std::size_t k = 0; k < ends.size(); ++k) {
      if (ends[k] > n)
        throw StructuralError("boundary index " + std::to_string(ends[k]) + " out of range (line count " +
                              std::to_string(n) + ")");
      if (ends[k] <= prev)
        throw StructuralError("boundary indices must be strictly increasing and positive (entry " +
                              std::to_string(k + 1) + ")");
      prev = ends[k];
    }
    if (prev != n)
      throw StructuralError("boundaries end at " + std::to_string(prev) + " but the corpus has " + std::to_string(n) +
                            " lines");
  } else {
    corpus.synthetic_boundaries = true;
    if (n > 0) ends.push_back(n);
  }

  std::size_t begin = 0;
  for (std::size_t k = 0; k < ends.size(); ++k) {
    ParallelDocument doc;
    doc.doc_id = boundaries ? document_id(k) : "synthetic-" + std::to_string(k);
    for (std::size_t i = begin; i < ends[k]; ++i)
      doc.pairs.push_back({make_sentence(src_lines[i], Side::source, opts.pretokenized),
                           make_sentence(tgt_lines[i], Side::target, opts.pretokenized)});
    corpus.documents.push_back(std::move(doc));
    begin = ends[k];
  }
  return corpus;
}

inline ParallelCorpus load_parallel_documents(const std::string& src_path, const std::string& tgt_path,
                                              const std::optional<std::vector<std::size_t>>& boundaries,
                                              LoadOptions opts = {}) {
  if (opts.corpus_id.empty()) opts.corpus_id = src_path;
  return build_parallel_corpus(text::read_lines(src_path), text::read_lines(tgt_path), boundaries, opts);
}

/// JSONL document format: {"doc_id": str, "src": [str], "tgt": [str]} per line.
inline ParallelCorpus parse_jsonl_documents(const std::vector<std::string>& lines, const LoadOptions& opts = {}) {
  ParallelCorpus corpus;
  corpus.corpus_id = opts.corpus_id;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (text::split_whitespace(lines[ln]).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(lines[ln]);
    } catch (const nlohmann::json::exception& e) {
      throw StructuralError("document line " + std::to_string(ln + 1) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("doc_id") || !rec["doc_id"].is_string() || !rec.contains("src") ||
        !rec["src"].is_array() || !rec.contains("tgt") || !rec["tgt"].is_array())
      throw StructuralError("document line " + std::to_string(ln + 1) + ": expected doc_id, src[], tgt[]");
    const auto& src = rec["src"];
    const auto& tgt = rec["tgt"];
    ParallelDocument doc;
    doc.doc_id = rec["doc_id"].get<std::string>();
    if (src.size() != tgt.size())
      throw StructuralError("document '" + doc.doc_id + "': source has " + std::to_string(src.size()) +
                            " sentences, target has " + std::to_string(tgt.size()));
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (!src[i].is_string() || !tgt[i].is_string())
        throw StructuralError("document '" + doc.doc_id + "': sentence " + std::to_string(i) + " is not a string");
      doc.pairs.push_back({make_sentence(src[i].get<std::string>(), Side::source, opts.pretokenized),
                           make_sentence(tgt[i].get<std::string>(), Side::target, opts.pretokenized)});
    }
    corpus.documents.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

inline ParallelCorpus load_jsonl_documents(const std::string& path, LoadOptions opts = {}) {
  if (opts.corpus_id.empty()) opts.corpus_id = path;
  return parse_jsonl_documents(text::read_lines(path), opts);
}

/// One line per sentence pair, in corpus order, tokens joined by single spaces.
inline std::vector<std::string> to_lines(const ParallelCorpus& corpus, Side side) {
  std::vector<std::string> lines;
  for (const auto& d : corpus.documents)
    for (const auto& p : d.pairs) lines.push_back(p.side(side).text());
  return lines;
}

/// Up to `k` sentences preceding `sent_idx` on `side`, oldest first; stops at
/// the document start.
inline std::vector<Sentence> context_window(const ParallelDocument& doc, std::size_t sent_idx, std::size_t k,
                                            Side side) {
  if (sent_idx >= doc.size())
    throw StructuralError("sentence index " + std::to_string(sent_idx) + " out of range for document '" +
                          doc.doc_id + "' with " + std::to_string(doc.size()) + " sentences");
  std::size_t first = sent_idx >= k ? sent_idx - k : 0;
  std::vector<Sentence> out;
  for (std::size_t i = first; i < sent_idx; ++i) out.push_back(doc.pairs[i].side(side));
  return out;
}

}  // namespace contrapro
