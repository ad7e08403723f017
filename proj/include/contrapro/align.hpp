#pragma once

// Lexical translation models trained with EM: IBM Model 1 and the
// diagonal-prior reparameterization of Model 2 used by fast_align.

#include <contrapro/alignment.hpp>
#include <contrapro/corpus.hpp>
#include <contrapro/error.hpp>
#include <contrapro/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace contrapro {

enum class Direction { fwd, rev };

inline Direction parse_direction(std::string_view s) {
  if (s == "fwd") return Direction::fwd;
  if (s == "rev") return Direction::rev;
  throw UsageError("unknown direction '" + std::string(s) + "'");
}

class Vocab {
public:
  int intern(std::string_view w) {
    auto it = ids_.find(std::string(w));
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(words_.size());
    words_.emplace_back(w);
    ids_.emplace(words_.back(), id);
    return id;
  }

  std::optional<int> find(std::string_view w) const {
    auto it = ids_.find(std::string(w));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }

private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> words_;
};

/// p(target | source) for every source word, plus the NULL source word.
class LexTable {
public:
  static constexpr std::string_view kNull = "<null>";
  static constexpr int kNullId = 0;

  LexTable() {
    src_.intern(kNull);
    rows_.emplace_back();
  }

  int add_source(std::string_view w) {
    int id = src_.intern(w);
    if (static_cast<std::size_t>(id) >= rows_.size()) rows_.resize(static_cast<std::size_t>(id) + 1);
    return id;
  }
  int add_target(std::string_view w) { return tgt_.intern(w); }

  std::optional<int> source_id(std::string_view w) const { return src_.find(w); }
  std::optional<int> target_id(std::string_view w) const { return tgt_.find(w); }
  const Vocab& source_vocab() const { return src_; }
  const Vocab& target_vocab() const { return tgt_; }
  std::size_t source_count() const { return rows_.size(); }

  double prob(int s, int t) const {
    if (s < 0 || static_cast<std::size_t>(s) >= rows_.size()) return 0.0;
    const auto& row = rows_[static_cast<std::size_t>(s)];
    auto it = row.find(t);
    return it == row.end() ? 0.0 : it->second;
  }

  double prob(std::string_view s, std::string_view t) const {
    auto si = src_.find(s);
    auto ti = tgt_.find(t);
    if (!si || !ti) return 0.0;
    return prob(*si, *ti);
  }

  void set(int s, int t, double p) { rows_.at(static_cast<std::size_t>(s))[t] = p; }
  void replace_row(int s, std::unordered_map<int, double> row) { rows_.at(static_cast<std::size_t>(s)) = std::move(row); }

  const std::unordered_map<int, double>& row(int s) const { return rows_.at(static_cast<std::size_t>(s)); }

  /// Rescales each non-empty row to sum to one.
  void normalize() {
    for (auto& row : rows_) {
      double z = 0.0;
      for (const auto& [t, p] : row) z += p;
      if (z <= 0.0) continue;
      for (auto& [t, p] : row) p /= z;
    }
  }

  /// Largest |row sum - 1| over non-empty rows; also flags negative entries.
  double max_normalization_error() const {
    double worst = 0.0;
    for (const auto& row : rows_) {
      if (row.empty()) continue;
      double z = 0.0;
      for (const auto& [t, p] : row) {
        if (p < 0.0 || !std::isfinite(p)) return std::numeric_limits<double>::infinity();
        z += p;
      }
      worst = std::max(worst, std::abs(z - 1.0));
    }
    return worst;
  }

  /// Argmax target for a source word; ties go to the lexicographically smaller word.
  std::optional<std::string> best_target(std::string_view s) const {
    auto si = src_.find(s);
    if (!si) return std::nullopt;
    const auto& row = rows_[static_cast<std::size_t>(*si)];
    const std::string* best = nullptr;
    double best_p = -1.0;
    for (const auto& [t, p] : row) {
      const auto& w = tgt_.word(t);
      if (p > best_p || (p == best_p && best && w < *best)) {
        best_p = p;
        best = &w;
      }
    }
    if (!best) return std::nullopt;
    return *best;
  }

  /// Interchange format: "src \t tgt \t prob" lines sorted by (src, tgt).
  void write_tsv(std::ostream& out) const {
    std::vector<std::tuple<std::string, std::string, double>> rows;
    for (std::size_t s = 0; s < rows_.size(); ++s)
      for (const auto& [t, p] : rows_[s]) rows.emplace_back(src_.word(static_cast<int>(s)), tgt_.word(t), p);
    std::sort(rows.begin(), rows.end());
    out.precision(17);
    for (const auto& [s, t, p] : rows) out << s << '\t' << t << '\t' << p << '\n';
  }

  static LexTable read_tsv(std::istream& in) {
    LexTable table;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
      ++ln;
      if (line.empty()) continue;
      auto a = line.find('\t');
      auto b = a == std::string::npos ? a : line.find('\t', a + 1);
      if (b == std::string::npos) throw StructuralError("lexical table line " + std::to_string(ln) + ": expected 3 fields");
      double p = 0.0;
      try {
        p = std::stod(line.substr(b + 1));
      } catch (const std::exception&) {
        throw StructuralError("lexical table line " + std::to_string(ln) + ": bad probability");
      }
      if (!(p >= 0.0 && p <= 1.0)) throw StructuralError("lexical table line " + std::to_string(ln) + ": probability outside [0,1]");
      int s = table.add_source(line.substr(0, a));
      int t = table.add_target(line.substr(a + 1, b - a - 1));
      table.set(s, t, p);
    }
    return table;
  }

private:
  Vocab src_;
  Vocab tgt_;
  std::vector<std::unordered_map<int, double>> rows_;
};

struct DiagAlignModel {
  LexTable lex;
  double tension = 4.0;
  double null_prob = 0.08;
  Direction direction = Direction::fwd;
};

struct EmOptions {
  Direction direction = Direction::fwd;
  /// Worker count for the E-step; 1 gives the cross-platform deterministic path.
  std::size_t jobs = 1;
};

/// Used when a (source, target) pair was never observed.
inline constexpr double kFloorProb = 1e-12;

namespace detail {

struct EncodedPair {
  std::vector<int> src;  // without NULL
  std::vector<int> tgt;
};

inline std::vector<EncodedPair> encode(const ParallelCorpus& corpus, LexTable& table, Direction dir) {
  std::vector<EncodedPair> out;
  out.reserve(corpus.pair_count());
  for (const auto& doc : corpus.documents)
    for (const auto& pair : doc.pairs) {
      const Sentence& s = dir == Direction::fwd ? pair.source : pair.target;
      const Sentence& t = dir == Direction::fwd ? pair.target : pair.source;
      EncodedPair e;
      for (const auto& tok : s.tokens) e.src.push_back(table.add_source(tok.surface));
      for (const auto& tok : t.tokens) e.tgt.push_back(table.add_target(tok.surface));
      out.push_back(std::move(e));
    }
  return out;
}

using CountTable = std::vector<std::unordered_map<int, double>>;

struct EStepResult {
  CountTable counts;
  double log_likelihood = 0.0;
};

// Unnormalized diagonal-prior weight of source position j (1-based) for
// target position i (1-based); lengths m (target) and n (source).
inline double diagonal_weight(std::size_t i, std::size_t j, std::size_t m, std::size_t n, double tension) {
  double h = -std::abs(static_cast<double>(i) / static_cast<double>(m) - static_cast<double>(j) / static_cast<double>(n));
  return std::exp(h * tension);
}

inline double lookup(const LexTable& table, int s, int t) {
  double p = table.prob(s, t);
  return p > 0.0 ? p : kFloorProb;
}

/// Alignment prior over {NULL, 1..n} for each target position. With
/// `diag == nullopt` this is IBM Model 1's uniform 1/(n+1).
struct Prior {
  std::optional<std::pair<double, double>> diag;  // (tension, null_prob)

  void fill(std::size_t i, std::size_t m, std::size_t n, std::vector<double>& out) const {
    out.assign(n + 1, 0.0);
    if (!diag) {
      for (auto& p : out) p = 1.0 / static_cast<double>(n + 1);
      return;
    }
    const auto [tension, p0] = *diag;
    double z = 0.0;
    for (std::size_t j = 1; j <= n; ++j) z += diagonal_weight(i, j, m, n, tension);
    out[0] = p0;
    for (std::size_t j = 1; j <= n; ++j) out[j] = (1.0 - p0) * diagonal_weight(i, j, m, n, tension) / z;
  }
};

inline EStepResult e_step(const std::vector<EncodedPair>& data, const LexTable& table, const Prior& prior,
                          std::size_t begin, std::size_t end) {
  EStepResult r;
  r.counts.resize(table.source_count());
  std::vector<double> pri;
  std::vector<double> post;
  for (std::size_t k = begin; k < end; ++k) {
    const auto& e = data[k];
    const std::size_t n = e.src.size();
    const std::size_t m = e.tgt.size();
    if (m == 0) continue;
    for (std::size_t i = 0; i < m; ++i) {
      const int t = e.tgt[i];
      prior.fill(i + 1, m, n, pri);
      post.assign(n + 1, 0.0);
      post[0] = pri[0] * lookup(table, LexTable::kNullId, t);
      for (std::size_t j = 1; j <= n; ++j) post[j] = pri[j] * lookup(table, e.src[j - 1], t);
      double z = 0.0;
      for (double v : post) z += v;
      r.log_likelihood += std::log(z);
      r.counts[LexTable::kNullId][t] += post[0] / z;
      for (std::size_t j = 1; j <= n; ++j) r.counts[static_cast<std::size_t>(e.src[j - 1])][t] += post[j] / z;
    }
  }
  return r;
}

// One EM iteration: parallel E-step with per-worker tables merged in worker
// order, then the M-step. Returns the log-likelihood under `table`.
inline double em_iteration(const std::vector<EncodedPair>& data, LexTable& table, const Prior& prior,
                           std::size_t jobs) {
  const std::size_t shards = shard_count(data.size(), jobs);
  std::vector<EStepResult> partial(shards);
  for_each_shard(data.size(), jobs, [&](std::size_t w, std::size_t b, std::size_t e) {
    partial[w] = e_step(data, table, prior, b, e);
  });

  CountTable merged(table.source_count());
  double ll = 0.0;
  for (auto& p : partial) {
    ll += p.log_likelihood;
    for (std::size_t s = 0; s < p.counts.size(); ++s)
      for (const auto& [t, c] : p.counts[s]) merged[s][t] += c;
  }

  for (std::size_t s = 0; s < table.source_count(); ++s) table.replace_row(static_cast<int>(s), std::move(merged[s]));
  table.normalize();
  return ll;
}

inline void check_corpus(const std::vector<EncodedPair>& data) {
  bool any = false;
  for (const auto& e : data) any = any || (!e.src.empty() && !e.tgt.empty());
  if (!any) throw UsageError("cannot train an alignment model on an empty corpus");
}

}  // namespace detail

/// Corpus log-likelihood under a model. Pass `diag` for the diagonal prior.
inline double log_likelihood(const ParallelCorpus& corpus, const LexTable& table, Direction dir,
                             std::optional<std::pair<double, double>> diag = std::nullopt) {
  LexTable scratch = table;
  auto data = detail::encode(corpus, scratch, dir);
  return detail::e_step(data, scratch, detail::Prior{diag}, 0, data.size()).log_likelihood;
}

/// IBM Model 1 EM from a uniform start over co-occurring words. If
/// `trace` is given, it receives the log-likelihood of the parameters
/// entering each iteration.
inline LexTable train_ibm1(const ParallelCorpus& corpus, int iterations, const EmOptions& opts = {},
                           std::vector<double>* trace = nullptr) {
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  LexTable table;
  auto data = detail::encode(corpus, table, opts.direction);
  detail::check_corpus(data);

  for (const auto& e : data)
    for (int t : e.tgt) {
      table.set(LexTable::kNullId, t, 1.0);
      for (int s : e.src) table.set(s, t, 1.0);
    }
  table.normalize();

  const detail::Prior uniform{};
  for (int it = 0; it < iterations; ++it) {
    double ll = detail::em_iteration(data, table, uniform, opts.jobs);
    if (trace) trace->push_back(ll);
  }
  return table;
}

/// Re-estimates `init` under the diagonal alignment prior
/// p(a_i = j) = (1 - p0) exp(-tension |i/m - j/n|) / Z, p(a_i = NULL) = p0.
inline DiagAlignModel train_diag(const ParallelCorpus& corpus, const LexTable& init, int iterations, double tension,
                                 double null_prob, const EmOptions& opts = {}, std::vector<double>* trace = nullptr) {
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  if (!(tension > 0.0)) throw UsageError("diagonal tension must be positive");
  if (!(null_prob >= 0.0 && null_prob < 1.0)) throw UsageError("null probability must lie in [0, 1)");
  if (init.max_normalization_error() > 1e-6) throw UsageError("initial lexical table is not normalized");

  DiagAlignModel model{init, tension, null_prob, opts.direction};
  auto data = detail::encode(corpus, model.lex, opts.direction);
  detail::check_corpus(data);
  const detail::Prior prior{std::make_pair(tension, null_prob)};
  for (int it = 0; it < iterations; ++it) {
    double ll = detail::em_iteration(data, model.lex, prior, opts.jobs);
    if (trace) trace->push_back(ll);
  }
  return model;
}

/// Best source position (or NULL) for every target token. Links come back
/// in (source, target) orientation of `pair` regardless of `direction`;
/// a `rev` model must have been trained with Direction::rev.
inline Alignment viterbi_align(const DiagAlignModel& model, const SentencePair& pair, Direction direction) {
  if (pair.source.empty() || pair.target.empty()) throw UsageError("cannot align an empty sentence");
  const Sentence& s = direction == Direction::fwd ? pair.source : pair.target;
  const Sentence& t = direction == Direction::fwd ? pair.target : pair.source;
  const std::size_t n = s.size();
  const std::size_t m = t.size();

  std::vector<int> src_ids(n, -1);
  for (std::size_t j = 0; j < n; ++j)
    if (auto id = model.lex.source_id(s[j])) src_ids[j] = *id;

  const detail::Prior prior{std::make_pair(model.tension, model.null_prob)};
  std::vector<double> pri;
  Alignment out;
  for (std::size_t i = 0; i < m; ++i) {
    auto tid = model.lex.target_id(t[i]);
    auto score = [&](int sid) {
      if (!tid || sid < 0) return kFloorProb;
      return detail::lookup(model.lex, sid, *tid);
    };
    prior.fill(i + 1, m, n, pri);
    // NULL first; strictly-greater replacement keeps the smaller position on ties.
    double best = pri[0] * score(LexTable::kNullId);
    long best_j = -1;
    for (std::size_t j = 0; j < n; ++j) {
      double v = pri[j + 1] * score(src_ids[j]);
      if (v > best) {
        best = v;
        best_j = static_cast<long>(j);
      }
    }
    if (best_j < 0) continue;
    auto j = static_cast<std::size_t>(best_j);
    if (direction == Direction::fwd)
      out.links.insert({j, i});
    else
      out.links.insert({i, j});
  }
  return out;
}

struct AlignerConfig {
  int ibm1_iterations = 5;
  int diag_iterations = 5;
  double tension = 4.0;
  double null_prob = 0.08;
  Symmetrization heuristic = Symmetrization::grow_diag_final_and;
  std::size_t jobs = 1;
};

struct TrainedAligner {
  DiagAlignModel fwd;
  DiagAlignModel rev;
};

inline TrainedAligner train_aligner(const ParallelCorpus& corpus, const AlignerConfig& cfg) {
  TrainedAligner out;
  for (Direction dir : {Direction::fwd, Direction::rev}) {
    EmOptions opts{dir, cfg.jobs};
    auto ibm1 = train_ibm1(corpus, cfg.ibm1_iterations, opts);
    auto model = train_diag(corpus, ibm1, cfg.diag_iterations, cfg.tension, cfg.null_prob, opts);
    (dir == Direction::fwd ? out.fwd : out.rev) = std::move(model);
  }
  return out;
}

/// Symmetrized alignments for every pair; empty sentences get no links.
inline CorpusAlignment align_corpus(const ParallelCorpus& corpus, const TrainedAligner& aligner,
                                    Symmetrization heuristic) {
  CorpusAlignment out;
  for (const auto& doc : corpus.documents) {
    auto& d = out.emplace_back();
    for (const auto& pair : doc.pairs) {
      if (pair.source.empty() || pair.target.empty()) {
        d.emplace_back();
        continue;
      }
      d.push_back(symmetrize(viterbi_align(aligner.fwd, pair, Direction::fwd),
                             viterbi_align(aligner.rev, pair, Direction::rev), heuristic));
    }
  }
  return out;
}

inline CorpusAlignment align_corpus(const ParallelCorpus& corpus, const AlignerConfig& cfg) {
  return align_corpus(corpus, train_aligner(corpus, cfg), cfg.heuristic);
}

}  // namespace contrapro
