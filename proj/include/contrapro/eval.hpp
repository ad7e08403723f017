#pragma once

#include <contrapro/error.hpp>
#include <contrapro/parallel.hpp>
#include <contrapro/scorer.hpp>
#include <contrapro/testgen.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace contrapro {

/// Wire id of the reference ("ref") or of the variant with pronoun `tag`.
inline std::string request_id(const std::string& example_id, std::string_view tag) {
  return example_id + "/" + std::string(tag);
}

/// Gold antecedent gender for the oracle scorers: the recorded gender when
/// known, otherwise the one the reference pronoun implies.
inline Gender gold_gender(const ContrastiveExample& e) {
  return e.tgt_antecedent_gender != Gender::unknown ? e.tgt_antecedent_gender : class_gender(e.ref_class);
}

/// Reference first, then the variants in stored order. `context_depth`
/// keeps only the nearest sentences of each context; it never adds any.
inline std::vector<ScoreRequest> build_requests(const ContrastiveExample& e,
                                                std::optional<std::size_t> context_depth = std::nullopt) {
  auto cut = [&](const std::vector<std::string>& ctx) {
    if (!context_depth || *context_depth >= ctx.size()) return ctx;
    return std::vector<std::string>(ctx.end() - static_cast<std::ptrdiff_t>(*context_depth), ctx.end());
  };
  const auto id = e.example_id();
  std::vector<ScoreRequest> out;
  out.push_back({request_id(id, "ref"), cut(e.src_context), e.src, cut(e.ref_context), e.ref});
  for (const auto& v : e.contrastive)
    out.push_back({request_id(id, to_string(v.replaced)), out[0].src_context, e.src, out[0].tgt_context, v.tgt});
  return out;
}

inline std::vector<ScoreHint> build_hints(const ContrastiveExample& e) {
  std::vector<ScoreHint> out{{e.ref_class, gold_gender(e)}};
  for (const auto& v : e.contrastive) out.push_back({v.replaced, gold_gender(e)});
  return out;
}

struct Decision {
  std::string example_id;
  bool correct = false;
  /// Reference score minus the best variant score.
  double margin = 0;
  double ref_score = 0;
  std::vector<double> variant_scores;
};

/// Correct iff the reference beats every variant strictly; ties are wrong.
inline Decision judge_scores(std::string example_id, double ref, std::vector<double> variants) {
  if (variants.empty()) throw UsageError("judge: example '" + example_id + "' has no variant scores");
  double best = *std::max_element(variants.begin(), variants.end());
  Decision d;
  d.example_id = std::move(example_id);
  d.margin = ref - best;
  d.correct = d.margin > 0;
  d.ref_score = ref;
  d.variant_scores = std::move(variants);
  return d;
}

using ScoreTable = std::unordered_map<std::string, double>;

inline Decision judge(const ContrastiveExample& e, const ScoreTable& scores) {
  const auto id = e.example_id();
  auto get = [&](std::string_view tag) {
    auto it = scores.find(request_id(id, tag));
    if (it == scores.end()) throw UsageError("judge: no score for '" + request_id(id, tag) + "'");
    return it->second;
  };
  std::vector<double> variants;
  for (const auto& v : e.contrastive) variants.push_back(get(to_string(v.replaced)));
  return judge_scores(id, get("ref"), std::move(variants));
}

/// Makes the scorer for shard `k`; called once per shard.
using ScorerFactory = std::function<std::unique_ptr<Scorer>(std::size_t shard)>;

struct EvalOptions {
  std::size_t jobs = 1;
  std::optional<std::size_t> context_depth;
};

/// Scores every example and judges it. Examples are split into contiguous
/// shards, each scored by its own scorer; decisions come back in test-set order.
inline std::vector<Decision> evaluate(const TestSet& ts, const ScorerFactory& make_scorer, const EvalOptions& opt = {}) {
  std::vector<Decision> out(ts.examples.size());
  for_each_shard(ts.examples.size(), opt.jobs, [&](std::size_t shard, std::size_t begin, std::size_t end) {
    std::vector<ScoreRequest> requests;
    std::vector<ScoreHint> hints;
    for (std::size_t k = begin; k < end; ++k) {
      auto r = build_requests(ts.examples[k], opt.context_depth);
      auto h = build_hints(ts.examples[k]);
      std::move(r.begin(), r.end(), std::back_inserter(requests));
      std::move(h.begin(), h.end(), std::back_inserter(hints));
    }
    auto scorer = make_scorer(shard);
    auto responses = score_batch(*scorer, requests, hints);
    ScoreTable table;
    for (auto& r : responses) table.emplace(std::move(r.id), r.logprob);
    for (std::size_t k = begin; k < end; ++k) out[k] = judge(ts.examples[k], table);
  });
  return out;
}

struct Cell {
  std::size_t n = 0;
  std::size_t correct = 0;

  void add(bool ok) {
    ++n;
    correct += ok;
  }
  /// NaN for an empty cell.
  double accuracy() const {
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(correct) / static_cast<double>(n);
  }
};

struct EvaluationReport {
  static constexpr std::array<std::string_view, 2> kLocations = {"intrasegmental", "external"};

  std::string scorer;
  Cell total;
  std::array<Cell, 3> by_pronoun{};
  std::array<Cell, 5> by_distance{};
  std::array<Cell, 2> by_location{};
  std::vector<Decision> decisions;

  double total_accuracy() const { return total.accuracy(); }
};

/// Requires exactly one decision per test-set example.
inline EvaluationReport aggregate(const std::vector<Decision>& decisions, const TestSet& ts, std::string scorer = "") {
  std::unordered_map<std::string, const Decision*> by_id;
  for (const auto& d : decisions)
    if (!by_id.emplace(d.example_id, &d).second) throw UsageError("aggregate: two decisions for '" + d.example_id + "'");
  if (by_id.size() != ts.examples.size())
    throw UsageError("aggregate: " + std::to_string(by_id.size()) + " decisions for " +
                     std::to_string(ts.examples.size()) + " examples");
  EvaluationReport rep;
  rep.scorer = std::move(scorer);
  for (const auto& e : ts.examples) {
    auto it = by_id.find(e.example_id());
    if (it == by_id.end()) throw UsageError("aggregate: no decision for '" + e.example_id() + "'");
    const bool ok = it->second->correct;
    rep.total.add(ok);
    rep.by_pronoun[class_index(e.ref_class)].add(ok);
    rep.by_distance[DistanceTable::bucket(e.ante_distance)].add(ok);
    rep.by_location[e.ante_distance == 0 ? 0 : 1].add(ok);
    rep.decisions.push_back(*it->second);
  }
  return rep;
}

/// Three decimals; "-" for an empty cell.
inline std::string format_accuracy(const Cell& c) {
  if (c.n == 0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", c.accuracy());
  return buf;
}

namespace detail {

struct ReportTable {
  std::vector<std::string> header;
  std::vector<const Cell*> cells;
};

inline ReportTable pronoun_table(const EvaluationReport& r) {
  return {{"total", "es", "er", "sie"}, {&r.total, &r.by_pronoun[0], &r.by_pronoun[1], &r.by_pronoun[2]}};
}

inline ReportTable location_table(const EvaluationReport& r) {
  return {{"intrasegmental", "external"}, {&r.by_location[0], &r.by_location[1]}};
}

inline ReportTable distance_table(const EvaluationReport& r) {
  ReportTable t;
  for (std::size_t b = 0; b < 5; ++b) {
    t.header.emplace_back(DistanceTable::kBuckets[b]);
    t.cells.push_back(&r.by_distance[b]);
  }
  return t;
}

inline std::string table_tsv(const std::string& name, const ReportTable& t) {
  std::string s = "system";
  for (const auto& h : t.header) s += "\t" + h;
  s += "\n" + name;
  for (const Cell* c : t.cells) s += "\t" + format_accuracy(*c);
  s += "\nn";
  for (const Cell* c : t.cells) s += "\t" + std::to_string(c->n);
  return s + "\n";
}

inline std::string table_markdown(const std::string& title, const std::string& name, const ReportTable& t) {
  std::string s = "### " + title + "\n\n| system |";
  for (const auto& h : t.header) s += " " + h + " |";
  s += "\n|---|";
  for (std::size_t k = 0; k < t.header.size(); ++k) s += "---:|";
  s += "\n| " + name + " |";
  for (const Cell* c : t.cells) s += " " + format_accuracy(*c) + " |";
  s += "\n| n |";
  for (const Cell* c : t.cells) s += " " + std::to_string(c->n) + " |";
  return s + "\n";
}

inline std::string system_name(const EvaluationReport& r) { return r.scorer.empty() ? "scorer" : r.scorer; }

inline nlohmann::ordered_json cell_json(const Cell& c) {
  nlohmann::ordered_json j;
  j["accuracy"] = c.n == 0 ? nlohmann::ordered_json() : nlohmann::ordered_json(c.accuracy());
  j["correct"] = c.correct;
  j["n"] = c.n;
  return j;
}

}  // namespace detail

inline std::string pronoun_tsv(const EvaluationReport& r) {
  return detail::table_tsv(detail::system_name(r), detail::pronoun_table(r));
}
inline std::string location_tsv(const EvaluationReport& r) {
  return detail::table_tsv(detail::system_name(r), detail::location_table(r));
}
inline std::string distance_tsv(const EvaluationReport& r) {
  return detail::table_tsv(detail::system_name(r), detail::distance_table(r));
}

inline std::string report_markdown(const EvaluationReport& r) {
  const auto name = detail::system_name(r);
  return detail::table_markdown("Accuracy by reference pronoun", name, detail::pronoun_table(r)) + "\n" +
         detail::table_markdown("Accuracy by antecedent location", name, detail::location_table(r)) + "\n" +
         detail::table_markdown("Accuracy by antecedent distance", name, detail::distance_table(r));
}

/// Summary cells plus every decision with its scores, in test-set order.
inline nlohmann::ordered_json report_json(const EvaluationReport& r, const TestSet& ts) {
  nlohmann::ordered_json j;
  j["scorer"] = r.scorer;
  j["total"] = detail::cell_json(r.total);
  for (PronounClass c : kPronounClasses)
    j["by_pronoun"][std::string(to_string(c))] = detail::cell_json(r.by_pronoun[class_index(c)]);
  for (std::size_t b = 0; b < 5; ++b)
    j["by_distance"][std::string(DistanceTable::kBuckets[b])] = detail::cell_json(r.by_distance[b]);
  for (std::size_t l = 0; l < 2; ++l)
    j["by_location"][std::string(EvaluationReport::kLocations[l])] = detail::cell_json(r.by_location[l]);
  auto& ds = j["decisions"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.decisions.size(); ++k) {
    const auto& d = r.decisions[k];
    const auto& e = ts.examples[k];
    nlohmann::ordered_json x;
    x["id"] = d.example_id;
    x["ref_pronoun"] = to_string(e.ref_class);
    x["ante_distance"] = e.ante_distance;
    x["correct"] = d.correct;
    x["margin"] = d.margin;
    x["ref_score"] = d.ref_score;
    auto& vs = x["variant_scores"] = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < e.contrastive.size() && v < d.variant_scores.size(); ++v)
      vs[std::string(to_string(e.contrastive[v].replaced))] = d.variant_scores[v];
    ds.push_back(std::move(x));
  }
  return j;
}

}  // namespace contrapro
