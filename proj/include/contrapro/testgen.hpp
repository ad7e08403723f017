#pragma once

// Mining contrastive pronoun examples (it -> er/sie/es) from an annotated,
// word-aligned parallel corpus, and the test-set format they are stored in.

#include <contrapro/alignment.hpp>
#include <contrapro/annotate.hpp>
#include <contrapro/corpus.hpp>
#include <contrapro/error.hpp>
#include <contrapro/parallel.hpp>
#include <contrapro/random.hpp>
#include <contrapro/text.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace contrapro {

enum class PronounClass { es, er, sie };

/// Column order used everywhere: es, er, sie.
inline constexpr std::array<PronounClass, 3> kPronounClasses = {PronounClass::es, PronounClass::er, PronounClass::sie};

inline std::string_view to_string(PronounClass c) {
  switch (c) {
    case PronounClass::es: return "es";
    case PronounClass::er: return "er";
    case PronounClass::sie: return "sie";
  }
  return "?";
}

inline std::size_t class_index(PronounClass c) { return static_cast<std::size_t>(c); }

/// Class of a German pronoun surface in any capitalization.
inline std::optional<PronounClass> pronoun_class_of(std::string_view word) {
  auto w = text::ascii_lower(word);
  if (w == "es") return PronounClass::es;
  if (w == "er") return PronounClass::er;
  if (w == "sie") return PronounClass::sie;
  return std::nullopt;
}

inline Gender class_gender(PronounClass c) {
  switch (c) {
    case PronounClass::es: return Gender::neut;
    case PronounClass::er: return Gender::masc;
    case PronounClass::sie: return Gender::fem;
  }
  return Gender::unknown;
}

struct AntecedentRef {
  std::string surface;
  std::size_t sent_idx = 0;
  std::size_t head = 0;
};

struct CandidateExample {
  std::string doc_id;
  std::size_t sent_idx = 0;
  std::size_t src_pronoun_pos = 0;
  std::size_t tgt_pronoun_pos = 0;
  PronounClass ref_class = PronounClass::es;
  AntecedentRef src_antecedent;
  AntecedentRef tgt_antecedent;
  std::size_t ante_distance = 0;
  Gender tgt_antecedent_gender = Gender::unknown;
  /// No nominal in the English chain; the antecedent fields then point at a
  /// pronoun, not the true antecedent.
  bool fallback_antecedent = false;

  std::string id() const { return doc_id + ":" + std::to_string(sent_idx) + ":" + std::to_string(tgt_pronoun_pos); }
};

/// Sentences between a pronoun and its antecedent; 0 for the same sentence.
inline std::size_t antecedent_distance(std::size_t pronoun_sent, std::size_t antecedent_sent) {
  if (antecedent_sent > pronoun_sent)
    throw UsageError("antecedent in sentence " + std::to_string(antecedent_sent) + " follows pronoun in sentence " +
                     std::to_string(pronoun_sent));
  return pronoun_sent - antecedent_sent;
}

// ---------------------------------------------------------------------------
// Filtering

namespace detail {

inline bool target_pronoun(const AnnotatedDocument& d, std::size_t s, std::size_t t) {
  const auto& layer = d.tgt_layers[s];
  return pronoun_class_of(d.doc.pairs[s].target[t]) && layer.pos[t] == "PPER" && layer.morph[t].third_singular();
}

/// The chain through (s, t) if it links at least two mentions.
inline const CorefChain* linked_chain(const std::vector<CorefChain>& chains, std::size_t s, std::size_t t,
                                      Mention& mention) {
  auto ref = find_mention(chains, s, t);
  if (!ref || chains[ref->chain].mentions.size() < 2) return nullptr;
  mention = chains[ref->chain].mentions[ref->mention];
  return &chains[ref->chain];
}

inline AntecedentRef ref_at(const Sentence& s, std::size_t sent_idx, std::size_t head) {
  return {s[head], sent_idx, head};
}

inline std::optional<CandidateExample> try_candidate(const AnnotatedDocument& d, const std::vector<Alignment>& al,
                                                     std::size_t s, std::size_t i, std::size_t j) {
  const auto& pair = d.doc.pairs[s];
  // 1: English "it", German third-person singular er/sie/es
  if (text::ascii_lower(pair.source[i]) != "it" || !target_pronoun(d, s, j)) return std::nullopt;
  const PronounClass cls = *pronoun_class_of(pair.target[j]);
  // 2: aligned to each other
  if (!al[s].contains(i, j)) return std::nullopt;
  // 3: both in coreference chains; es has no German chain
  Mention src_m;
  Mention tgt_m;
  const CorefChain* src_chain = linked_chain(d.src_chains, s, i, src_m);
  if (!src_chain) return std::nullopt;
  const CorefChain* tgt_chain = linked_chain(d.tgt_chains, s, j, tgt_m);
  if (cls != PronounClass::es && !tgt_chain) return std::nullopt;

  CandidateExample c;
  c.doc_id = d.doc.doc_id;
  c.sent_idx = s;
  c.src_pronoun_pos = i;
  c.tgt_pronoun_pos = j;
  c.ref_class = cls;
  c.tgt_antecedent_gender = class_gender(cls);

  // 4: nominal antecedent heads aligned
  auto src_ante = chain_antecedent(*src_chain, src_m);
  if (cls != PronounClass::es) {
    auto tgt_ante = chain_antecedent(*tgt_chain, tgt_m);
    if (!src_ante || !tgt_ante || src_ante->sent_idx != tgt_ante->sent_idx) return std::nullopt;
    const std::size_t a = src_ante->sent_idx;
    if (!al[a].contains(src_ante->head, tgt_ante->head)) return std::nullopt;
    Gender g = d.tgt_layers[a].morph[tgt_ante->head].gender;
    if (g != Gender::unknown && g != class_gender(cls)) return std::nullopt;
    c.src_antecedent = ref_at(d.doc.pairs[a].source, a, src_ante->head);
    c.tgt_antecedent = ref_at(d.doc.pairs[a].target, a, tgt_ante->head);
    c.ante_distance = s - a;
  } else if (src_ante) {
    const std::size_t a = src_ante->sent_idx;
    std::optional<std::size_t> projected;
    for (std::size_t t : al[a].targets_of(src_ante->head)) {
      if (a == s && t == j) continue;
      Gender g = d.tgt_layers[a].morph[t].gender;
      if (g == Gender::neut || g == Gender::unknown) {
        projected = t;
        break;
      }
    }
    if (!projected) return std::nullopt;
    c.src_antecedent = ref_at(d.doc.pairs[a].source, a, src_ante->head);
    c.tgt_antecedent = ref_at(d.doc.pairs[a].target, a, *projected);
    c.ante_distance = s - a;
  } else {
    // Fallback: the nearest earlier chain mention stands in for the antecedent.
    c.fallback_antecedent = true;
    Mention nearest = src_m;
    for (const auto& m : src_chain->mentions)
      if (m.precedes(src_m)) nearest = m;
    c.src_antecedent = ref_at(d.doc.pairs[nearest.sent_idx].source, nearest.sent_idx, nearest.head);
    c.tgt_antecedent = ref_at(pair.target, s, j);
    c.ante_distance = s - nearest.sent_idx;
  }
  return c;
}

}  // namespace detail

/// Candidates passing all four predicates, in document, sentence and target
/// position order. When several "it" tokens qualify for one German pronoun the
/// leftmost wins, so ids stay unique.
inline std::vector<CandidateExample> filter_candidates(const std::vector<AnnotatedDocument>& docs,
                                                       const CorpusAlignment& alignments, std::size_t jobs = 1) {
  if (alignments.size() != docs.size())
    throw UsageError("alignments cover " + std::to_string(alignments.size()) + " documents, " +
                     std::to_string(docs.size()) + " annotated");
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (alignments[d].size() != docs[d].doc.size())
      throw UsageError("alignments for document '" + docs[d].doc.doc_id + "' cover " +
                       std::to_string(alignments[d].size()) + " of " + std::to_string(docs[d].doc.size()) + " pairs");
    for (std::size_t s = 0; s < docs[d].doc.size(); ++s)
      alignments[d][s].check_bounds(docs[d].doc.pairs[s].source.size(), docs[d].doc.pairs[s].target.size());
  }

  std::vector<std::vector<CandidateExample>> per_doc(docs.size());
  for_each_shard(docs.size(), jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t d = begin; d < end; ++d) {
      const auto& doc = docs[d];
      for (std::size_t s = 0; s < doc.doc.size(); ++s) {
        const auto& pair = doc.doc.pairs[s];
        for (std::size_t j = 0; j < pair.target.size(); ++j)
          for (std::size_t i = 0; i < pair.source.size(); ++i)
            if (auto c = detail::try_candidate(doc, alignments[d], s, i, j)) {
              per_doc[d].push_back(std::move(*c));
              break;
            }
      }
    }
  });
  std::vector<CandidateExample> out;
  for (auto& v : per_doc) std::move(v.begin(), v.end(), std::back_inserter(out));
  return out;
}

// ---------------------------------------------------------------------------
// Contrastive variants

/// Replaces the pronoun at `pos` by `target`, keeping its case pattern
/// (lower, Capitalized or ALL CAPS; mixed case comes back lowercase).
inline Sentence swap_pronoun(const Sentence& s, std::size_t pos, PronounClass target) {
  if (pos >= s.size() || !pronoun_class_of(s[pos]))
    throw UsageError("token " + std::to_string(pos) + " is not er/sie/es" +
                     (pos < s.size() ? " ('" + s[pos] + "')" : std::string()));
  Sentence out = s;
  out.tokens[pos].surface = text::match_case(to_string(target), s[pos]);
  return out;
}

/// Remaps sein-/ihr- possessives that share a chain with the pronoun at
/// (sent_idx, pronoun_pos) to agree with `new_gender`. Suffix and case are kept.
inline Sentence repair_agreement(const Sentence& s, std::size_t sent_idx, const std::vector<CorefChain>& chains,
                                 std::size_t pronoun_pos, Gender new_gender) {
  Sentence out = s;
  auto ref = find_mention(chains, sent_idx, pronoun_pos);
  if (!ref || new_gender == Gender::unknown) return out;
  const std::string stem = new_gender == Gender::fem ? "ihr" : "sein";
  for (const auto& m : chains[ref->chain].mentions) {
    if (m.sent_idx != sent_idx || m.head == pronoun_pos || !m.is_pronoun || m.head >= s.size()) continue;
    const std::string lower = text::utf8_lower(s[m.head]);
    auto old = detail::possessive_stem(lower);
    if (old.empty()) continue;
    out.tokens[m.head].surface = text::match_case(stem + lower.substr(old.size()), s[m.head]);
  }
  return out;
}

/// German chains as seen by one example. An es pronoun is unchained on the
/// German side, so it is attached to the chain of its projected antecedent.
inline std::vector<CorefChain> example_chains(const CandidateExample& c, const AnnotatedDocument& d) {
  std::vector<CorefChain> chains = d.tgt_chains;
  if (c.ref_class != PronounClass::es || c.fallback_antecedent) return chains;
  if (find_mention(chains, c.sent_idx, c.tgt_pronoun_pos)) return chains;
  const Mention pron{c.sent_idx, c.tgt_pronoun_pos, c.tgt_pronoun_pos + 1, c.tgt_pronoun_pos, false, true};
  auto insert = [&](CorefChain& chain) {
    auto at = std::lower_bound(chain.mentions.begin(), chain.mentions.end(), pron,
                               [](const Mention& a, const Mention& b) { return a.precedes(b); });
    chain.mentions.insert(at, pron);
  };
  if (auto ref = find_mention(chains, c.tgt_antecedent.sent_idx, c.tgt_antecedent.head)) {
    insert(chains[ref->chain]);
  } else {
    const std::size_t h = c.tgt_antecedent.head;
    chains.push_back({"es:" + c.id(), {Mention{c.tgt_antecedent.sent_idx, h, h + 1, h, true, false}}});
    insert(chains.back());
  }
  return chains;
}

struct ContrastiveVariant {
  std::string tgt;
  PronounClass replaced = PronounClass::es;

  bool operator==(const ContrastiveVariant&) const = default;
};

struct ContrastiveExample : CandidateExample {
  std::string id_override;  // set for imported examples whose ids follow another scheme
  std::string src;
  std::string ref;
  std::vector<std::string> src_context;
  std::vector<std::string> ref_context;
  std::vector<ContrastiveVariant> contrastive;

  std::string example_id() const { return id_override.empty() ? id() : id_override; }
};

inline ContrastiveExample generate_contrastive(const CandidateExample& c, const AnnotatedDocument& d) {
  if (c.sent_idx >= d.doc.size()) throw UsageError("candidate " + c.id() + " outside its document");
  const auto& pair = d.doc.pairs[c.sent_idx];
  const auto chains = example_chains(c, d);

  ContrastiveExample ex;
  static_cast<CandidateExample&>(ex) = c;
  ex.src = pair.source.text();
  ex.ref = pair.target.text();
  const std::size_t depth = std::max<std::size_t>(1, c.ante_distance);
  for (const auto& s : context_window(d.doc, c.sent_idx, depth, Side::source)) ex.src_context.push_back(s.text());
  for (const auto& s : context_window(d.doc, c.sent_idx, depth, Side::target)) ex.ref_context.push_back(s.text());
  for (PronounClass v : kPronounClasses) {
    if (v == c.ref_class) continue;
    auto swapped = swap_pronoun(pair.target, c.tgt_pronoun_pos, v);
    ex.contrastive.push_back({repair_agreement(swapped, c.sent_idx, chains, c.tgt_pronoun_pos, class_gender(v)).text(), v});
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Test sets

struct Manifest {
  std::array<std::size_t, 3> counts{};  // by class_index
  std::optional<std::uint64_t> seed;
  std::string corpus_id;
  std::size_t n_per_class = 0;

  std::size_t total() const { return counts[0] + counts[1] + counts[2]; }
};

struct TestSet {
  std::vector<ContrastiveExample> examples;
  Manifest manifest;
};

inline std::array<std::size_t, 3> class_counts(const std::vector<ContrastiveExample>& examples) {
  std::array<std::size_t, 3> n{};
  for (const auto& e : examples) ++n[class_index(e.ref_class)];
  return n;
}

/// Ids unique, exactly two variants completing {er, sie, es}, counts as in the manifest.
inline void validate(const TestSet& ts) {
  std::set<std::string> ids;
  for (const auto& e : ts.examples) {
    const auto id = e.example_id();
    if (!ids.insert(id).second) throw ValidationError("duplicate example id '" + id + "'");
    std::set<PronounClass> cover{e.ref_class};
    for (const auto& v : e.contrastive) cover.insert(v.replaced);
    if (e.contrastive.size() != 2 || cover.size() != 3)
      throw ValidationError("example '" + id + "': variants must be the two classes other than " +
                            std::string(to_string(e.ref_class)));
  }
  auto n = class_counts(ts.examples);
  if (n != ts.manifest.counts)
    throw ValidationError("manifest counts es/er/sie " + std::to_string(ts.manifest.counts[0]) + "/" +
                          std::to_string(ts.manifest.counts[1]) + "/" + std::to_string(ts.manifest.counts[2]) +
                          " disagree with examples " + std::to_string(n[0]) + "/" + std::to_string(n[1]) + "/" +
                          std::to_string(n[2]));
}

/// Uniform sample without replacement of `n_per_class` candidates per class.
/// Output is ordered by class (es, er, sie), then by input position.
inline std::vector<CandidateExample> balance_sample(const std::vector<CandidateExample>& candidates,
                                                    std::size_t n_per_class, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 3> pools;
  for (std::size_t k = 0; k < candidates.size(); ++k) pools[class_index(candidates[k].ref_class)].push_back(k);
  for (PronounClass c : kPronounClasses)
    if (pools[class_index(c)].size() < n_per_class)
      throw InsufficientCandidates(std::string(to_string(c)), pools[class_index(c)].size(), n_per_class);

  std::mt19937_64 rng(seed);
  std::vector<CandidateExample> out;
  out.reserve(3 * n_per_class);
  for (PronounClass c : kPronounClasses) {
    auto& pool = pools[class_index(c)];
    for (std::size_t k = 0; k < n_per_class; ++k) {
      auto pick = k + static_cast<std::size_t>(uniform_below(rng, pool.size() - k));
      std::swap(pool[k], pool[pick]);
    }
    std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_per_class));
    std::sort(chosen.begin(), chosen.end());
    for (auto k : chosen) out.push_back(candidates[k]);
  }
  return out;
}

/// balance_sample followed by generate_contrastive on each sampled candidate.
inline TestSet build_testset(const std::vector<AnnotatedDocument>& docs, const std::vector<CandidateExample>& candidates,
                             std::size_t n_per_class, std::uint64_t seed, std::string corpus_id) {
  std::map<std::string, const AnnotatedDocument*> by_id;
  for (const auto& d : docs) by_id.emplace(d.doc.doc_id, &d);
  TestSet ts;
  for (const auto& c : balance_sample(candidates, n_per_class, seed)) {
    auto it = by_id.find(c.doc_id);
    if (it == by_id.end()) throw UsageError("candidate " + c.id() + " names an unknown document");
    ts.examples.push_back(generate_contrastive(c, *it->second));
  }
  ts.manifest.counts = class_counts(ts.examples);
  ts.manifest.seed = seed;
  ts.manifest.corpus_id = std::move(corpus_id);
  ts.manifest.n_per_class = n_per_class;
  return ts;
}

/// Class x antecedent-distance counts with buckets 0, 1, 2, 3, >3.
struct DistanceTable {
  static constexpr std::array<std::string_view, 5> kBuckets = {"0", "1", "2", "3", ">3"};

  std::array<std::array<std::size_t, 3>, 5> cells{};

  static std::size_t bucket(std::size_t distance) { return std::min<std::size_t>(distance, 4); }

  std::size_t row_total(std::size_t b) const { return cells[b][0] + cells[b][1] + cells[b][2]; }
  std::size_t column_total(std::size_t c) const {
    std::size_t n = 0;
    for (const auto& row : cells) n += row[c];
    return n;
  }
  std::size_t total() const { return column_total(0) + column_total(1) + column_total(2); }

  std::string to_tsv() const {
    std::string out = "distance\tes\ter\tsie\ttotal\n";
    auto line = [&](std::string_view label, std::size_t a, std::size_t b, std::size_t c, std::size_t t) {
      out += std::string(label) + "\t" + std::to_string(a) + "\t" + std::to_string(b) + "\t" + std::to_string(c) +
             "\t" + std::to_string(t) + "\n";
    };
    for (std::size_t b = 0; b < 5; ++b) line(kBuckets[b], cells[b][0], cells[b][1], cells[b][2], row_total(b));
    line("total", column_total(0), column_total(1), column_total(2), total());
    return out;
  }

  std::string to_markdown() const {
    std::string out = "| distance | es | er | sie | total |\n|---|---:|---:|---:|---:|\n";
    auto line = [&](std::string_view label, std::size_t a, std::size_t b, std::size_t c, std::size_t t) {
      out += "| " + std::string(label) + " | " + std::to_string(a) + " | " + std::to_string(b) + " | " +
             std::to_string(c) + " | " + std::to_string(t) + " |\n";
    };
    for (std::size_t b = 0; b < 5; ++b) line(kBuckets[b], cells[b][0], cells[b][1], cells[b][2], row_total(b));
    line("total", column_total(0), column_total(1), column_total(2), total());
    return out;
  }
};

inline DistanceTable testset_stats(const TestSet& ts) {
  DistanceTable t;
  for (const auto& e : ts.examples) ++t.cells[DistanceTable::bucket(e.ante_distance)][class_index(e.ref_class)];
  return t;
}

// ---------------------------------------------------------------------------
// JSONL

inline nlohmann::ordered_json to_json(const ContrastiveExample& e) {
  nlohmann::ordered_json j;
  j["id"] = e.example_id();
  j["doc_id"] = e.doc_id;
  j["sent_idx"] = e.sent_idx;
  j["src"] = e.src;
  j["ref"] = e.ref;
  j["src_context"] = e.src_context;
  j["ref_context"] = e.ref_context;
  j["src_pronoun"] = "it";
  j["ref_pronoun"] = std::string(to_string(e.ref_class));
  auto variants = nlohmann::ordered_json::array();
  for (const auto& v : e.contrastive) {
    nlohmann::ordered_json vj;
    vj["tgt"] = v.tgt;
    vj["replaced"] = std::string(to_string(v.replaced));
    variants.push_back(std::move(vj));
  }
  j["contrastive"] = std::move(variants);
  j["ante_distance"] = e.ante_distance;
  j["src_antecedent"] = e.src_antecedent.surface;
  j["tgt_antecedent"] = e.tgt_antecedent.surface;
  j["tgt_antecedent_gender"] = std::string(to_code(e.tgt_antecedent_gender));
  j["fallback_antecedent"] = e.fallback_antecedent;
  j["src_pronoun_pos"] = e.src_pronoun_pos;
  j["tgt_pronoun_pos"] = e.tgt_pronoun_pos;
  return j;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& at) {
  if (!j.contains(key)) throw ValidationError(at + ": missing field '" + key + "'");
  return j[key];
}

inline std::string string_field(const nlohmann::json& j, const char* key, const std::string& at) {
  const auto& v = field(j, key, at);
  if (!v.is_string()) throw ValidationError(at + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::size_t count_field(const nlohmann::json& j, const char* key, const std::string& at) {
  const auto& v = field(j, key, at);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ValidationError(at + ": field '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

inline std::vector<std::string> strings_field(const nlohmann::json& j, const char* key, const std::string& at) {
  const auto& v = field(j, key, at);
  if (!v.is_array()) throw ValidationError(at + ": field '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) throw ValidationError(at + ": field '" + key + "' must be an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

inline PronounClass class_field(const nlohmann::json& j, const char* key, const std::string& at) {
  auto s = string_field(j, key, at);
  auto c = pronoun_class_of(s);
  if (!c) throw ValidationError(at + ": '" + s + "' is not one of er, sie, es");
  return *c;
}

}  // namespace detail

inline ContrastiveExample example_from_json(const nlohmann::json& j, const std::string& at) {
  if (!j.is_object()) throw ValidationError(at + ": not a JSON object");
  ContrastiveExample e;
  const auto id = detail::string_field(j, "id", at);
  e.doc_id = detail::string_field(j, "doc_id", at);
  e.sent_idx = detail::count_field(j, "sent_idx", at);
  e.src = detail::string_field(j, "src", at);
  e.ref = detail::string_field(j, "ref", at);
  e.src_context = detail::strings_field(j, "src_context", at);
  e.ref_context = detail::strings_field(j, "ref_context", at);
  if (auto p = detail::string_field(j, "src_pronoun", at); text::ascii_lower(p) != "it")
    throw ValidationError(at + ": src_pronoun must be 'it', got '" + p + "'");
  e.ref_class = detail::class_field(j, "ref_pronoun", at);
  const auto& variants = detail::field(j, "contrastive", at);
  if (!variants.is_array()) throw ValidationError(at + ": contrastive must be an array");
  for (const auto& v : variants) {
    if (!v.is_object()) throw ValidationError(at + ": contrastive entry is not an object");
    e.contrastive.push_back({detail::string_field(v, "tgt", at), detail::class_field(v, "replaced", at)});
  }
  e.ante_distance = detail::count_field(j, "ante_distance", at);
  e.src_antecedent.surface = detail::string_field(j, "src_antecedent", at);
  e.tgt_antecedent.surface = detail::string_field(j, "tgt_antecedent", at);
  auto g = parse_gender(detail::string_field(j, "tgt_antecedent_gender", at));
  if (!g) throw ValidationError(at + ": bad tgt_antecedent_gender");
  e.tgt_antecedent_gender = *g;
  const auto& fb = detail::field(j, "fallback_antecedent", at);
  if (!fb.is_boolean()) throw ValidationError(at + ": fallback_antecedent must be a boolean");
  e.fallback_antecedent = fb.get<bool>();
  if (j.contains("src_pronoun_pos")) e.src_pronoun_pos = detail::count_field(j, "src_pronoun_pos", at);
  if (j.contains("tgt_pronoun_pos")) e.tgt_pronoun_pos = detail::count_field(j, "tgt_pronoun_pos", at);
  const std::size_t ante_sent = e.sent_idx >= e.ante_distance ? e.sent_idx - e.ante_distance : 0;
  e.src_antecedent.sent_idx = ante_sent;
  e.tgt_antecedent.sent_idx = ante_sent;
  if (e.id() != id) e.id_override = id;
  return e;
}

inline nlohmann::ordered_json manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json counts;
  for (PronounClass c : kPronounClasses) counts[std::string(to_string(c))] = m.counts[class_index(c)];
  j["counts"] = std::move(counts);
  j["total"] = m.total();
  j["n_per_class"] = m.n_per_class;
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
  j["corpus_id"] = m.corpus_id;
  return j;
}

inline Manifest parse_manifest(const std::string& content, const std::string& where) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  }
  Manifest m;
  const auto& counts = detail::field(j, "counts", where);
  for (PronounClass c : kPronounClasses)
    m.counts[class_index(c)] = detail::count_field(counts, std::string(to_string(c)).c_str(), where);
  m.n_per_class = detail::count_field(j, "n_per_class", where);
  if (j.contains("seed") && !j["seed"].is_null()) {
    if (!j["seed"].is_number_unsigned()) throw ValidationError(where + ": seed must be a non-negative integer");
    m.seed = j["seed"].get<std::uint64_t>();
  }
  m.corpus_id = detail::string_field(j, "corpus_id", where);
  return m;
}

inline std::vector<std::string> to_jsonl(const TestSet& ts) {
  std::vector<std::string> lines;
  lines.reserve(ts.examples.size());
  for (const auto& e : ts.examples) lines.push_back(to_json(e).dump());
  return lines;
}

inline std::vector<ContrastiveExample> parse_examples(const std::vector<std::string>& lines) {
  std::vector<ContrastiveExample> out;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (text::split_whitespace(lines[ln]).empty()) continue;
    const auto at = "test set line " + std::to_string(ln + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[ln]);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(at + ": " + e.what());
    }
    out.push_back(example_from_json(j, at));
  }
  return out;
}

inline void write_testset(const TestSet& ts, const std::string& jsonl_path, const std::string& manifest_path) {
  std::string body;
  for (const auto& line : to_jsonl(ts)) body += line + "\n";
  text::write_file(jsonl_path, body);
  text::write_file(manifest_path, manifest_json(ts.manifest).dump(2) + "\n");
}

/// Reads a test set; without a manifest one is derived from the examples.
inline TestSet read_testset(const std::string& jsonl_path, const std::optional<std::string>& manifest_path = {}) {
  TestSet ts;
  ts.examples = parse_examples(text::read_lines(jsonl_path));
  if (manifest_path) {
    ts.manifest = parse_manifest(text::read_file(*manifest_path), *manifest_path);
  } else {
    ts.manifest.counts = class_counts(ts.examples);
    ts.manifest.corpus_id = jsonl_path;
  }
  validate(ts);
  return ts;
}

// ---------------------------------------------------------------------------
// Import of the published ContraPro release (space-separated field names)

namespace detail {

inline std::string loose_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  if (j[key].is_string()) return j[key].get<std::string>();
  return j[key].dump();
}

inline std::vector<std::string> loose_context(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key) || j[key].is_null()) return out;
  if (j[key].is_string()) {
    std::string_view rest = j[key].get_ref<const std::string&>();
    while (!rest.empty()) {
      auto nl = rest.find('\n');
      auto line = rest.substr(0, nl);
      if (!line.empty()) out.emplace_back(line);
      rest = nl == std::string_view::npos ? std::string_view() : rest.substr(nl + 1);
    }
    return out;
  }
  if (j[key].is_array())
    for (const auto& x : j[key])
      if (x.is_string()) out.push_back(x.get<std::string>());
  return out;
}

inline Gender loose_gender(std::string_view s) {
  auto lower = text::ascii_lower(s);
  if (lower.empty()) return Gender::unknown;
  if (lower[0] == 'm') return Gender::masc;
  if (lower[0] == 'f') return Gender::fem;
  if (lower[0] == 'n') return Gender::neut;
  return Gender::unknown;
}

}  // namespace detail

/// Accepts a JSON array or JSON lines of records keyed like the ContraPro
/// release ("ref pronoun", "src segment", "ref segment", "errors",
/// "ante distance", ...).
inline TestSet import_contrapro(const std::string& content, const std::string& corpus_id) {
  std::vector<nlohmann::json> records;
  auto first = content.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && content[first] == '[') {
      auto arr = nlohmann::json::parse(content);
      for (auto& r : arr) records.push_back(std::move(r));
    } else {
      std::size_t pos = 0;
      while (pos <= content.size()) {
        auto nl = content.find('\n', pos);
        auto line = content.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        if (!text::split_whitespace(line).empty()) records.push_back(nlohmann::json::parse(line));
        if (nl == std::string::npos) break;
        pos = nl + 1;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(corpus_id + ": " + e.what());
  }

  TestSet ts;
  std::map<std::string, std::size_t> seen;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    const auto at = corpus_id + " record " + std::to_string(k + 1);
    if (!r.is_object()) throw ValidationError(at + ": not a JSON object");
    ContrastiveExample e;
    e.ref_class = detail::class_field(r, "ref pronoun", at);
    e.src = detail::string_field(r, "src segment", at);
    e.ref = detail::string_field(r, "ref segment", at);
    e.ante_distance = detail::count_field(r, "ante distance", at);
    e.doc_id = detail::loose_string(r, "document id");
    if (e.doc_id.empty()) e.doc_id = detail::loose_string(r, "filename");
    if (e.doc_id.empty()) e.doc_id = corpus_id;
    if (r.contains("segment id") && r["segment id"].is_number_integer() && r["segment id"].get<long long>() >= 0)
      e.sent_idx = r["segment id"].get<std::size_t>();
    if (r.contains("ref pronoun id") && r["ref pronoun id"].is_number_integer() &&
        r["ref pronoun id"].get<long long>() >= 0)
      e.tgt_pronoun_pos = r["ref pronoun id"].get<std::size_t>();
    e.src_antecedent.surface = detail::loose_string(r, "src ante head");
    if (e.src_antecedent.surface.empty()) e.src_antecedent.surface = detail::loose_string(r, "src ante phrase");
    e.tgt_antecedent.surface = detail::loose_string(r, "ref ante head");
    if (e.tgt_antecedent.surface.empty()) e.tgt_antecedent.surface = detail::loose_string(r, "ref ante phrase");
    e.tgt_antecedent_gender = detail::loose_gender(detail::loose_string(r, "ref ante head gender"));
    if (e.tgt_antecedent_gender == Gender::unknown) e.tgt_antecedent_gender = class_gender(e.ref_class);
    e.src_context = detail::loose_context(r, "src context");
    e.ref_context = detail::loose_context(r, "ref context");

    const auto& errors = detail::field(r, "errors", at);
    if (!errors.is_array()) throw ValidationError(at + ": errors must be an array");
    for (const auto& v : errors) {
      if (!v.is_object()) throw ValidationError(at + ": errors entry is not an object");
      e.contrastive.push_back({detail::string_field(v, "contrastive", at), detail::class_field(v, "replacement", at)});
    }
    std::sort(e.contrastive.begin(), e.contrastive.end(),
              [](const auto& a, const auto& b) { return class_index(a.replaced) < class_index(b.replaced); });

    std::string id = e.id();
    if (auto n = seen[id]++; n > 0) id += "#" + std::to_string(n);
    if (id != e.id()) e.id_override = id;
    ts.examples.push_back(std::move(e));
  }
  ts.manifest.counts = class_counts(ts.examples);
  ts.manifest.corpus_id = corpus_id;
  validate(ts);
  return ts;
}

}  // namespace contrapro
