#pragma once

// POS, morphology and coreference layers over a parallel corpus: ingested
// from JSONL produced by external tools, or guessed by a small rule-based
// annotator that is good enough for fixtures and desk-scale runs.

#include <contrapro/corpus.hpp>
#include <contrapro/error.hpp>
#include <contrapro/gender_lexicon.hpp>
#include <contrapro/parallel.hpp>
#include <contrapro/text.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace contrapro {

enum class Gender { masc, fem, neut, unknown };
enum class Number { sg, pl, unknown };
enum class Person { first, second, third, unknown };

inline std::string_view to_code(Gender g) {
  switch (g) {
    case Gender::masc: return "m";
    case Gender::fem: return "f";
    case Gender::neut: return "n";
    case Gender::unknown: break;
  }
  return "?";
}

inline std::string_view to_code(Number n) {
  switch (n) {
    case Number::sg: return "sg";
    case Number::pl: return "pl";
    case Number::unknown: break;
  }
  return "?";
}

inline std::string_view to_code(Person p) {
  switch (p) {
    case Person::first: return "1";
    case Person::second: return "2";
    case Person::third: return "3";
    case Person::unknown: break;
  }
  return "?";
}

inline std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "m" || s == "masc") return Gender::masc;
  if (s == "f" || s == "fem") return Gender::fem;
  if (s == "n" || s == "neut") return Gender::neut;
  if (s == "?" || s == "unknown") return Gender::unknown;
  return std::nullopt;
}

inline std::optional<Number> parse_number(std::string_view s) {
  if (s == "sg") return Number::sg;
  if (s == "pl") return Number::pl;
  if (s == "?") return Number::unknown;
  return std::nullopt;
}

inline std::optional<Person> parse_person(std::string_view s) {
  if (s == "1") return Person::first;
  if (s == "2") return Person::second;
  if (s == "3") return Person::third;
  if (s == "?") return Person::unknown;
  return std::nullopt;
}

struct Morph {
  Gender gender = Gender::unknown;
  Number number = Number::unknown;
  Person person = Person::unknown;

  bool third_singular() const { return person == Person::third && number == Number::sg; }
  bool operator==(const Morph&) const = default;
};

struct Mention {
  std::size_t sent_idx = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::size_t head = 0;
  bool is_nominal = false;
  bool is_pronoun = false;

  bool precedes(const Mention& o) const { return std::tie(sent_idx, start) < std::tie(o.sent_idx, o.start); }
  bool operator==(const Mention&) const = default;
};

struct CorefChain {
  std::string chain_id;
  std::vector<Mention> mentions;  // ordered by (sent_idx, start)
};

struct SentenceLayer {
  std::vector<std::string> pos;
  std::vector<Morph> morph;
};

struct AnnotatedDocument {
  ParallelDocument doc;
  std::vector<SentenceLayer> src_layers;
  std::vector<SentenceLayer> tgt_layers;
  std::vector<CorefChain> src_chains;
  std::vector<CorefChain> tgt_chains;

  const std::vector<SentenceLayer>& layers(Side s) const { return s == Side::source ? src_layers : tgt_layers; }
  std::vector<SentenceLayer>& layers(Side s) { return s == Side::source ? src_layers : tgt_layers; }
  const std::vector<CorefChain>& chains(Side s) const { return s == Side::source ? src_chains : tgt_chains; }
  std::vector<CorefChain>& chains(Side s) { return s == Side::source ? src_chains : tgt_chains; }
};

struct ChainRef {
  std::size_t chain = 0;
  std::size_t mention = 0;
};

/// The mention headed at token `tok` of sentence `sent`, searching chains in order.
inline std::optional<ChainRef> find_mention(const std::vector<CorefChain>& chains, std::size_t sent, std::size_t tok) {
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (std::size_t m = 0; m < chains[c].mentions.size(); ++m) {
      const auto& x = chains[c].mentions[m];
      if (x.sent_idx == sent && x.head == tok) return ChainRef{c, m};
    }
  return std::nullopt;
}

/// Nearest nominal mention before `pronoun` in its chain; nullopt if the
/// chain has none.
inline std::optional<Mention> chain_antecedent(const CorefChain& chain, const Mention& pronoun) {
  auto it = std::find(chain.mentions.begin(), chain.mentions.end(), pronoun);
  if (it == chain.mentions.end())
    throw UsageError("mention at sentence " + std::to_string(pronoun.sent_idx) + ", token " +
                     std::to_string(pronoun.start) + " is not in chain '" + chain.chain_id + "'");
  while (it != chain.mentions.begin()) {
    --it;
    if (it->is_nominal && it->precedes(pronoun)) return *it;
  }
  return std::nullopt;
}

namespace detail {

inline std::string where(const std::string& doc_id, Side side, std::size_t sent) {
  return "document '" + doc_id + "', " + std::string(to_string(side)) + " sentence " + std::to_string(sent);
}

inline void validate_chains(const AnnotatedDocument& d, Side side) {
  std::set<std::string> ids;
  for (const auto& chain : d.chains(side)) {
    if (!ids.insert(chain.chain_id).second)
      throw ValidationError("document '" + d.doc.doc_id + "': duplicate " + std::string(to_string(side)) +
                            " chain id '" + chain.chain_id + "'");
    if (chain.mentions.empty())
      throw ValidationError("document '" + d.doc.doc_id + "': chain '" + chain.chain_id + "' has no mentions");
    for (std::size_t k = 0; k < chain.mentions.size(); ++k) {
      const auto& m = chain.mentions[k];
      if (m.sent_idx >= d.doc.size())
        throw ValidationError("document '" + d.doc.doc_id + "': chain '" + chain.chain_id + "' mentions sentence " +
                              std::to_string(m.sent_idx) + " of " + std::to_string(d.doc.size()));
      std::size_t len = d.doc.pairs[m.sent_idx].side(side).size();
      auto at = where(d.doc.doc_id, side, m.sent_idx);
      if (m.start >= m.end) throw ValidationError(at + ": empty mention span at token " + std::to_string(m.start));
      if (m.end > len)
        throw ValidationError(at + ": mention span ends at token " + std::to_string(m.end) + " beyond length " +
                              std::to_string(len));
      if (m.head < m.start || m.head >= m.end)
        throw ValidationError(at + ": mention head token " + std::to_string(m.head) + " outside its span");
      if (k > 0 && !chain.mentions[k - 1].precedes(m))
        throw ValidationError(at + ": chain '" + chain.chain_id + "' mentions out of order at token " +
                              std::to_string(m.start));
    }
  }
}

}  // namespace detail

/// Checks layer lengths against token counts and every chain mention's
/// indices and ordering.
inline void validate(const AnnotatedDocument& d) {
  for (Side side : {Side::source, Side::target}) {
    const auto& layers = d.layers(side);
    if (layers.size() != d.doc.size())
      throw ValidationError("document '" + d.doc.doc_id + "': " + std::to_string(layers.size()) + " " +
                            std::string(to_string(side)) + " layers for " + std::to_string(d.doc.size()) +
                            " sentences");
    for (std::size_t s = 0; s < layers.size(); ++s) {
      std::size_t len = d.doc.pairs[s].side(side).size();
      if (layers[s].pos.size() != len || layers[s].morph.size() != len)
        throw ValidationError(detail::where(d.doc.doc_id, side, s) + ": " + std::to_string(layers[s].pos.size()) +
                              " tags and " + std::to_string(layers[s].morph.size()) + " morphology entries for " +
                              std::to_string(len) + " tokens");
    }
    detail::validate_chains(d, side);
  }
}

// ---------------------------------------------------------------------------
// JSONL interchange

namespace detail {

inline std::size_t get_index(const nlohmann::json& obj, const char* key, const std::string& at) {
  if (!obj.contains(key) || !obj[key].is_number_integer() || obj[key].get<long long>() < 0)
    throw ValidationError(at + ": field '" + key + "' must be a non-negative integer");
  return obj[key].get<std::size_t>();
}

inline bool get_flag(const nlohmann::json& obj, const char* key, const std::string& at) {
  if (!obj.contains(key)) return false;
  if (!obj[key].is_boolean()) throw ValidationError(at + ": field '" + key + "' must be a boolean");
  return obj[key].get<bool>();
}

inline Morph parse_morph(const nlohmann::json& j, const std::string& at) {
  if (!j.is_object()) throw ValidationError(at + ": morphology entry is not an object");
  Morph m;
  auto field = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_string()) throw ValidationError(at + ": morphology field '" + key + "' is not a string");
    return j[key].get<std::string>();
  };
  if (auto g = field("g")) {
    auto v = parse_gender(*g);
    if (!v) throw ValidationError(at + ": unknown gender '" + *g + "'");
    m.gender = *v;
  }
  if (auto n = field("n")) {
    auto v = parse_number(*n);
    if (!v) throw ValidationError(at + ": unknown number '" + *n + "'");
    m.number = *v;
  }
  if (auto p = field("p")) {
    auto v = parse_person(*p);
    if (!v) throw ValidationError(at + ": unknown person '" + *p + "'");
    m.person = *v;
  }
  return m;
}

struct PendingSide {
  std::vector<std::optional<SentenceLayer>> layers;
  std::vector<CorefChain> chains;
  std::map<std::string, std::size_t> by_id;
};

}  // namespace detail

/// Reads annotation records, one JSON object per line:
///   {"doc_id", "side": "src"|"tgt", "sent_idx", "pos": [..], "morph": [{"g","n","p"}],
///    "chains": [{"id", "mentions": [{"sent","start","end","head","nominal","pronoun"}]}]}
/// Chains may be spread over several records of a document and are merged by id.
inline std::vector<AnnotatedDocument> ingest_annotations(const ParallelCorpus& corpus,
                                                         const std::vector<std::string>& lines) {
  std::unordered_map<std::string, std::size_t> doc_index;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) doc_index.emplace(corpus.documents[d].doc_id, d);
  std::vector<std::array<detail::PendingSide, 2>> pending(corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    for (auto& p : pending[d]) p.layers.resize(corpus.documents[d].size());

  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (text::split_whitespace(lines[ln]).empty()) continue;
    const std::string line_at = "annotation line " + std::to_string(ln + 1);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(lines[ln]);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(line_at + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("doc_id") || !rec["doc_id"].is_string())
      throw ValidationError(line_at + ": missing doc_id");
    const auto doc_id = rec["doc_id"].get<std::string>();
    auto found = doc_index.find(doc_id);
    if (found == doc_index.end()) throw ValidationError(line_at + ": unknown document '" + doc_id + "'");
    const auto& doc = corpus.documents[found->second];
    if (!rec.contains("side") || !rec["side"].is_string() ||
        (rec["side"].get<std::string>() != "src" && rec["side"].get<std::string>() != "tgt"))
      throw ValidationError(line_at + ": side must be \"src\" or \"tgt\"");
    const Side side = rec["side"].get<std::string>() == "src" ? Side::source : Side::target;
    auto& slot = pending[found->second][side == Side::source ? 0 : 1];

    const std::size_t s = detail::get_index(rec, "sent_idx", line_at);
    if (s >= doc.size())
      throw ValidationError(line_at + ": document '" + doc_id + "' has no sentence " + std::to_string(s));
    const auto at = detail::where(doc_id, side, s);
    if (slot.layers[s]) throw ValidationError(at + ": annotated twice");
    const std::size_t len = doc.pairs[s].side(side).size();

    SentenceLayer layer;
    if (!rec.contains("pos") || !rec["pos"].is_array()) throw ValidationError(at + ": missing pos array");
    for (const auto& tag : rec["pos"]) {
      if (!tag.is_string()) throw ValidationError(at + ": POS tag is not a string");
      layer.pos.push_back(tag.get<std::string>());
    }
    if (layer.pos.size() != len)
      throw ValidationError(at + ": " + std::to_string(layer.pos.size()) + " POS tags for " + std::to_string(len) +
                            " tokens");
    if (rec.contains("morph")) {
      if (!rec["morph"].is_array()) throw ValidationError(at + ": morph is not an array");
      for (std::size_t t = 0; t < rec["morph"].size(); ++t)
        layer.morph.push_back(detail::parse_morph(rec["morph"][t], at + ", token " + std::to_string(t)));
      if (layer.morph.size() != len)
        throw ValidationError(at + ": " + std::to_string(layer.morph.size()) + " morphology entries for " +
                              std::to_string(len) + " tokens");
    } else {
      layer.morph.assign(len, Morph{});
    }
    slot.layers[s] = std::move(layer);

    if (!rec.contains("chains")) continue;
    if (!rec["chains"].is_array()) throw ValidationError(at + ": chains is not an array");
    for (const auto& c : rec["chains"]) {
      if (!c.is_object() || !c.contains("id") || !c["id"].is_string() || !c.contains("mentions") ||
          !c["mentions"].is_array())
        throw ValidationError(at + ": chain needs id and mentions[]");
      const auto id = c["id"].get<std::string>();
      auto [it, fresh] = slot.by_id.emplace(id, slot.chains.size());
      if (fresh) slot.chains.push_back({id, {}});
      auto& chain = slot.chains[it->second];
      for (const auto& mj : c["mentions"]) {
        if (!mj.is_object()) throw ValidationError(at + ": mention in chain '" + id + "' is not an object");
        Mention m;
        m.sent_idx = detail::get_index(mj, "sent", at);
        m.start = detail::get_index(mj, "start", at);
        m.end = detail::get_index(mj, "end", at);
        m.head = detail::get_index(mj, "head", at);
        m.is_nominal = detail::get_flag(mj, "nominal", at);
        m.is_pronoun = detail::get_flag(mj, "pronoun", at);
        if (m.sent_idx >= doc.size())
          throw ValidationError(at + ": chain '" + id + "' references sentence " + std::to_string(m.sent_idx) +
                                " of document '" + doc_id + "' which has " + std::to_string(doc.size()));
        const auto m_at = detail::where(doc_id, side, m.sent_idx);
        const std::size_t m_len = doc.pairs[m.sent_idx].side(side).size();
        if (m.start >= m.end || m.end > m_len)
          throw ValidationError(m_at + ": chain '" + id + "' span [" + std::to_string(m.start) + ", " +
                                std::to_string(m.end) + ") invalid for " + std::to_string(m_len) + " tokens");
        if (m.head < m.start || m.head >= m.end)
          throw ValidationError(m_at + ": chain '" + id + "' head token " + std::to_string(m.head) +
                                " outside its span");
        chain.mentions.push_back(m);
      }
    }
  }

  std::vector<AnnotatedDocument> out;
  out.reserve(corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    AnnotatedDocument ad;
    ad.doc = corpus.documents[d];
    for (Side side : {Side::source, Side::target}) {
      auto& slot = pending[d][side == Side::source ? 0 : 1];
      for (std::size_t s = 0; s < slot.layers.size(); ++s) {
        if (!slot.layers[s]) throw ValidationError(detail::where(ad.doc.doc_id, side, s) + ": no annotation record");
        ad.layers(side).push_back(std::move(*slot.layers[s]));
      }
      for (auto& chain : slot.chains) {
        auto& ms = chain.mentions;
        std::stable_sort(ms.begin(), ms.end(), [](const Mention& a, const Mention& b) { return a.precedes(b); });
        ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
      }
      ad.chains(side) = std::move(slot.chains);
    }
    validate(ad);
    out.push_back(std::move(ad));
  }
  return out;
}

inline std::vector<AnnotatedDocument> load_annotations(const ParallelCorpus& corpus, const std::string& path) {
  return ingest_annotations(corpus, text::read_lines(path));
}

/// Inverse of ingest_annotations: one record per sentence and side, with a
/// document's chains on its first record.
inline std::vector<std::string> to_annotation_jsonl(const std::vector<AnnotatedDocument>& docs) {
  std::vector<std::string> lines;
  for (const auto& d : docs)
    for (Side side : {Side::source, Side::target})
      for (std::size_t s = 0; s < d.doc.size(); ++s) {
        const auto& layer = d.layers(side)[s];
        nlohmann::json rec;
        rec["doc_id"] = d.doc.doc_id;
        rec["side"] = std::string(to_string(side));
        rec["sent_idx"] = s;
        rec["pos"] = layer.pos;
        auto morph = nlohmann::json::array();
        for (const auto& m : layer.morph)
          morph.push_back({{"g", to_code(m.gender)}, {"n", to_code(m.number)}, {"p", to_code(m.person)}});
        rec["morph"] = std::move(morph);
        if (s == 0) {
          auto chains = nlohmann::json::array();
          for (const auto& c : d.chains(side)) {
            auto ms = nlohmann::json::array();
            for (const auto& m : c.mentions)
              ms.push_back({{"sent", m.sent_idx},
                            {"start", m.start},
                            {"end", m.end},
                            {"head", m.head},
                            {"nominal", m.is_nominal},
                            {"pronoun", m.is_pronoun}});
            chains.push_back({{"id", c.chain_id}, {"mentions", std::move(ms)}});
          }
          rec["chains"] = std::move(chains);
        }
        lines.push_back(rec.dump());
      }
  return lines;
}

// ---------------------------------------------------------------------------
// Rule-based fallback

using GenderLexicon = std::unordered_map<std::string, Gender>;

inline GenderLexicon default_gender_lexicon() {
  GenderLexicon lex;
  for (const auto& e : lexicon::kGermanNouns) lex.emplace(std::string(e.noun), *parse_gender(std::string_view(&e.gender, 1)));
  return lex;
}

/// TSV lexicon: noun, tab, gender (m/f/n). Blank lines and '#' comments skipped.
inline GenderLexicon read_gender_lexicon(const std::string& path) {
  GenderLexicon lex;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto f = text::split_whitespace(lines[i]);
    if (f.empty() || f[0][0] == '#') continue;
    std::optional<Gender> g;
    if (f.size() == 2) g = parse_gender(f[1]);
    if (!g || *g == Gender::unknown)
      throw ValidationError(path + ":" + std::to_string(i + 1) + ": expected 'noun<TAB>m|f|n'");
    lex[f[0]] = *g;
  }
  return lex;
}

namespace detail {

struct ClosedWord {
  std::string_view word;
  std::string_view pos;
  Morph morph;
};

inline constexpr Morph kM3{Gender::masc, Number::sg, Person::third};
inline constexpr Morph kF3{Gender::fem, Number::sg, Person::third};
inline constexpr Morph kN3{Gender::neut, Number::sg, Person::third};
inline constexpr Morph k3sg{Gender::unknown, Number::sg, Person::third};
inline constexpr Morph kPl3{Gender::unknown, Number::pl, Person::third};
inline constexpr Morph k1sg{Gender::unknown, Number::sg, Person::first};
inline constexpr Morph k1pl{Gender::unknown, Number::pl, Person::first};
inline constexpr Morph k2sg{Gender::unknown, Number::sg, Person::second};
inline constexpr Morph k2pl{Gender::unknown, Number::pl, Person::second};
inline constexpr Morph k2{Gender::unknown, Number::unknown, Person::second};

// Lowercased German personal pronouns. "sie" and "ihr" are resolved in context.
inline constexpr ClosedWord kGermanPersonal[] = {
    {"er", "PPER", kM3},   {"ihn", "PPER", kM3},  {"es", "PPER", kN3},   {"ihm", "PPER", k3sg},
    {"ich", "PPER", k1sg}, {"mich", "PPER", k1sg}, {"mir", "PPER", k1sg}, {"du", "PPER", k2sg},
    {"dich", "PPER", k2sg}, {"dir", "PPER", k2sg}, {"wir", "PPER", k1pl}, {"uns", "PPER", k1pl},
    {"euch", "PPER", k2pl}, {"ihnen", "PPER", kPl3},
};

inline constexpr std::string_view kGermanArticles[] = {
    "der",    "die",    "das",    "den",   "dem",    "des",    "ein",    "eine",   "einen", "einem",
    "einer",  "eines",  "kein",   "keine", "keinen", "keinem", "keiner", "keines", "diese", "dieser",
    "dieses", "diesen", "diesem", "mein",  "meine",  "meinen", "meinem", "meiner", "dein",  "deine",
    "deinen", "deinem", "deiner", "unser", "unsere", "unseren", "unserem", "euer",  "eure",  "euren",
};

inline constexpr std::string_view kGermanPluralVerbs[] = {
    "sind",  "waren",  "haben",  "hatten", "werden", "wurden", "können", "konnten",
    "müssen", "mussten", "wollen", "wollten", "sollen", "sollten", "gehen",  "kommen",
};

inline constexpr std::string_view kPossessiveSuffixes[] = {"", "e", "en", "em", "er", "es"};

template <std::size_t N>
bool contains(const std::string_view (&set)[N], std::string_view w) {
  return std::find(std::begin(set), std::end(set), w) != std::end(set);
}

inline std::optional<std::size_t> first_letter_token(const Sentence& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (text::starts_letter(s[i])) return i;
  return std::nullopt;
}

inline std::string punct_tag(std::string_view w) {
  if (w == "," ) return "$,";
  if (w == "." || w == "!" || w == "?" || w == "..." || w == ";" || w == ":") return "$.";
  return "$(";
}

/// Possessive determiner stem ("sein" or "ihr") of a lowercased word, or "".
inline std::string_view possessive_stem(std::string_view lower) {
  for (std::string_view stem : {std::string_view("sein"), std::string_view("ihr")})
    if (lower.substr(0, stem.size()) == stem && contains(kPossessiveSuffixes, lower.substr(stem.size())))
      return stem;
  return {};
}

/// Whether a possessive-looking word is used as a determiner. Bare and -er
/// forms double as other words ("sein" = to be, "ihr" = you, "ihrer" = of her)
/// and need a following capitalized noun.
inline bool possessive_in_context(std::string_view lower, std::string_view stem, const Sentence& s, std::size_t i) {
  auto suffix = lower.substr(stem.size());
  if (!suffix.empty() && suffix != "er") return true;
  return i + 1 < s.size() && text::starts_upper(s[i + 1]);
}

inline std::optional<Gender> lookup_noun(const GenderLexicon& lex, const std::string& w) {
  if (auto it = lex.find(w); it != lex.end()) return it->second;
  for (std::string_view suffix : {"es", "s"})
    if (w.size() > suffix.size() + 1 && w.ends_with(suffix))
      if (auto it = lex.find(w.substr(0, w.size() - suffix.size())); it != lex.end()) return it->second;
  return std::nullopt;
}

struct Seen {
  Mention mention;
  Morph morph;
  std::optional<std::size_t> chain;
};

/// Links pronoun mentions to the nearest preceding compatible nominal.
class Chainer {
public:
  explicit Chainer(std::string prefix) : prefix_(std::move(prefix)) {}

  void nominal(const Mention& m, const Morph& morph) { seen_.push_back({m, morph, std::nullopt}); }

  template <class Compatible>
  void pronoun(const Mention& m, Compatible&& ok) {
    for (auto it = seen_.rbegin(); it != seen_.rend(); ++it) {
      if (!it->mention.precedes(m) || !ok(it->morph)) continue;
      if (!it->chain) {
        it->chain = chains_.size();
        chains_.push_back({prefix_ + std::to_string(chains_.size()), {it->mention}});
      }
      chains_[*it->chain].mentions.push_back(m);
      return;
    }
    chains_.push_back({prefix_ + std::to_string(chains_.size()), {m}});
  }

  bool any_preceding(const Mention& m, Gender g) const {
    return std::any_of(seen_.begin(), seen_.end(), [&](const Seen& s) {
      return s.mention.precedes(m) && s.morph.gender == g && s.morph.number == Number::sg;
    });
  }

  std::vector<CorefChain> take() {
    for (auto& c : chains_)
      std::stable_sort(c.mentions.begin(), c.mentions.end(),
                       [](const Mention& a, const Mention& b) { return a.precedes(b); });
    return std::move(chains_);
  }

private:
  std::string prefix_;
  std::vector<Seen> seen_;
  std::vector<CorefChain> chains_;
};

inline bool next_to_plural_verb(const Sentence& s, std::size_t i) {
  auto plural = [&](std::size_t k) { return k < s.size() && contains(kGermanPluralVerbs, text::utf8_lower(s[k])); };
  return plural(i + 1) || (i > 0 && plural(i - 1));
}

inline void annotate_german(AnnotatedDocument& d, const GenderLexicon& lex) {
  Chainer chainer("t");
  for (std::size_t si = 0; si < d.doc.size(); ++si) {
    const Sentence& s = d.doc.pairs[si].target;
    SentenceLayer layer;
    layer.pos.assign(s.size(), "X");
    layer.morph.assign(s.size(), Morph{});
    const auto initial = first_letter_token(s);

    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string& w = s[i];
      if (!text::starts_letter(w)) {
        layer.pos[i] = text::is_ascii_digit(w[0]) ? "CARD" : punct_tag(w);
        continue;
      }
      const std::string lower = text::utf8_lower(w);
      auto personal = std::find_if(std::begin(kGermanPersonal), std::end(kGermanPersonal),
                                   [&](const ClosedWord& c) { return c.word == lower; });
      if (personal != std::end(kGermanPersonal)) {
        layer.pos[i] = std::string(personal->pos);
        layer.morph[i] = personal->morph;
      } else if (lower == "sie") {
        layer.pos[i] = "PPER";
        Mention probe{si, i, i + 1, i, false, true};
        const bool plural = next_to_plural_verb(s, i);
        if (text::starts_lower(w))
          layer.morph[i] = plural ? kPl3 : kF3;
        else if (!plural && initial && *initial == i && chainer.any_preceding(probe, Gender::fem))
          layer.morph[i] = kF3;
        else
          layer.morph[i] = k2;  // formal address
      } else if (auto stem = possessive_stem(lower); !stem.empty() && possessive_in_context(lower, stem, s, i)) {
        layer.pos[i] = "PPOSAT";
        layer.morph[i] = Morph{stem == "ihr" ? Gender::fem : Gender::unknown, Number::sg, Person::third};
      } else if (lower == "ihr") {
        layer.pos[i] = "PPER";
        layer.morph[i] = k2pl;
      } else if (contains(kGermanArticles, lower)) {
        layer.pos[i] = "ART";
      } else if (text::starts_upper(w)) {
        auto g = lookup_noun(lex, w);
        bool sentence_initial = initial && *initial == i;
        if (g || !sentence_initial) {
          layer.pos[i] = "NN";
          if (g) layer.morph[i] = Morph{*g, Number::sg, Person::third};
        }
      }
    }

    // Mentions, left to right so the chainer sees document order.
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& pos = layer.pos[i];
      const auto& morph = layer.morph[i];
      if (pos == "NN" && morph.gender != Gender::unknown) {
        std::size_t start = i;
        auto is_det = [&](std::size_t k) { return layer.pos[k] == "ART" || layer.pos[k] == "PPOSAT"; };
        if (i >= 1 && is_det(i - 1))
          start = i - 1;
        else if (i >= 2 && is_det(i - 2) && layer.pos[i - 1] == "X" && text::starts_lower(s[i - 1]))
          start = i - 2;
        chainer.nominal(Mention{si, start, i + 1, i, true, false}, morph);
        continue;
      }
      if (!morph.third_singular()) continue;
      Mention m{si, i, i + 1, i, false, true};
      if (pos == "PPER" && (morph.gender == Gender::masc || morph.gender == Gender::fem)) {
        chainer.pronoun(m, [g = morph.gender](const Morph& x) { return x.gender == g && x.number == Number::sg; });
      } else if (pos == "PPOSAT") {
        bool fem = morph.gender == Gender::fem;
        chainer.pronoun(m, [fem](const Morph& x) {
          if (x.number != Number::sg) return false;
          return fem ? x.gender == Gender::fem : (x.gender == Gender::masc || x.gender == Gender::neut);
        });
      }
      // "es" is never chained.
    }
    d.tgt_layers.push_back(std::move(layer));
  }
  d.tgt_chains = chainer.take();
}

inline constexpr std::string_view kEnglishDeterminers[] = {"the", "a", "an", "this", "that", "these", "those",
                                                           "my",  "your", "our", "their", "its", "his", "her"};

inline constexpr std::string_view kEnglishClosed[] = {
    "it",    "he",    "she",   "they",  "i",    "you",   "we",    "me",     "him",   "us",     "them",  "the",
    "a",     "an",    "this",  "that",  "these", "those", "my",   "your",   "our",   "their",  "its",   "his",
    "her",   "is",    "was",   "are",   "were", "be",    "been",  "am",     "to",    "of",     "in",    "on",
    "at",    "and",   "or",    "but",   "not",  "n't",   "'s",    "'re",    "'m",    "'ll",    "'ve",   "'d",
    "with",  "for",   "from",  "by",    "as",   "if",    "so",    "very",   "too",   "there",  "here",  "what",
    "who",   "which", "do",    "does",  "did",  "can",   "could", "will",   "would", "should", "must",  "may",
    "might", "have",  "has",   "had",   "no",   "all",   "some",  "any",    "into",  "out",    "up",    "down",
};

inline Morph english_pronoun_morph(std::string_view lower) {
  if (lower == "it" || lower == "its") return kN3;
  if (lower == "he" || lower == "him" || lower == "his") return kM3;
  if (lower == "she" || lower == "her") return kF3;
  if (lower == "they" || lower == "them" || lower == "their") return kPl3;
  if (lower == "i" || lower == "me" || lower == "my") return k1sg;
  if (lower == "we" || lower == "us" || lower == "our") return k1pl;
  if (lower == "you" || lower == "your") return k2;
  return {};
}

inline void annotate_english(AnnotatedDocument& d) {
  Chainer chainer("s");
  for (std::size_t si = 0; si < d.doc.size(); ++si) {
    const Sentence& s = d.doc.pairs[si].source;
    SentenceLayer layer;
    layer.pos.assign(s.size(), "X");
    layer.morph.assign(s.size(), Morph{});
    std::vector<std::string> lower(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) lower[i] = text::utf8_lower(s[i]);
    auto open_word = [&](std::size_t k) {
      return k < s.size() && text::starts_letter(s[k]) && !contains(kEnglishClosed, lower[k]);
    };

    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!text::starts_letter(s[i])) {
        layer.pos[i] = text::is_ascii_digit(s[i][0]) ? "CD" : punct_tag(s[i]);
        continue;
      }
      if (layer.pos[i] == "NN") continue;
      const auto& w = lower[i];
      Morph pm = english_pronoun_morph(w);
      bool det = contains(kEnglishDeterminers, w);
      if (det && open_word(i + 1)) {
        layer.pos[i] = pm.person == Person::unknown ? "DT" : "PRP$";
        layer.morph[i] = pm;
        layer.pos[i + 1] = "NN";
        layer.morph[i + 1] = Morph{Gender::unknown, (w == "these" || w == "those") ? Number::pl : Number::sg,
                                   Person::third};
      } else if (pm.person != Person::unknown) {
        layer.pos[i] = (w == "its" || w == "his" || w == "my" || w == "our" || w == "their" || w == "your") ? "PRP$"
                                                                                                           : "PRP";
        layer.morph[i] = pm;
      } else if (det) {
        layer.pos[i] = "DT";
      }
    }

    for (std::size_t i = 0; i < s.size(); ++i) {
      if (layer.pos[i] == "NN") {
        chainer.nominal(Mention{si, i >= 1 ? i - 1 : i, i + 1, i, true, false}, layer.morph[i]);
      } else if (lower[i] == "it" || lower[i] == "its") {
        chainer.pronoun(Mention{si, i, i + 1, i, false, true},
                        [](const Morph& x) { return x.number != Number::pl; });
      }
    }
    d.src_layers.push_back(std::move(layer));
  }
  d.src_chains = chainer.take();
}

}  // namespace detail

/// Rule-based annotation of both sides. Only "it"/"its" are chained on the
/// English side and only er/ihn/sie and sein-/ihr- possessives on the German
/// side; English nominals are a determiner plus the following open-class word.
inline std::vector<AnnotatedDocument> heuristic_annotate(const ParallelCorpus& corpus,
                                                         const GenderLexicon& lexicon = default_gender_lexicon(),
                                                         std::size_t jobs = 1) {
  std::vector<AnnotatedDocument> out(corpus.documents.size());
  for_each_shard(out.size(), jobs, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t d = begin; d < end; ++d) {
      out[d].doc = corpus.documents[d];
      detail::annotate_english(out[d]);
      detail::annotate_german(out[d], lexicon);
    }
  });
  for (const auto& d : out) validate(d);
  return out;
}

}  // namespace contrapro
