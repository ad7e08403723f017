#pragma once

// Synthetic annotated and aligned documents with known antecedents. Some
// documents carry a planted predicate violation; every pronoun example in
// such a document must be rejected by extraction.

#include <contrapro/alignment.hpp>
#include <contrapro/annotate.hpp>
#include <contrapro/corpus.hpp>
#include <contrapro/testgen.hpp>

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace synth {

using namespace contrapro;

struct Noun {
  const char* en;
  const char* de;
  Gender gender;
};

inline const std::vector<Noun>& nouns() {
  static const std::vector<Noun> n = {
      {"door", "Tür", Gender::fem},       {"bat", "Fledermaus", Gender::fem}, {"lamp", "Lampe", Gender::fem},
      {"cup", "Tasse", Gender::fem},      {"bag", "Tasche", Gender::fem},     {"car", "Wagen", Gender::masc},
      {"chair", "Stuhl", Gender::masc},   {"key", "Schlüssel", Gender::masc}, {"table", "Tisch", Gender::masc},
      {"tree", "Baum", Gender::masc},     {"book", "Buch", Gender::neut},     {"house", "Haus", Gender::neut},
      {"window", "Fenster", Gender::neut}, {"picture", "Bild", Gender::neut}, {"boat", "Boot", Gender::neut},
  };
  return n;
}

enum class Violation { none, misaligned, chainless_src, chainless_tgt, unaligned_antecedent, formal };

inline const char* to_string(Violation v) {
  switch (v) {
    case Violation::none: return "none";
    case Violation::misaligned: return "misaligned";
    case Violation::chainless_src: return "chainless_src";
    case Violation::chainless_tgt: return "chainless_tgt";
    case Violation::unaligned_antecedent: return "unaligned_antecedent";
    case Violation::formal: return "formal";
  }
  return "?";
}

struct Corpus {
  ParallelCorpus corpus;
  std::vector<AnnotatedDocument> docs;
  CorpusAlignment alignments;
  /// Ids that a correct extraction must return, and their gold data.
  std::map<std::string, CandidateExample> expected;
  /// Ids of pronoun pairs in violating documents, with the violation.
  std::map<std::string, Violation> planted;
};

namespace detail {

inline Morph m3(Gender g) { return Morph{g, Number::sg, Person::third}; }

inline std::string pron(Gender g) { return g == Gender::masc ? "er" : g == Gender::fem ? "sie" : "es"; }
inline std::string det_nom(Gender g) { return g == Gender::masc ? "Der" : g == Gender::fem ? "Die" : "Das"; }
inline std::string det_acc(Gender g) { return g == Gender::masc ? "den" : g == Gender::fem ? "die" : "das"; }
inline std::string poss(Gender g) { return g == Gender::fem ? "ihre" : "seine"; }

struct Builder {
  AnnotatedDocument doc;
  std::vector<Alignment> links;
  CorefChain en{"e0", {}};
  CorefChain de{"g0", {}};

  std::size_t add(const std::vector<std::string>& src, const std::vector<std::string>& tgt,
                  const std::vector<std::string>& src_pos, const std::vector<Morph>& src_morph,
                  const std::vector<std::string>& tgt_pos, const std::vector<Morph>& tgt_morph, const std::string& al) {
    doc.doc.pairs.push_back({Sentence::from_words(src, Side::source), Sentence::from_words(tgt, Side::target)});
    doc.src_layers.push_back({src_pos, src_morph});
    doc.tgt_layers.push_back({tgt_pos, tgt_morph});
    links.push_back(Alignment::from_pharaoh(al));
    return doc.doc.size() - 1;
  }
};

}  // namespace detail

/// `n_docs` documents; roughly `violation_rate` of them carry one planted violation.
inline Corpus make(unsigned seed, std::size_t n_docs, double violation_rate = 0.3) {
  using detail::m3;
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto coin = [&](double p) { return static_cast<double>(rng() % 1000000) / 1e6 < p; };
  const Morph none{};
  const Morph i1{Gender::unknown, Number::sg, Person::first};
  const Morph we{Gender::unknown, Number::pl, Person::first};
  const Morph it3 = m3(Gender::neut);

  Corpus out;
  out.corpus.corpus_id = "synthetic-" + std::to_string(seed);
  for (std::size_t k = 0; k < n_docs; ++k) {
    detail::Builder b;
    b.doc.doc.doc_id = "syn" + std::to_string(k);
    const bool fallback_doc = coin(0.05);
    const Noun& noun = nouns()[pick(nouns().size())];
    const Gender g = noun.gender;
    const bool es = g == Gender::neut;

    Violation v = Violation::none;
    if (coin(violation_rate)) {
      std::vector<Violation> kinds = {Violation::misaligned, Violation::chainless_src, Violation::unaligned_antecedent};
      if (!es) kinds.push_back(Violation::chainless_tgt);
      if (g == Gender::fem) kinds.push_back(Violation::formal);
      v = fallback_doc ? Violation::misaligned : kinds[pick(kinds.size())];
    }

    struct Pronoun {
      std::size_t sent, src, tgt;
    };
    std::vector<Pronoun> pronouns;
    std::vector<Mention> en_mentions;
    std::vector<Mention> de_mentions;
    std::optional<std::pair<std::size_t, std::size_t>> ante_heads;  // sentence, en head (de head equal)
    std::size_t ante_sent = 0;

    if (fallback_doc) {
      // "It was cold ." / "It was dark ." with no nominal anywhere.
      for (const char* adj : {"cold", "dark"}) {
        std::string de_adj = std::string(adj) == "cold" ? "kalt" : "dunkel";
        auto s = b.add({"It", "was", adj, "."}, {"Es", "war", de_adj, "."}, {"PRP", "VBD", "JJ", "."},
                       {it3, none, none, none}, {"PPER", "VAFIN", "ADJD", "$."}, {it3, none, none, none},
                       v == Violation::misaligned ? "0-1 1-0 2-2 3-3" : "0-0 1-1 2-2 3-3");
        pronouns.push_back({s, 0, 0});
      }
    } else {
      const bool formal = v == Violation::formal;
      const Morph second{Gender::unknown, Number::unknown, Person::second};
      const std::size_t lead = pick(3);
      for (std::size_t f = 0; f < lead; ++f)
        b.add({"We", "waited", "."}, {"Wir", "warteten", "."}, {"PRP", "VBD", "."}, {we, none, none},
              {"PPER", "VVFIN", "$."}, {we, none, none}, "0-0 1-1 2-2");

      const std::size_t distance = std::vector<std::size_t>{0, 1, 1, 1, 2, 3, 5}[pick(7)];
      if (distance == 0) {
        // "The N broke when it fell ." / "Die N zerbrach , als sie fiel ."
        std::string head_link = v == Violation::unaligned_antecedent ? "" : "1-1 ";
        std::string pron_link = v == Violation::misaligned ? "4-6 " : "4-5 ";
        auto s = b.add({"The", noun.en, "broke", "when", "it", "fell", "."},
                       {detail::det_nom(g), noun.de, "zerbrach", ",", "als", detail::pron(g), "fiel", "."},
                       {"DT", "NN", "VBD", "WRB", "PRP", "VBD", "."}, {none, m3(Gender::unknown), none, none, it3, none, none},
                       {"ART", "NN", "VVFIN", "$,", "KOUS", "PPER", "VVFIN", "$."},
                       {none, m3(g), none, none, none, formal ? second : m3(g), none, none},
                       "0-0 " + head_link + "2-2 3-4 " + pron_link + "5-6 6-7");
        ante_sent = s;
        ante_heads = std::make_pair(s, std::size_t{1});
        en_mentions.push_back({s, 0, 2, 1, true, false});
        de_mentions.push_back({s, 0, 2, 1, true, false});
        pronouns.push_back({s, 4, 5});
      } else {
        std::string head_link = v == Violation::unaligned_antecedent ? "" : "3-3 ";
        auto s = b.add({"I", "saw", "the", noun.en, "."}, {"Ich", "sah", detail::det_acc(g), noun.de, "."},
                       {"PRP", "VBD", "DT", "NN", "."}, {i1, none, none, m3(Gender::unknown), none},
                       {"PPER", "VVFIN", "ART", "NN", "$."}, {i1, none, none, m3(g), none},
                       "0-0 1-1 2-2 " + head_link + "4-4");
        ante_sent = s;
        ante_heads = std::make_pair(s, std::size_t{3});
        en_mentions.push_back({s, 2, 4, 3, true, false});
        de_mentions.push_back({s, 2, 4, 3, true, false});
        for (std::size_t f = 1; f < distance; ++f)
          b.add({"We", "waited", "."}, {"Wir", "warteten", "."}, {"PRP", "VBD", "."}, {we, none, none},
                {"PPER", "VVFIN", "$."}, {we, none, none}, "0-0 1-1 2-2");
      }

      // One or two pronoun sentences after the antecedent.
      const std::size_t follow = distance == 0 ? pick(2) : 1 + pick(2);
      for (std::size_t f = 0; f < follow; ++f) {
        const bool with_poss = coin(0.5);
        std::string p = detail::pron(g);
        p[0] = static_cast<char>(p[0] - 32);
        Morph pm = m3(g);
        if (formal) pm = second;
        std::string pl = v == Violation::misaligned ? "0-1 1-0" : "0-0 1-1";
        std::size_t s;
        if (with_poss) {
          s = b.add({"It", "lost", "its", "color", "."}, {p, "verlor", detail::poss(g), "Farbe", "."},
                    {"PRP", "VBD", "PRP$", "NN", "."}, {it3, none, it3, m3(Gender::unknown), none},
                    {"PPER", "VVFIN", "PPOSAT", "NN", "$."}, {pm, none, m3(g == Gender::fem ? g : Gender::unknown), m3(Gender::fem), none},
                    pl + " 2-2 3-3 4-4");
          de_mentions.push_back({s, 2, 3, 2, false, true});
        } else {
          s = b.add({"It", "was", "old", "."}, {p, "war", "alt", "."}, {"PRP", "VBD", "JJ", "."}, {it3, none, none, none},
                    {"PPER", "VAFIN", "ADJD", "$."}, {pm, none, none, none}, pl + " 2-2 3-3");
        }
        pronouns.push_back({s, 0, 0});
      }
    }

    // Chains.
    for (const auto& p : pronouns) {
      en_mentions.push_back({p.sent, p.src, p.src + 1, p.src, false, true});
      if (!es) de_mentions.push_back({p.sent, p.tgt, p.tgt + 1, p.tgt, false, true});
    }
    auto by_pos = [](const Mention& a, const Mention& c) { return a.precedes(c); };
    std::sort(en_mentions.begin(), en_mentions.end(), by_pos);
    std::sort(de_mentions.begin(), de_mentions.end(), by_pos);
    if (v == Violation::chainless_src) {
      // Pronouns left out of every chain; the nominal keeps a singleton chain.
      std::erase_if(en_mentions, [](const Mention& m) { return m.is_pronoun; });
    }
    if (v == Violation::chainless_tgt) std::erase_if(de_mentions, [](const Mention& m) { return m.is_pronoun; });
    if (!en_mentions.empty()) b.doc.src_chains.push_back({"e0", en_mentions});
    if (!de_mentions.empty()) b.doc.tgt_chains.push_back({"g0", de_mentions});

    validate(b.doc);
    for (const auto& p : pronouns) {
      std::string id = b.doc.doc.doc_id + ":" + std::to_string(p.sent) + ":" + std::to_string(p.tgt);
      if (v != Violation::none) {
        out.planted[id] = v;
        continue;
      }
      CandidateExample c;
      c.doc_id = b.doc.doc.doc_id;
      c.sent_idx = p.sent;
      c.src_pronoun_pos = p.src;
      c.tgt_pronoun_pos = p.tgt;
      c.ref_class = *pronoun_class_of(b.doc.doc.pairs[p.sent].target[p.tgt]);
      c.tgt_antecedent_gender = class_gender(c.ref_class);
      if (fallback_doc) {
        c.fallback_antecedent = true;
        std::size_t nearest = p.sent == pronouns.front().sent ? p.sent : pronouns.front().sent;
        c.ante_distance = p.sent - nearest;
        c.src_antecedent = {"It", nearest, 0};
        c.tgt_antecedent = {b.doc.doc.pairs[p.sent].target[p.tgt], p.sent, p.tgt};
      } else {
        c.ante_distance = p.sent - ante_sent;
        c.src_antecedent = {noun.en, ante_sent, ante_heads->second};
        c.tgt_antecedent = {noun.de, ante_sent, ante_heads->second};
      }
      out.expected[id] = c;
    }
    out.corpus.documents.push_back(b.doc.doc);
    out.alignments.push_back(b.links);
    out.docs.push_back(std::move(b.doc));
  }
  return out;
}

}  // namespace synth
