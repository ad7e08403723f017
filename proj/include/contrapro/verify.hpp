#pragma once

// Second, independent check of the four extraction predicates. Written
// against the raw layers, chains and link sets without reusing any of the
// extraction helpers, so a bug in one is unlikely to hide in the other.

#include <contrapro/alignment.hpp>
#include <contrapro/annotate.hpp>
#include <contrapro/testgen.hpp>

#include <string>
#include <vector>

namespace contrapro {

namespace detail {

struct ChainHit {
  const CorefChain* chain = nullptr;
  const Mention* mention = nullptr;
};

inline std::vector<ChainHit> chains_through(const std::vector<CorefChain>& chains, std::size_t s, std::size_t t) {
  std::vector<ChainHit> hits;
  for (const auto& c : chains)
    for (const auto& m : c.mentions)
      if (m.sent_idx == s && m.head == t && c.mentions.size() >= 2) hits.push_back({&c, &m});
  return hits;
}

// Last nominal mention strictly before `p` in the chain, or null.
inline const Mention* last_nominal_before(const CorefChain& c, const Mention& p) {
  const Mention* best = nullptr;
  for (const auto& m : c.mentions) {
    bool before = m.sent_idx < p.sent_idx || (m.sent_idx == p.sent_idx && m.start < p.start);
    if (m.is_nominal && before) best = &m;
  }
  return best;
}

inline bool linked(const Alignment& a, std::size_t s, std::size_t t) {
  for (const auto& l : a.links)
    if (l.src == s && l.tgt == t) return true;
  return false;
}

}  // namespace detail

/// Reasons a candidate fails the extraction protocol; empty when it passes.
inline std::vector<std::string> verify_candidate(const AnnotatedDocument& d, const std::vector<Alignment>& al,
                                                 const CandidateExample& c) {
  std::vector<std::string> fail;
  const std::size_t s = c.sent_idx;
  if (d.doc.doc_id != c.doc_id) fail.push_back("document mismatch");
  if (s >= d.doc.size() || s >= al.size()) {
    fail.push_back("sentence index out of range");
    return fail;
  }
  const auto& src = d.doc.pairs[s].source;
  const auto& tgt = d.doc.pairs[s].target;
  const std::size_t i = c.src_pronoun_pos;
  const std::size_t j = c.tgt_pronoun_pos;
  if (i >= src.size() || j >= tgt.size()) {
    fail.push_back("pronoun position out of range");
    return fail;
  }

  // 1
  std::string en;
  for (char ch : src[i]) en += static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch + 32 : ch);
  std::string de;
  for (char ch : tgt[j]) de += static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch + 32 : ch);
  if (en != "it") fail.push_back("1: source token is not 'it'");
  if (de != "er" && de != "sie" && de != "es") fail.push_back("1: target token is not er/sie/es");
  if (de != to_string(c.ref_class)) fail.push_back("1: reference class does not match the target token");
  const auto& tl = d.tgt_layers[s];
  if (tl.pos[j] != "PPER" || tl.morph[j].person != Person::third || tl.morph[j].number != Number::sg)
    fail.push_back("1: target token is not tagged third person singular");

  // 2
  if (!detail::linked(al[s], i, j)) fail.push_back("2: pronouns not aligned");

  // 3
  const bool es = de == "es";
  auto src_hits = detail::chains_through(d.src_chains, s, i);
  auto tgt_hits = detail::chains_through(d.tgt_chains, s, j);
  if (src_hits.empty()) fail.push_back("3: 'it' is in no coreference chain");
  if (!es && tgt_hits.empty()) fail.push_back("3: target pronoun is in no coreference chain");
  if (!fail.empty()) return fail;

  // 4
  if (c.ante_distance > s) {
    fail.push_back("4: antecedent distance reaches before the document");
    return fail;
  }
  const std::size_t a = s - c.ante_distance;
  const Mention* src_ante = detail::last_nominal_before(*src_hits.front().chain, *src_hits.front().mention);
  if (c.fallback_antecedent) {
    if (!es) fail.push_back("4: fallback antecedent on a non-es example");
    if (src_ante) fail.push_back("4: fallback recorded although the chain has a nominal antecedent");
    return fail;
  }
  if (!src_ante) {
    fail.push_back("4: no nominal antecedent in the English chain");
    return fail;
  }
  if (src_ante->sent_idx != a || c.src_antecedent.sent_idx != a || c.src_antecedent.head != src_ante->head)
    fail.push_back("4: recorded English antecedent is not the chain's nearest nominal");
  if (c.tgt_antecedent.sent_idx != a || c.tgt_antecedent.head >= d.doc.pairs[a].target.size()) {
    fail.push_back("4: recorded target antecedent out of range");
    return fail;
  }
  const std::size_t th = c.tgt_antecedent.head;
  if (!es) {
    const Mention* tgt_ante = detail::last_nominal_before(*tgt_hits.front().chain, *tgt_hits.front().mention);
    if (!tgt_ante || tgt_ante->sent_idx != a || tgt_ante->head != th)
      fail.push_back("4: recorded target antecedent is not the chain's nearest nominal");
  }
  if (!detail::linked(al[a], src_ante->head, th)) fail.push_back("4: antecedent heads not aligned");
  Gender g = d.tgt_layers[a].morph[th].gender;
  Gender want = de == "er" ? Gender::masc : de == "sie" ? Gender::fem : Gender::neut;
  if (g != Gender::unknown && g != want) fail.push_back("4: antecedent gender disagrees with the pronoun");
  return fail;
}

}  // namespace contrapro
