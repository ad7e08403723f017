#include <contrapro/annotate.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace contrapro;

namespace {

const std::string kData = CONTRAPRO_TEST_DATA;

ParallelCorpus fixture_corpus() { return load_jsonl_documents(kData + "/corpus3/docs.jsonl"); }

std::vector<std::string> fixture_lines() { return text::read_lines(kData + "/annot/annotations.jsonl"); }

ParallelCorpus one_doc(const std::vector<std::string>& src, const std::vector<std::string>& tgt) {
  LoadOptions o;
  o.pretokenized = true;
  return build_parallel_corpus(src, tgt, std::vector<std::size_t>{src.size()}, o);
}

// Surfaces of a chain's mention heads, in order.
std::vector<std::string> heads(const AnnotatedDocument& d, Side side, const CorefChain& c) {
  std::vector<std::string> out;
  for (const auto& m : c.mentions) out.push_back(d.doc.pairs[m.sent_idx].side(side)[m.head]);
  return out;
}

const CorefChain* chain_with(const AnnotatedDocument& d, Side side, std::size_t sent, std::size_t tok) {
  auto ref = find_mention(d.chains(side), sent, tok);
  return ref ? &d.chains(side)[ref->chain] : nullptr;
}

Mention pron(std::size_t s, std::size_t t) { return Mention{s, t, t + 1, t, false, true}; }
Mention noun(std::size_t s, std::size_t a, std::size_t h) { return Mention{s, a, h + 1, h, true, false}; }

}  // namespace

TEST(Ingest, WellFormedFixture) {
  auto docs = ingest_annotations(fixture_corpus(), fixture_lines());
  ASSERT_EQ(docs.size(), 2u);
  std::size_t chains = 0;
  for (const auto& d : docs) chains += d.src_chains.size() + d.tgt_chains.size();
  EXPECT_EQ(chains, 3u);
  // e1 is spread over two records and merged.
  ASSERT_EQ(docs[0].src_chains.size(), 1u);
  EXPECT_EQ(heads(docs[0], Side::source, docs[0].src_chains[0]), (std::vector<std::string>{"door", "It", "it"}));
  for (const auto& d : docs) EXPECT_NO_THROW(validate(d));
}

TEST(Ingest, MorphFieldMapping) {
  auto docs = ingest_annotations(fixture_corpus(), fixture_lines());
  const auto& layer = docs[0].tgt_layers[2];
  EXPECT_EQ(docs[0].doc.pairs[2].target[2], "sie");
  EXPECT_EQ(layer.pos[2], "PPER");
  EXPECT_EQ(layer.morph[2], (Morph{Gender::fem, Number::sg, Person::third}));
  EXPECT_EQ(layer.morph[0], Morph{});
}

TEST(Ingest, SpanBeyondSentence) {
  auto lines = fixture_lines();
  auto rec = nlohmann::json::parse(lines[0]);
  rec["chains"][0]["mentions"][0]["end"] = 9;
  lines[0] = rec.dump();
  try {
    ingest_annotations(fixture_corpus(), lines);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("door"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sentence 0"), std::string::npos) << msg;
  }
}

TEST(Ingest, Rejections) {
  auto corpus = fixture_corpus();
  auto mutate = [&](std::size_t line, auto&& fn) {
    auto lines = fixture_lines();
    auto rec = nlohmann::json::parse(lines[line]);
    fn(rec);
    lines[line] = rec.dump();
    return lines;
  };
  EXPECT_THROW(ingest_annotations(corpus, mutate(1, [](auto& r) { r["pos"].push_back("X"); })), ValidationError);
  EXPECT_THROW(ingest_annotations(corpus, mutate(1, [](auto& r) { r["morph"].erase(0); })), ValidationError);
  EXPECT_THROW(ingest_annotations(corpus, mutate(1, [](auto& r) { r["doc_id"] = "nope"; })), ValidationError);
  EXPECT_THROW(ingest_annotations(corpus, mutate(1, [](auto& r) { r["sent_idx"] = 7; })), ValidationError);
  EXPECT_THROW(ingest_annotations(corpus, mutate(1, [](auto& r) { r["sent_idx"] = 0; })), ValidationError);
  EXPECT_THROW(ingest_annotations(corpus, mutate(1, [](auto& r) { r["morph"][0]["g"] = "x"; })), ValidationError);
  EXPECT_THROW(ingest_annotations(corpus, mutate(0, [](auto& r) { r["chains"][0]["mentions"][0]["head"] = 2; })),
               ValidationError);
  EXPECT_THROW(ingest_annotations(corpus, mutate(0, [](auto& r) { r["chains"][0]["mentions"][1]["sent"] = 5; })),
               ValidationError);
  // Same (sent, start) with a different head breaks strict ordering.
  EXPECT_THROW(ingest_annotations(corpus, mutate(1,
                                                 [](auto& r) {
                                                   r["chains"][0]["mentions"][0] = {{"sent", 0},   {"start", 3},
                                                                                    {"end", 5},    {"head", 3},
                                                                                    {"nominal", true}};
                                                 })),
               ValidationError);
  auto lines = fixture_lines();
  lines.pop_back();
  EXPECT_THROW(ingest_annotations(corpus, lines), ValidationError);
  lines = fixture_lines();
  lines[3] = "{not json";
  EXPECT_THROW(ingest_annotations(corpus, lines), ValidationError);
}

TEST(Ingest, RoundTripThroughJsonl) {
  auto docs = ingest_annotations(fixture_corpus(), fixture_lines());
  auto again = ingest_annotations(fixture_corpus(), to_annotation_jsonl(docs));
  ASSERT_EQ(again.size(), docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (Side side : {Side::source, Side::target}) {
      ASSERT_EQ(again[d].chains(side).size(), docs[d].chains(side).size());
      for (std::size_t c = 0; c < docs[d].chains(side).size(); ++c)
        EXPECT_EQ(again[d].chains(side)[c].mentions, docs[d].chains(side)[c].mentions);
      for (std::size_t s = 0; s < docs[d].doc.size(); ++s) {
        EXPECT_EQ(again[d].layers(side)[s].pos, docs[d].layers(side)[s].pos);
        EXPECT_EQ(again[d].layers(side)[s].morph, docs[d].layers(side)[s].morph);
      }
    }
}

TEST(Heuristic, DoorExampleChainsSieToTuer) {
  auto docs = heuristic_annotate(fixture_corpus());
  const auto& d = docs[0];
  const auto* c = chain_with(d, Side::target, 2, 2);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(heads(d, Side::target, *c), (std::vector<std::string>{"Tür", "Sie", "sie"}));
  EXPECT_EQ(d.tgt_layers[0].morph[4].gender, Gender::fem);
  EXPECT_EQ(d.tgt_layers[1].morph[0], (Morph{Gender::fem, Number::sg, Person::third}));

  const auto* e = chain_with(d, Side::source, 2, 2);
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(heads(d, Side::source, *e), (std::vector<std::string>{"door", "It", "it"}));
}

TEST(Heuristic, NearestCompatibleAntecedent) {
  auto docs = heuristic_annotate(one_doc({"The man saw the dog .", "It barked ."}, {"Der Mann sah den Hund .", "Er bellte ."}));
  const auto& d = docs[0];
  const auto* c = chain_with(d, Side::target, 1, 0);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(heads(d, Side::target, *c), (std::vector<std::string>{"Hund", "Er"}));
  EXPECT_EQ(chain_with(d, Side::target, 0, 1), nullptr);
}

TEST(Heuristic, GenderFiltersCandidates) {
  auto docs = heuristic_annotate(one_doc({"x", "y"}, {"Die Tür und der Hund .", "Sie klemmt ."}));
  const auto* c = chain_with(docs[0], Side::target, 1, 0);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(heads(docs[0], Side::target, *c), (std::vector<std::string>{"Tür", "Sie"}));
}

TEST(Heuristic, NoCandidateGivesSingleton) {
  auto docs = heuristic_annotate(one_doc({"x"}, {"Er kommt ."}));
  ASSERT_EQ(docs[0].tgt_chains.size(), 1u);
  EXPECT_EQ(docs[0].tgt_chains[0].mentions, (std::vector<Mention>{pron(0, 0)}));
}

TEST(Heuristic, EsIsNeverChained) {
  auto docs = heuristic_annotate(one_doc({"x", "y"}, {"Wo ist das Buch ?", "Es liegt auf dem Tisch ."}));
  EXPECT_FALSE(find_mention(docs[0].tgt_chains, 1, 0));
  EXPECT_EQ(docs[0].tgt_layers[1].morph[0], (Morph{Gender::neut, Number::sg, Person::third}));
}

TEST(Heuristic, FormalSie) {
  // No preceding feminine nominal: sentence-initial "Sie" is formal address.
  auto a = heuristic_annotate(one_doc({"x"}, {"Sie kommt morgen ."}));
  EXPECT_EQ(a[0].tgt_layers[0].morph[0].person, Person::second);
  EXPECT_TRUE(a[0].tgt_chains.empty());
  auto b = heuristic_annotate(one_doc({"x"}, {"Sie können gehen ."}));
  EXPECT_FALSE(b[0].tgt_layers[0].morph[0].third_singular());
  // Mid-sentence capitalized "Sie" is formal even after a feminine noun.
  auto c = heuristic_annotate(one_doc({"x", "y"}, {"Die Tür .", "Haben Sie Zeit ?"}));
  EXPECT_EQ(c[0].tgt_layers[1].morph[1].person, Person::second);
  EXPECT_FALSE(find_mention(c[0].tgt_chains, 1, 1));
  // Lowercase "sie" with a plural verb is plural.
  auto d = heuristic_annotate(one_doc({"x", "y"}, {"Die Tür .", "Wo sind sie ?"}));
  EXPECT_EQ(d[0].tgt_layers[1].morph[2].number, Number::pl);
}

TEST(Heuristic, InitialCapitalizedWordNeedsLexicon) {
  auto docs = heuristic_annotate(one_doc({"x"}, {"Gestern kam der Zug ."}));
  EXPECT_NE(docs[0].tgt_layers[0].pos[0], "NN");
  EXPECT_EQ(docs[0].tgt_layers[0].pos[3], "NN");
  auto unknown = heuristic_annotate(one_doc({"x"}, {"Ich sah den Quux ."}));
  EXPECT_EQ(unknown[0].tgt_layers[0].pos[3], "NN");
  EXPECT_EQ(unknown[0].tgt_layers[0].morph[3].gender, Gender::unknown);
  EXPECT_TRUE(unknown[0].tgt_chains.empty());
}

TEST(Heuristic, PossessivesJoinChains) {
  auto docs = heuristic_annotate(one_doc({"x", "y"}, {"Das Buch ist alt .", "Es hat seinen Einband verloren ."}));
  const auto* c = chain_with(docs[0], Side::target, 1, 2);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(heads(docs[0], Side::target, *c), (std::vector<std::string>{"Buch", "seinen"}));
  EXPECT_EQ(docs[0].tgt_layers[1].pos[2], "PPOSAT");
  // "sein" as a verb is not a possessive.
  auto v = heuristic_annotate(one_doc({"x"}, {"Das muss so sein ."}));
  EXPECT_NE(v[0].tgt_layers[0].pos[3], "PPOSAT");
}

TEST(Heuristic, CustomLexicon) {
  GenderLexicon lex{{"Quux", Gender::fem}};
  auto docs = heuristic_annotate(one_doc({"x", "y"}, {"Ich sah die Quux .", "Sie war rot ."}), lex);
  const auto* c = chain_with(docs[0], Side::target, 1, 0);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->mentions.front(), noun(0, 2, 3));
}

TEST(Heuristic, DefaultLexiconCoversFixtureNouns) {
  auto lex = default_gender_lexicon();
  EXPECT_GE(lex.size(), 200u);
  EXPECT_EQ(lex.at("Tür"), Gender::fem);
  EXPECT_EQ(lex.at("Fledermaus"), Gender::fem);
  EXPECT_EQ(lex.at("Hund"), Gender::masc);
  EXPECT_EQ(lex.at("Buch"), Gender::neut);
}

TEST(ChainAntecedent, Examples) {
  CorefChain bat{"c", {noun(0, 3, 4), pron(1, 0)}};
  EXPECT_EQ(chain_antecedent(bat, pron(1, 0)), noun(0, 3, 4));

  CorefChain its{"c", {pron(0, 0), pron(1, 0)}};
  EXPECT_FALSE(chain_antecedent(its, pron(1, 0)));

  CorefChain door{"c", {noun(0, 3, 4), pron(1, 0), pron(2, 2)}};
  EXPECT_EQ(chain_antecedent(door, pron(2, 2)), noun(0, 3, 4));

  EXPECT_THROW(chain_antecedent(door, pron(2, 3)), UsageError);
}

TEST(ChainAntecedent, NearestPrecedingNominal) {
  CorefChain c{"c", {noun(0, 0, 1), noun(1, 2, 3), pron(2, 0), noun(3, 0, 1), pron(3, 4)}};
  EXPECT_EQ(chain_antecedent(c, pron(2, 0)), noun(1, 2, 3));
  EXPECT_EQ(chain_antecedent(c, pron(3, 4)), noun(3, 0, 1));
  EXPECT_FALSE(chain_antecedent(c, noun(0, 0, 1)));
}

namespace {

// Random German/English documents built from lexicon nouns, pronouns and filler.
ParallelCorpus random_corpus(unsigned seed, std::size_t docs) {
  std::mt19937 rng(seed);
  std::vector<std::string> nouns;
  for (const auto& e : lexicon::kGermanNouns) nouns.emplace_back(e.noun);
  const std::vector<std::string> de_filler = {"Sie", "sie", "er", "es", "ihn", "seine", "ihre", "ihr", "sein", "der",
                                              "die", "das", "eine", "ist", "hat", "sind", "und", "nicht", ",", ".",
                                              "?", "-", "Quux", "gestern"};
  const std::vector<std::string> en_filler = {"it", "its", "the", "a", "door", "bat", "is", "has", "and", "It",
                                              "her", ".", "?", "those", "cars"};
  std::vector<std::string> src;
  std::vector<std::string> tgt;
  std::vector<std::size_t> bounds;
  for (std::size_t d = 0; d < docs; ++d) {
    std::size_t n = 1 + rng() % 5;
    for (std::size_t s = 0; s < n; ++s) {
      std::string a;
      std::string b;
      std::size_t len = 1 + rng() % 9;
      for (std::size_t k = 0; k < len; ++k) {
        a += (k ? " " : "") + en_filler[rng() % en_filler.size()];
        b += (k ? " " : "");
        b += rng() % 3 == 0 ? nouns[rng() % nouns.size()] : de_filler[rng() % de_filler.size()];
      }
      src.push_back(a);
      tgt.push_back(b);
    }
    bounds.push_back(src.size());
  }
  LoadOptions o;
  o.pretokenized = true;
  return build_parallel_corpus(src, tgt, bounds, o);
}

}  // namespace

TEST(HeuristicProperties, ChainsValidGenderConsistentAndOrdered) {
  auto corpus = random_corpus(4242, 300);
  auto docs = heuristic_annotate(corpus, default_gender_lexicon(), 3);
  auto serial = heuristic_annotate(corpus);
  ASSERT_EQ(to_annotation_jsonl(docs), to_annotation_jsonl(serial));
  std::size_t linked = 0;
  for (const auto& d : docs) {
    validate(d);
    for (const auto& c : d.tgt_chains) {
      std::set<Gender> genders;
      for (const auto& m : c.mentions) {
        const auto& morph = d.tgt_layers[m.sent_idx].morph[m.head];
        if (m.is_nominal && morph.gender != Gender::unknown) genders.insert(morph.gender);
        EXPECT_NE(text::utf8_lower(d.doc.pairs[m.sent_idx].target[m.head]), "es");
      }
      EXPECT_LE(genders.size(), 1u);
      for (const auto& m : c.mentions) {
        if (!m.is_pronoun) continue;
        if (auto a = chain_antecedent(c, m)) {
          EXPECT_TRUE(a->precedes(m));
          ++linked;
        }
      }
    }
  }
  EXPECT_GT(linked, 100u);
}

TEST(HeuristicProperties, IngestAcceptsOwnOutput) {
  auto corpus = random_corpus(77, 100);
  auto docs = heuristic_annotate(corpus);
  auto back = ingest_annotations(corpus, to_annotation_jsonl(docs));
  EXPECT_EQ(to_annotation_jsonl(back), to_annotation_jsonl(docs));
}
