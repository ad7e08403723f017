#include <contrapro/testgen.hpp>
#include <contrapro/verify.hpp>

#include "support/synthetic.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace contrapro;

namespace {

const std::string kData = CONTRAPRO_TEST_DATA;

std::vector<AnnotatedDocument> fixture_docs() {
  auto corpus = load_jsonl_documents(kData + "/corpus3/docs.jsonl");
  auto docs = ingest_annotations(corpus, text::read_lines(kData + "/annot/annotations.jsonl"));
  // English chain for the bat document: "a bat" ... "It".
  docs[1].src_chains.push_back({"e2", {Mention{0, 2, 4, 3, true, false}, Mention{1, 0, 1, 0, false, true}}});
  return docs;
}

// Word alignments for the two fixture documents.
CorpusAlignment fixture_alignments() {
  auto a = [](const char* s) { return Alignment::from_pharaoh(s); };
  return {{a("0-0 1-1 2-2 3-3 4-4 5-5"), a("0-0 1-1 2-2 3-3 4-4"), a("0-0 1-1 2-2 3-3 4-4")},
          {a("0-0 1-3 2-3 3-4 4-2 5-6"), a("0-0 1-1 2-2 3-6 4-3 5-4 6-5 7-7")}};
}

Sentence de(std::string_view line) { return Sentence::from_words(text::split_whitespace(line), Side::target); }

std::vector<std::string> ids_of(const std::vector<CandidateExample>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.id());
  return out;
}

}  // namespace

TEST(Filter, BatExampleYieldsOneSieCandidate) {
  auto docs = fixture_docs();
  auto cands = filter_candidates(docs, fixture_alignments());
  std::vector<CandidateExample> bat;
  for (const auto& c : cands)
    if (c.doc_id == "bat") bat.push_back(c);
  ASSERT_EQ(bat.size(), 1u);
  EXPECT_EQ(bat[0].ref_class, PronounClass::sie);
  EXPECT_EQ(bat[0].ante_distance, 1u);
  EXPECT_EQ(bat[0].src_antecedent.surface, "bat");
  EXPECT_EQ(bat[0].tgt_antecedent.surface, "Fledermaus");
  EXPECT_EQ(bat[0].tgt_antecedent_gender, Gender::fem);
  EXPECT_EQ(bat[0].id(), "bat:1:0");
}

TEST(Filter, DoorExampleDistances) {
  auto cands = filter_candidates(fixture_docs(), fixture_alignments());
  ASSERT_GE(cands.size(), 2u);
  EXPECT_EQ(cands[0].id(), "door:1:0");
  EXPECT_EQ(cands[0].ante_distance, 1u);
  EXPECT_EQ(cands[1].id(), "door:2:2");
  EXPECT_EQ(cands[1].ante_distance, 2u);
  EXPECT_EQ(cands[1].src_antecedent.surface, "door");
  EXPECT_EQ(cands[1].tgt_antecedent.surface, "Tür");
}

TEST(Filter, ItAlignedToCopulaIsRejected) {
  auto docs = fixture_docs();
  auto al = fixture_alignments();
  // "- Is it locked ?" with it -> Ist.
  al[0][2] = Alignment::from_pharaoh("0-0 1-2 2-1 3-3 4-4");
  auto ids = ids_of(filter_candidates(docs, al));
  EXPECT_EQ(std::count(ids.begin(), ids.end(), "door:2:2"), 0);
  EXPECT_EQ(std::count(ids.begin(), ids.end(), "door:2:1"), 0);
}

TEST(Filter, ItOutsideAnyChainIsRejected) {
  auto docs = fixture_docs();
  docs[1].src_chains.clear();
  auto ids = ids_of(filter_candidates(docs, fixture_alignments()));
  EXPECT_EQ(std::count(ids.begin(), ids.end(), "bat:1:0"), 0);
}

TEST(Filter, UnalignedAntecedentHeadsAreRejected) {
  auto docs = fixture_docs();
  auto al = fixture_alignments();
  al[1][0] = Alignment::from_pharaoh("0-0 1-3 2-3 4-2 5-6");
  auto ids = ids_of(filter_candidates(docs, al));
  EXPECT_EQ(std::count(ids.begin(), ids.end(), "bat:1:0"), 0);
}

TEST(Filter, GenderDisagreementIsRejected) {
  auto docs = fixture_docs();
  docs[1].tgt_layers[0].morph[4].gender = Gender::masc;
  auto ids = ids_of(filter_candidates(docs, fixture_alignments()));
  EXPECT_EQ(std::count(ids.begin(), ids.end(), "bat:1:0"), 0);
}

TEST(Filter, CoverageMismatchIsUsageError) {
  auto al = fixture_alignments();
  al.pop_back();
  EXPECT_THROW(filter_candidates(fixture_docs(), al), UsageError);
}

TEST(Filter, SyntheticCorpusExactRecovery) {
  auto syn = synth::make(11, 400);
  ASSERT_FALSE(syn.planted.empty());
  auto cands = filter_candidates(syn.docs, syn.alignments, 3);
  std::map<std::string, const CandidateExample*> got;
  for (const auto& c : cands) {
    ASSERT_TRUE(got.emplace(c.id(), &c).second) << "duplicate id " << c.id();
    EXPECT_EQ(syn.planted.count(c.id()), 0u) << c.id() << " planted " << synth::to_string(syn.planted[c.id()]);
  }
  EXPECT_EQ(got.size(), syn.expected.size());
  std::size_t fallback = 0;
  for (const auto& [id, want] : syn.expected) {
    auto it = got.find(id);
    ASSERT_NE(it, got.end()) << "missed " << id;
    const auto& c = *it->second;
    EXPECT_EQ(c.ref_class, want.ref_class) << id;
    EXPECT_EQ(c.ante_distance, want.ante_distance) << id;
    EXPECT_EQ(c.fallback_antecedent, want.fallback_antecedent) << id;
    EXPECT_EQ(c.src_antecedent.surface, want.src_antecedent.surface) << id;
    EXPECT_EQ(c.tgt_antecedent.surface, want.tgt_antecedent.surface) << id;
    EXPECT_EQ(c.tgt_antecedent_gender, want.tgt_antecedent_gender) << id;
    fallback += c.fallback_antecedent;
  }
  EXPECT_GT(fallback, 0u);
  EXPECT_EQ(ids_of(cands), ids_of(filter_candidates(syn.docs, syn.alignments, 1)));
}

TEST(Verify, AcceptsExtractedCandidates) {
  auto syn = synth::make(5, 200);
  std::map<std::string, std::size_t> doc_index;
  for (std::size_t d = 0; d < syn.docs.size(); ++d) doc_index[syn.docs[d].doc.doc_id] = d;
  for (const auto& c : filter_candidates(syn.docs, syn.alignments)) {
    auto d = doc_index.at(c.doc_id);
    auto fails = verify_candidate(syn.docs[d], syn.alignments[d], c);
    EXPECT_TRUE(fails.empty()) << c.id() << ": " << fails.front();
  }
}

TEST(Verify, RejectsTamperedCandidates) {
  auto docs = fixture_docs();
  auto al = fixture_alignments();
  auto cands = filter_candidates(docs, al);
  const auto base = cands[0];
  ASSERT_TRUE(verify_candidate(docs[0], al[0], base).empty());
  std::vector<std::function<void(CandidateExample&)>> tamper = {
      [](auto& c) { c.src_pronoun_pos = 1; },
      [](auto& c) { c.tgt_pronoun_pos = 1; },
      [](auto& c) { c.ref_class = PronounClass::er; },
      [](auto& c) { c.ante_distance = 0; },
      [](auto& c) { c.src_antecedent.head = 3; },
      [](auto& c) { c.tgt_antecedent.head = 3; },
      [](auto& c) { c.fallback_antecedent = true; },
      [](auto& c) { c.sent_idx = 0; },
  };
  for (std::size_t k = 0; k < tamper.size(); ++k) {
    auto c = base;
    tamper[k](c);
    EXPECT_FALSE(verify_candidate(docs[0], al[0], c).empty()) << "tamper " << k;
  }
  auto broken = al[0];
  broken[1] = Alignment::from_pharaoh("0-1 1-0");
  EXPECT_FALSE(verify_candidate(docs[0], broken, base).empty());
}

TEST(Distance, Examples) {
  EXPECT_EQ(antecedent_distance(3, 3), 0u);
  EXPECT_EQ(antecedent_distance(1, 0), 1u);
  EXPECT_EQ(antecedent_distance(2, 0), 2u);
  EXPECT_THROW(antecedent_distance(0, 1), UsageError);
}

TEST(Swap, Examples) {
  EXPECT_EQ(swap_pronoun(de("Sie könnte sich in deinem Haar verfangen ."), 0, PronounClass::er).text(),
            "Er könnte sich in deinem Haar verfangen .");
  EXPECT_EQ(swap_pronoun(de("- Ist sie abgeschlossen ?"), 2, PronounClass::er).text(), "- Ist er abgeschlossen ?");
  EXPECT_EQ(swap_pronoun(de("- Ist sie abgeschlossen ?"), 2, PronounClass::sie).text(), "- Ist sie abgeschlossen ?");
  EXPECT_EQ(swap_pronoun(de("ES BRENNT"), 0, PronounClass::sie).text(), "SIE BRENNT");
  EXPECT_THROW(swap_pronoun(de("- Ist sie abgeschlossen ?"), 1, PronounClass::er), UsageError);
  EXPECT_THROW(swap_pronoun(de("Ist sie"), 5, PronounClass::er), UsageError);
}

TEST(Swap, InvolutionOverCasings) {
  for (std::string p : {"er", "sie", "es", "Er", "Sie", "Es", "ER", "SIE", "ES"})
    for (PronounClass c2 : kPronounClasses) {
      auto s = de("- Ja , " + p + " ist hier .");
      PronounClass c1 = *pronoun_class_of(p);
      EXPECT_EQ(swap_pronoun(swap_pronoun(s, 3, c2), 3, c1), s) << p;
    }
}

namespace {

// sein-/ihr- forms in the same cell order; the paradigm spelled out by hand.
const std::vector<std::pair<std::string, std::string>> kPossessives = {
    {"sein", "ihr"},     {"seine", "ihre"},   {"seinen", "ihren"}, {"seinem", "ihrem"},
    {"seiner", "ihrer"}, {"seines", "ihres"}, {"Seine", "Ihre"},   {"SEINEN", "IHREN"},
};

}  // namespace

TEST(Repair, Examples) {
  auto s = de("Es hat seine Farbe verloren .");
  std::vector<CorefChain> chains = {{"c", {Mention{0, 0, 1, 0, false, true}, Mention{0, 2, 3, 2, false, true}}}};
  auto swapped = swap_pronoun(s, 0, PronounClass::sie);
  EXPECT_EQ(repair_agreement(swapped, 0, chains, 0, Gender::fem).text(), "Sie hat ihre Farbe verloren .");
  // masc <-> neut share the stem
  EXPECT_EQ(repair_agreement(swap_pronoun(s, 0, PronounClass::er), 0, chains, 0, Gender::masc).text(),
            "Er hat seine Farbe verloren .");
  // possessive in another chain
  std::vector<CorefChain> apart = {{"a", {Mention{0, 0, 1, 0, false, true}}}, {"b", {Mention{0, 2, 3, 2, false, true}}}};
  EXPECT_EQ(repair_agreement(swapped, 0, apart, 0, Gender::fem).text(), "Sie hat seine Farbe verloren .");
}

TEST(Repair, FullParadigmBothDirections) {
  for (const auto& [masc, fem] : kPossessives) {
    auto s = de("er sah " + masc + " Hund");
    std::vector<CorefChain> chains = {{"c", {Mention{0, 0, 1, 0, false, true}, Mention{0, 2, 3, 2, false, true}}}};
    EXPECT_EQ(repair_agreement(s, 0, chains, 0, Gender::fem)[2], fem);
    auto t = de("sie sah " + fem + " Hund");
    EXPECT_EQ(repair_agreement(t, 0, chains, 0, Gender::neut)[2], masc);
    EXPECT_EQ(repair_agreement(t, 0, chains, 0, Gender::fem)[2], fem);
  }
}

TEST(Repair, OtherSentencesAndNonPossessivesUntouched) {
  auto s = de("sie und ihr Hund und seine Katze");
  std::vector<CorefChain> chains = {{"c",
                                     {Mention{0, 0, 1, 0, false, true}, Mention{0, 1, 2, 1, false, true},
                                      Mention{0, 2, 3, 2, false, true}, Mention{1, 0, 1, 0, false, true}}}};
  auto out = repair_agreement(s, 0, chains, 0, Gender::masc);
  EXPECT_EQ(out.text(), "sie und sein Hund und seine Katze");
}

TEST(Generate, VariantsAndContext) {
  auto docs = fixture_docs();
  auto cands = filter_candidates(docs, fixture_alignments());
  auto door = generate_contrastive(cands[1], docs[0]);
  EXPECT_EQ(door.ref, "- Ist sie abgeschlossen ?");
  ASSERT_EQ(door.contrastive.size(), 2u);
  EXPECT_EQ(door.contrastive[0], (ContrastiveVariant{"- Ist es abgeschlossen ?", PronounClass::es}));
  EXPECT_EQ(door.contrastive[1], (ContrastiveVariant{"- Ist er abgeschlossen ?", PronounClass::er}));
  EXPECT_EQ(door.src_context, (std::vector<std::string>{"What 's with the door ?", "It wo n't open ."}));
  EXPECT_EQ(door.ref_context, (std::vector<std::string>{"Was ist mit der Tür ?", "Sie geht nicht auf ."}));

  auto bat = generate_contrastive(cands[2], docs[1]);
  EXPECT_EQ(bat.contrastive[1].tgt, "Er könnte sich in deinem Haar verfangen .");
  EXPECT_EQ(bat.src_context.size(), 1u);
}

TEST(Generate, EsReferenceGetsErAndSieWithRepairedPossessive) {
  auto syn = synth::make(3, 300, 0.0);
  std::map<std::string, std::size_t> doc_index;
  for (std::size_t d = 0; d < syn.docs.size(); ++d) doc_index[syn.docs[d].doc.doc_id] = d;
  bool saw_repair = false;
  for (const auto& c : filter_candidates(syn.docs, syn.alignments)) {
    if (c.ref_class != PronounClass::es || c.fallback_antecedent) continue;
    auto ex = generate_contrastive(c, syn.docs[doc_index.at(c.doc_id)]);
    ASSERT_EQ(ex.contrastive.size(), 2u);
    EXPECT_EQ(ex.contrastive[0].replaced, PronounClass::er);
    EXPECT_EQ(ex.contrastive[1].replaced, PronounClass::sie);
    if (ex.ref.find("seine") != std::string::npos) {
      EXPECT_NE(ex.contrastive[1].tgt.find("ihre"), std::string::npos) << ex.contrastive[1].tgt;
      EXPECT_NE(ex.contrastive[0].tgt.find("seine"), std::string::npos);
      saw_repair = true;
    }
  }
  EXPECT_TRUE(saw_repair);
}

TEST(Sample, ZeroAndDeterminism) {
  auto syn = synth::make(8, 300);
  auto cands = filter_candidates(syn.docs, syn.alignments);
  EXPECT_TRUE(balance_sample(cands, 0, 1).empty());
  auto a = build_testset(syn.docs, cands, 20, 7, "syn");
  auto b = build_testset(syn.docs, cands, 20, 7, "syn");
  EXPECT_EQ(to_jsonl(a), to_jsonl(b));
  EXPECT_EQ(a.manifest.counts, (std::array<std::size_t, 3>{20, 20, 20}));
  auto c = build_testset(syn.docs, cands, 20, 8, "syn");
  EXPECT_NE(to_jsonl(a), to_jsonl(c));
  // Ordered by class, then by extraction order.
  for (std::size_t k = 1; k < a.examples.size(); ++k)
    EXPECT_LE(class_index(a.examples[k - 1].ref_class), class_index(a.examples[k].ref_class));
  EXPECT_NO_THROW(validate(a));
}

TEST(Sample, InsufficientNamesClassAndShortfall) {
  std::vector<CandidateExample> cands(5);
  for (std::size_t k = 0; k < 5; ++k) {
    cands[k].doc_id = "d";
    cands[k].sent_idx = k;
    cands[k].ref_class = k < 3 ? PronounClass::es : PronounClass::er;
  }
  try {
    balance_sample(cands, 2, 1);
    FAIL();
  } catch (const InsufficientCandidates& e) {
    EXPECT_EQ(e.pronoun_class(), "sie");
    EXPECT_EQ(e.shortfall(), 2u);
  }
}

TEST(Sample, RoughlyUniformInclusion) {
  std::vector<CandidateExample> cands(30);
  for (std::size_t k = 0; k < 30; ++k) {
    cands[k].doc_id = "d";
    cands[k].sent_idx = k;
    cands[k].ref_class = kPronounClasses[k % 3];
  }
  std::vector<int> hits(30, 0);
  const int trials = 4000;
  for (int t = 0; t < trials; ++t)
    for (const auto& c : balance_sample(cands, 3, static_cast<std::uint64_t>(t))) ++hits[c.sent_idx];
  // Each candidate is drawn with probability 3/10.
  for (int h : hits) EXPECT_NEAR(h / double(trials), 0.3, 0.04);
}

TEST(Stats, BucketsAndSums) {
  TestSet empty;
  auto z = testset_stats(empty);
  EXPECT_EQ(z.total(), 0u);

  TestSet ts;
  for (std::size_t d : {0, 1, 5}) {
    ContrastiveExample e;
    e.ante_distance = d;
    ts.examples.push_back(e);
  }
  auto t = testset_stats(ts);
  EXPECT_EQ(t.row_total(0), 1u);
  EXPECT_EQ(t.row_total(1), 1u);
  EXPECT_EQ(t.row_total(4), 1u);
  EXPECT_EQ(t.column_total(class_index(PronounClass::es)), 3u);
  EXPECT_EQ(t.to_tsv(),
            "distance\tes\ter\tsie\ttotal\n0\t1\t0\t0\t1\n1\t1\t0\t0\t1\n2\t0\t0\t0\t0\n3\t0\t0\t0\t0\n>3\t1\t0\t0\t1\n"
            "total\t3\t0\t0\t3\n");
}

TEST(Stats, SumsMatchOnSyntheticSet) {
  auto syn = synth::make(21, 400);
  auto ts = build_testset(syn.docs, filter_candidates(syn.docs, syn.alignments), 30, 1, "syn");
  auto t = testset_stats(ts);
  std::size_t rows = 0;
  for (std::size_t b = 0; b < 5; ++b) rows += t.row_total(b);
  EXPECT_EQ(rows, ts.examples.size());
  for (PronounClass c : kPronounClasses) EXPECT_EQ(t.column_total(class_index(c)), 30u);
}

TEST(Jsonl, RoundTrip) {
  auto syn = synth::make(2, 200);
  auto ts = build_testset(syn.docs, filter_candidates(syn.docs, syn.alignments), 10, 3, "syn");
  auto lines = to_jsonl(ts);
  auto back = parse_examples(lines);
  TestSet again{back, ts.manifest};
  EXPECT_EQ(to_jsonl(again), lines);
  auto m = parse_manifest(manifest_json(ts.manifest).dump(), "manifest");
  EXPECT_EQ(m.counts, ts.manifest.counts);
  EXPECT_EQ(m.seed, ts.manifest.seed);
  EXPECT_EQ(m.corpus_id, "syn");
}

TEST(Jsonl, SchemaViolations) {
  auto syn = synth::make(2, 100);
  auto ts = build_testset(syn.docs, filter_candidates(syn.docs, syn.alignments), 2, 3, "syn");
  auto line = to_jsonl(ts)[0];
  auto mutate = [&](auto&& fn) {
    auto j = nlohmann::json::parse(line);
    fn(j);
    return std::vector<std::string>{j.dump()};
  };
  EXPECT_THROW(parse_examples(mutate([](auto& j) { j.erase("ref"); })), ValidationError);
  EXPECT_THROW(parse_examples(mutate([](auto& j) { j["ref_pronoun"] = "ihn"; })), ValidationError);
  EXPECT_THROW(parse_examples(mutate([](auto& j) { j["ante_distance"] = -1; })), ValidationError);
  EXPECT_THROW(parse_examples(mutate([](auto& j) { j["src_context"] = "x"; })), ValidationError);
  EXPECT_THROW(parse_examples({"{"}), ValidationError);

  TestSet dup{{ts.examples[0], ts.examples[0]}, {}};
  dup.manifest.counts = class_counts(dup.examples);
  EXPECT_THROW(validate(dup), ValidationError);
  TestSet wrong = ts;
  wrong.manifest.counts[0] += 1;
  EXPECT_THROW(validate(wrong), ValidationError);
  TestSet one_variant = ts;
  one_variant.examples[0].contrastive.pop_back();
  EXPECT_THROW(validate(one_variant), ValidationError);
}

TEST(Import, ContraProFieldNaming) {
  std::string rec = R"({"ante distance": 1, "document id": "f1", "segment id": 12, "ref pronoun id": 3,
    "src segment": "It could get tangled in your hair.", "ref segment": "Sie könnte sich in deinem Haar verfangen.",
    "ref pronoun": "Sie", "src ante head": "bat", "ref ante head": "Fledermaus", "ref ante head gender": "Fem",
    "errors": [{"contrastive": "Es könnte sich in deinem Haar verfangen.", "replacement": "Es"},
               {"contrastive": "Er könnte sich in deinem Haar verfangen.", "replacement": "Er"}]})";
  std::string flat;
  for (char c : rec)
    if (c != '\n') flat += c;
  for (const auto& content : {"[" + flat + "]", flat + "\n"}) {
    auto ts = import_contrapro(content, "cp");
    ASSERT_EQ(ts.examples.size(), 1u);
    const auto& e = ts.examples[0];
    EXPECT_EQ(e.ref_class, PronounClass::sie);
    EXPECT_EQ(e.ante_distance, 1u);
    EXPECT_EQ(e.example_id(), "f1:12:3");
    EXPECT_EQ(e.tgt_antecedent_gender, Gender::fem);
    EXPECT_EQ(e.contrastive[0].replaced, PronounClass::es);
    EXPECT_EQ(ts.manifest.counts, (std::array<std::size_t, 3>{0, 0, 1}));
  }
  EXPECT_THROW(import_contrapro("[{\"ref pronoun\": \"er\"}]", "cp"), ValidationError);
}
