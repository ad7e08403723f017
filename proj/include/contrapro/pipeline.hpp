#pragma once

// End-to-end stages behind the command-line tool. Each run_* function reads
// its inputs, writes its reports under cfg.out (when set) and returns the
// in-memory result.

#include <contrapro/align.hpp>
#include <contrapro/alignment.hpp>
#include <contrapro/annotate.hpp>
#include <contrapro/bleu.hpp>
#include <contrapro/corpus.hpp>
#include <contrapro/eval.hpp>
#include <contrapro/process.hpp>
#include <contrapro/testgen.hpp>

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#ifndef CONTRAPRO_VERSION
#define CONTRAPRO_VERSION "unknown"
#endif

namespace contrapro {

/// A stage failed; `exit_code` is 2 for bad input or usage, 1 otherwise.
class StageError : public Error {
public:
  StageError(std::string stage, const std::string& what, int exit_code)
      : Error(stage + ": " + what), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return exit_code_; }

private:
  std::string stage_;
  int exit_code_;
};

/// Runs `fn`, tagging any toolkit error with the stage name.
template <class Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const UsageError& e) {
    throw StageError(name, e.what(), 2);
  } catch (const ValidationError& e) {
    throw StageError(name, e.what(), 2);
  } catch (const StructuralError& e) {
    throw StageError(name, e.what(), 2);
  } catch (const IoError& e) {
    throw StageError(name, e.what(), 2);
  } catch (const Error& e) {
    throw StageError(name, e.what(), 1);
  }
}

struct CorpusInput {
  std::string documents;  // JSONL documents
  std::string src;        // or line-aligned plaintext
  std::string tgt;
  std::string boundaries;
  bool pretokenized = false;
  std::string corpus_id;
};

struct PipelineConfig {
  CorpusInput corpus;
  std::string annotations;  // empty: built-in heuristic annotator
  std::string lexicon;      // gender lexicon for the heuristic annotator
  std::string alignments;   // empty: train the aligner
  std::string out;
  std::size_t n_per_class = 4000;
  std::uint64_t seed = 1;
  std::optional<std::size_t> context_depth;
  AlignerConfig aligner;
  std::size_t jobs = 1;

  std::string testset;
  std::string manifest;
  std::string scorer = "oracle";
  std::string scorer_command;
  std::optional<ScoreKind> score_kind;
  std::string prior;
  std::string ngram_model;
  NgramOptions ngram;
  double timeout = 0;
  bool transcript = false;
};

inline ParallelCorpus load_corpus(const CorpusInput& in) {
  LoadOptions opts{in.pretokenized, in.corpus_id};
  if (!in.documents.empty()) {
    if (!in.src.empty() || !in.tgt.empty()) throw UsageError("give either a documents file or src/tgt files, not both");
    return load_jsonl_documents(in.documents, opts);
  }
  if (in.src.empty() || in.tgt.empty()) throw UsageError("no corpus: give --documents, or --src and --tgt");
  std::optional<std::vector<std::size_t>> bounds;
  if (!in.boundaries.empty()) bounds = read_boundaries(in.boundaries);
  return load_parallel_documents(in.src, in.tgt, bounds, opts);
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

inline nlohmann::ordered_json corpus_json(const CorpusInput& c) {
  nlohmann::ordered_json j;
  j["documents"] = c.documents;
  j["src"] = c.src;
  j["tgt"] = c.tgt;
  j["boundaries"] = c.boundaries;
  j["pretokenized"] = c.pretokenized;
  j["corpus_id"] = c.corpus_id;
  return j;
}

inline nlohmann::ordered_json aligner_json(const AlignerConfig& a) {
  nlohmann::ordered_json j;
  j["ibm1_iterations"] = a.ibm1_iterations;
  j["diag_iterations"] = a.diag_iterations;
  j["tension"] = a.tension;
  j["null_prob"] = a.null_prob;
  j["heuristic"] = to_string(a.heuristic);
  return j;
}

inline std::string out_path(const PipelineConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

inline void make_out_dir(const PipelineConfig& cfg) {
  if (cfg.out.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out + "': " + ec.message());
}

}  // namespace detail

/// The settings that influence `command`'s outputs. The output directory
/// and worker count are left out: neither changes what is written.
inline nlohmann::ordered_json describe_config(const PipelineConfig& cfg, std::string_view command) {
  nlohmann::ordered_json j;
  const bool uses_corpus = command == "align" || command == "extract" || command == "stats";
  if (uses_corpus) j["corpus"] = detail::corpus_json(cfg.corpus);
  if (command == "align" || ((command == "extract" || command == "stats") && cfg.alignments.empty()))
    j["aligner"] = detail::aligner_json(cfg.aligner);
  if (command == "extract" || command == "stats") j["alignments"] = cfg.alignments;
  if (command == "extract") {
    j["annotations"] = cfg.annotations;
    j["lexicon"] = cfg.lexicon;
    j["n_per_class"] = cfg.n_per_class;
    j["seed"] = cfg.seed;
  }
  if (command == "evaluate") {
    j["testset"] = cfg.testset;
    j["manifest"] = cfg.manifest;
    j["scorer"] = cfg.scorer;
    if (cfg.scorer == "process") {
      j["scorer_command"] = cfg.scorer_command;
      j["score_kind"] = cfg.score_kind ? nlohmann::ordered_json(to_string(*cfg.score_kind)) : nullptr;
      j["timeout"] = cfg.timeout;
    }
    if (cfg.scorer == "prior") j["prior"] = cfg.prior;
    if (cfg.scorer == "random") j["seed"] = cfg.seed;
    if (cfg.scorer == "ngram") {
      j["ngram_model"] = cfg.ngram_model;
      j["ngram_order"] = cfg.ngram.order;
      j["ngram_k"] = cfg.ngram.k;
      j["ngram_lambda"] = cfg.ngram.lambda;
    }
    j["context_depth"] = cfg.context_depth ? nlohmann::ordered_json(*cfg.context_depth) : nullptr;
  }
  return j;
}

/// Versions, effective configuration and its hash, and the files written.
inline nlohmann::ordered_json run_manifest(const PipelineConfig& cfg, std::string_view command,
                                           const std::vector<std::string>& outputs) {
  nlohmann::ordered_json j;
  j["tool"] = "contrapro";
  j["command"] = command;
  j["versions"]["contrapro"] = CONTRAPRO_VERSION;
  j["versions"]["scorer_protocol"] = kProtocolVersion;
  j["versions"]["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                   std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                   std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  auto config = describe_config(cfg, command);
  j["config"] = config;
  j["config_hash"] = detail::hex64(text::fnv1a64(config.dump()));
  j["outputs"] = outputs;
  return j;
}

inline void write_run_manifest(const PipelineConfig& cfg, std::string_view command, std::vector<std::string> outputs) {
  if (cfg.out.empty()) return;
  outputs.push_back("run_manifest.json");
  text::write_file(detail::out_path(cfg, "run_manifest.json"), run_manifest(cfg, command, outputs).dump(2) + "\n");
}

inline CorpusAlignment obtain_alignments(const PipelineConfig& cfg, const ParallelCorpus& corpus) {
  if (!cfg.alignments.empty())
    return stage("align", [&] { return parse_corpus_alignment(text::read_lines(cfg.alignments), corpus); });
  return stage("align", [&] {
    auto a = cfg.aligner;
    a.jobs = cfg.jobs;
    return align_corpus(corpus, a);
  });
}

struct AlignResult {
  CorpusAlignment alignments;
  TrainedAligner model;
};

/// Trains both directions and writes alignments.txt plus lex.fwd.tsv / lex.rev.tsv.
inline AlignResult run_align(const PipelineConfig& cfg) {
  auto corpus = stage("corpus", [&] { return load_corpus(cfg.corpus); });
  AlignResult r;
  stage("align", [&] {
    auto a = cfg.aligner;
    a.jobs = cfg.jobs;
    r.model = train_aligner(corpus, a);
    r.alignments = align_corpus(corpus, r.model, a.heuristic);
  });
  stage("write", [&] {
    if (cfg.out.empty()) return;
    detail::make_out_dir(cfg);
    std::string lines;
    for (const auto& l : to_pharaoh_lines(r.alignments)) lines += l + "\n";
    text::write_file(detail::out_path(cfg, "alignments.txt"), lines);
    for (auto [name, model] : {std::pair{"lex.fwd.tsv", &r.model.fwd}, std::pair{"lex.rev.tsv", &r.model.rev}}) {
      std::ostringstream ss;
      model->lex.write_tsv(ss);
      text::write_file(detail::out_path(cfg, name), ss.str());
    }
    write_run_manifest(cfg, "align", {"alignments.txt", "lex.fwd.tsv", "lex.rev.tsv"});
  });
  return r;
}

inline std::string alignment_stats_tsv(const AlignmentStats& st) {
  std::string s = "source\ttarget\tcount\tprobability\n";
  char buf[64];
  for (const auto& r : st.rows) {
    std::snprintf(buf, sizeof buf, "\t%.6g\t%.3f\n", r.count, r.probability);
    s += st.source_word + "\t" + r.target + buf;
  }
  return s + st.source_word + "\t(occurrences)\t" + std::to_string(st.occurrences) + "\t-\n";
}

/// Where `word` is aligned to, in the shape of a frequency/probability table.
inline AlignmentStats run_alignment_stats(const PipelineConfig& cfg, const std::string& word) {
  auto corpus = stage("corpus", [&] { return load_corpus(cfg.corpus); });
  auto al = obtain_alignments(cfg, corpus);
  auto st = stage("stats", [&] { return alignment_stats(corpus, al, word); });
  stage("write", [&] {
    if (cfg.out.empty()) return;
    detail::make_out_dir(cfg);
    text::write_file(detail::out_path(cfg, "alignment_stats.tsv"), alignment_stats_tsv(st));
    write_run_manifest(cfg, "stats", {"alignment_stats.tsv"});
  });
  return st;
}

struct ExtractResult {
  TestSet testset;
  DistanceTable stats;
  std::size_t candidates = 0;
};

inline void write_testset_outputs(const PipelineConfig& cfg, const TestSet& ts, const DistanceTable& st,
                                  std::string_view command) {
  if (cfg.out.empty()) return;
  detail::make_out_dir(cfg);
  write_testset(ts, detail::out_path(cfg, "testset.jsonl"), detail::out_path(cfg, "manifest.json"));
  text::write_file(detail::out_path(cfg, "stats.tsv"), st.to_tsv());
  text::write_file(detail::out_path(cfg, "stats.md"), st.to_markdown());
  write_run_manifest(cfg, command, {"testset.jsonl", "manifest.json", "stats.tsv", "stats.md"});
}

/// corpus -> annotations -> alignments -> candidates -> balanced contrastive set.
inline ExtractResult run_extract(const PipelineConfig& cfg) {
  auto corpus = stage("corpus", [&] { return load_corpus(cfg.corpus); });
  auto docs = stage("annotate", [&] {
    if (!cfg.annotations.empty()) return load_annotations(corpus, cfg.annotations);
    auto lex = cfg.lexicon.empty() ? default_gender_lexicon() : read_gender_lexicon(cfg.lexicon);
    return heuristic_annotate(corpus, lex, cfg.jobs);
  });
  auto al = obtain_alignments(cfg, corpus);
  ExtractResult r;
  auto cands = stage("filter", [&] { return filter_candidates(docs, al, cfg.jobs); });
  r.candidates = cands.size();
  r.testset = stage("sample", [&] {
    return build_testset(docs, cands, cfg.n_per_class, cfg.seed,
                         corpus.corpus_id.empty() ? std::string("corpus") : corpus.corpus_id);
  });
  r.stats = testset_stats(r.testset);
  stage("write", [&] { write_testset_outputs(cfg, r.testset, r.stats, "extract"); });
  return r;
}

/// Converts a published ContraPro file and writes it like an extracted set.
inline ExtractResult run_import(const PipelineConfig& cfg, const std::string& input) {
  ExtractResult r;
  r.testset = stage("import", [&] {
    return import_contrapro(text::read_file(input), cfg.corpus.corpus_id.empty() ? input : cfg.corpus.corpus_id);
  });
  r.candidates = r.testset.examples.size();
  r.stats = testset_stats(r.testset);
  stage("write", [&] { write_testset_outputs(cfg, r.testset, r.stats, "import-contrapro"); });
  return r;
}

inline ScorerFactory make_scorer_factory(const PipelineConfig& cfg) {
  const auto& kind = cfg.scorer;
  if (kind == "oracle") return [](std::size_t) { return oracle_scorer(); };
  if (kind == "anti_oracle") return [](std::size_t) { return anti_oracle_scorer(); };
  if (kind == "echo") return [](std::size_t) { return echo_scorer(); };
  if (kind == "random") return [seed = cfg.seed](std::size_t) { return random_scorer(seed); };
  if (kind == "prior") {
    ClassPrior p = cfg.prior.empty() ? kDefaultPrior : parse_class_prior(cfg.prior);
    return [p](std::size_t) { return prior_scorer(p); };
  }
  if (kind == "ngram") {
    if (cfg.ngram_model.empty()) throw UsageError("the ngram scorer needs --ngram-model (a tokenized target-side text)");
    auto model = std::make_shared<const NgramModel>(train_ngram(text::read_lines(cfg.ngram_model), cfg.ngram));
    return [model](std::size_t) { return ngram_scorer(model); };
  }
  if (kind == "process") {
    if (cfg.scorer_command.empty()) throw UsageError("the process scorer needs --scorer-command");
    auto out = cfg.out;
    auto transcript = cfg.transcript;
    ProcessOptions base{cfg.timeout, "", cfg.score_kind};
    auto command = cfg.scorer_command;
    return [=](std::size_t shard) {
      auto opt = base;
      if (transcript && !out.empty()) {
        opt.transcript_path = (std::filesystem::path(out) / ("transcript." + std::to_string(shard) + ".txt")).string();
        std::remove(opt.transcript_path.c_str());
      }
      return std::make_unique<ProcessScorer>(command, opt);
    };
  }
  throw UsageError("unknown scorer '" + kind + "' (oracle, anti_oracle, echo, prior, ngram, random, process)");
}

/// Scores a test set and writes report.json, report.md and accuracy_*.tsv.
inline EvaluationReport run_evaluate(const PipelineConfig& cfg) {
  auto ts = stage("testset", [&] {
    if (cfg.testset.empty()) throw UsageError("no test set: give --testset");
    return read_testset(cfg.testset, cfg.manifest.empty() ? std::nullopt : std::optional<std::string>(cfg.manifest));
  });
  if (ts.examples.empty()) throw StageError("testset", "test set '" + cfg.testset + "' is empty", 2);
  auto factory = stage("scorer", [&] { return make_scorer_factory(cfg); });
  stage("scorer", [&] { detail::make_out_dir(cfg); });
  auto decisions = stage("score", [&] { return evaluate(ts, factory, {cfg.jobs, cfg.context_depth}); });
  auto report = stage("aggregate", [&] {
    return aggregate(decisions, ts, cfg.scorer == "process" ? cfg.scorer_command : cfg.scorer);
  });
  stage("write", [&] {
    if (cfg.out.empty()) return;
    text::write_file(detail::out_path(cfg, "report.json"), report_json(report, ts).dump(2) + "\n");
    text::write_file(detail::out_path(cfg, "report.md"), report_markdown(report));
    text::write_file(detail::out_path(cfg, "accuracy_pronoun.tsv"), pronoun_tsv(report));
    text::write_file(detail::out_path(cfg, "accuracy_location.tsv"), location_tsv(report));
    text::write_file(detail::out_path(cfg, "accuracy_distance.tsv"), distance_tsv(report));
    write_run_manifest(cfg, "evaluate",
                       {"report.json", "report.md", "accuracy_pronoun.tsv", "accuracy_location.tsv",
                        "accuracy_distance.tsv"});
  });
  return report;
}

struct BleuResult {
  double cased = 0;
  double uncased = 0;
};

inline BleuResult run_bleu(const std::string& hyp_path, const std::string& ref_path) {
  return stage("bleu", [&] {
    auto hyp = text::read_lines(hyp_path);
    auto ref = text::read_lines(ref_path);
    return BleuResult{compute_bleu(hyp, ref, true), compute_bleu(hyp, ref, false)};
  });
}

}  // namespace contrapro
