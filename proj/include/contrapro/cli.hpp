#pragma once

// The `contrapro` command line. Every subcommand takes --config FILE with
// key = value lines; keys are the long flag names (dashes or underscores)
// and flags given on the command line win over the file.

#include <contrapro/pipeline.hpp>
#include <contrapro/tokenize.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace contrapro {

namespace detail {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

inline std::vector<ConfigEntry> read_config_file(const std::string& path) {
  std::vector<ConfigEntry> out;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view l = lines[i];
    auto trim = [](std::string_view s) {
      while (!s.empty() && text::is_space(s.front())) s.remove_prefix(1);
      while (!s.empty() && text::is_space(s.back())) s.remove_suffix(1);
      return s;
    };
    l = trim(l);
    if (l.empty() || l.front() == '#' || l.front() == '[') continue;
    auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("config " + path + ":" + std::to_string(i + 1) + ": expected key = value");
    std::string key(trim(l.substr(0, eq)));
    std::string_view value = trim(l.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    } else if (auto hash = value.find(" #"); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    std::replace(key.begin(), key.end(), '_', '-');
    out.push_back({key, std::string(value), i + 1});
  }
  return out;
}

/// Value of --config among `args`, if given.
inline std::string find_config_path(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

struct CliState {
  PipelineConfig cfg;
  std::string heuristic = "grow-diag-final-and";
  std::string score_kind;
  std::size_t context_depth = 0;
  std::string word = "it";
  std::string hyp, ref, input, output, lang = "en";
  std::string config;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* context_opt = nullptr;
};

inline void add_common(CLI::App* sub, CliState& s) {
  sub->add_option("--config", s.config, "key = value file; command-line flags take precedence");
}

inline void add_corpus_options(CLI::App* sub, CliState& s) {
  auto& c = s.cfg.corpus;
  sub->add_option("--documents", c.documents, "JSONL documents (doc_id, src, tgt)");
  sub->add_option("--src", c.src, "source side, one sentence per line");
  sub->add_option("--tgt", c.tgt, "target side, one sentence per line");
  sub->add_option("--boundaries", c.boundaries, "document end indices for --src/--tgt");
  sub->add_flag("--pretokenized", c.pretokenized, "input is already tokenized");
  sub->add_option("--corpus-id", c.corpus_id, "corpus name recorded in the manifest");
}

inline void add_aligner_options(CLI::App* sub, CliState& s) {
  auto& a = s.cfg.aligner;
  sub->add_option("--ibm1-iterations", a.ibm1_iterations, "IBM Model 1 EM iterations")->capture_default_str();
  sub->add_option("--diag-iterations", a.diag_iterations, "diagonal-model EM iterations")->capture_default_str();
  sub->add_option("--tension", a.tension, "diagonal tension")->capture_default_str();
  sub->add_option("--null-prob", a.null_prob, "null alignment probability")->capture_default_str();
  sub->add_option("--heuristic", s.heuristic, "intersection, union or grow-diag-final-and")->capture_default_str();
}

inline void add_jobs_out(CLI::App* sub, CliState& s) {
  sub->add_option("--jobs", s.cfg.jobs, "worker threads (default: available cores)")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--out", s.cfg.out, "output directory");
}

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Seed precedence: --seed (or config) > CONTRAPRO_SEED > 1.
inline void resolve_seed(CliState& s) {
  if (s.seed_opt && s.seed_opt->count() > 0) return;
  const char* env = std::getenv("CONTRAPRO_SEED");
  if (!env || !*env) return;
  std::string v = env;
  if (!std::all_of(v.begin(), v.end(), text::is_ascii_digit) || v.size() > 19)
    throw StageError("config", "CONTRAPRO_SEED is not a non-negative integer: '" + v + "'", 2);
  s.cfg.seed = std::stoull(v);
}

inline void resolve_common(CliState& s) {
  s.cfg.aligner.heuristic = stage("config", [&] { return parse_symmetrization(s.heuristic); });
  if (!s.score_kind.empty()) s.cfg.score_kind = stage("config", [&] { return parse_score_kind(s.score_kind); });
  if (s.context_opt && s.context_opt->count() > 0) s.cfg.context_depth = s.context_depth;
  resolve_seed(s);
}

}  // namespace detail

/// Runs the tool on `args` (without the program name). Returns the exit
/// status: 0 success, 2 bad input or usage, 1 scorer or sampling failure.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  detail::CliState s;
  s.cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  CLI::App app{"Contrastive pronoun test sets: build from parallel corpora, evaluate scorers.", "contrapro"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CONTRAPRO_VERSION));

  auto* tok = app.add_subcommand("tokenize", "tokenize raw text, one sentence per line");
  detail::add_common(tok, s);
  tok->add_option("--input", s.input, "input text")->required();
  tok->add_option("--lang", s.lang, "en or de")->check(CLI::IsMember({"en", "de"}))->capture_default_str();
  tok->add_option("--output", s.output, "output file (default: stdout)");

  auto* align = app.add_subcommand("align", "train the aligner and write symmetrized alignments");
  detail::add_common(align, s);
  detail::add_corpus_options(align, s);
  detail::add_aligner_options(align, s);
  detail::add_jobs_out(align, s);

  auto* stats = app.add_subcommand("stats", "alignment statistics for a source word, or test-set statistics");
  detail::add_common(stats, s);
  detail::add_corpus_options(stats, s);
  detail::add_aligner_options(stats, s);
  stats->add_option("--alignments", s.cfg.alignments, "Pharaoh alignments (default: train)");
  stats->add_option("--word", s.word, "source word to report")->capture_default_str();
  stats->add_option("--testset", s.cfg.testset, "report class x distance counts of this test set instead");
  stats->add_option("--manifest", s.cfg.manifest, "manifest of --testset");
  detail::add_jobs_out(stats, s);

  auto* extract = app.add_subcommand("extract", "build a balanced contrastive test set");
  detail::add_common(extract, s);
  detail::add_corpus_options(extract, s);
  detail::add_aligner_options(extract, s);
  extract->add_option("--annotations", s.cfg.annotations, "coreference/morphology JSONL (default: heuristic)");
  extract->add_option("--lexicon", s.cfg.lexicon, "noun gender TSV for the heuristic annotator");
  extract->add_option("--alignments", s.cfg.alignments, "Pharaoh alignments (default: train)");
  extract->add_option("--n-per-class", s.cfg.n_per_class, "examples per reference pronoun")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  s.seed_opt = extract->add_option("--seed", s.cfg.seed, "sampling seed (default: CONTRAPRO_SEED, else 1)");
  detail::add_jobs_out(extract, s);

  auto* eval = app.add_subcommand("evaluate", "score a test set and report accuracy");
  detail::add_common(eval, s);
  eval->add_option("--testset", s.cfg.testset, "test set JSONL")->required();
  eval->add_option("--manifest", s.cfg.manifest, "test set manifest");
  eval->add_option("--scorer", s.cfg.scorer, "oracle, anti_oracle, echo, prior, ngram, random or process")
      ->capture_default_str();
  eval->add_option("--scorer-command", s.cfg.scorer_command, "shell command of a process scorer");
  eval->add_option("--score-kind", s.score_kind, "expected score kind of the process scorer: logprob or nll");
  eval->add_option("--timeout", s.cfg.timeout, "seconds to wait for each scorer reply (0: no limit)")
      ->capture_default_str();
  eval->add_flag("--transcript", s.cfg.transcript, "write the wire transcript of each shard to --out");
  eval->add_option("--prior", s.cfg.prior, "class prior es=P,er=P,sie=P for the prior scorer");
  eval->add_option("--ngram-model", s.cfg.ngram_model, "tokenized target text to train the ngram scorer");
  eval->add_option("--ngram-order", s.cfg.ngram.order, "ngram order")->capture_default_str();
  eval->add_option("--ngram-k", s.cfg.ngram.k, "add-k constant")->capture_default_str();
  eval->add_option("--ngram-lambda", s.cfg.ngram.lambda, "interpolation weight")->capture_default_str();
  s.seed_opt = nullptr;
  auto* eval_seed = eval->add_option("--seed", s.cfg.seed, "seed of the random scorer");
  s.context_opt = eval->add_option("--context-depth", s.context_depth, "context sentences passed to the scorer");
  detail::add_jobs_out(eval, s);

  auto* bleu = app.add_subcommand("bleu", "corpus BLEU, cased and uncased");
  detail::add_common(bleu, s);
  bleu->add_option("--hyp", s.hyp, "hypothesis file")->required();
  bleu->add_option("--ref", s.ref, "reference file")->required();

  auto* imp = app.add_subcommand("import-contrapro", "convert a published ContraPro JSON file");
  detail::add_common(imp, s);
  imp->add_option("--input", s.input, "ContraPro JSON")->required();
  imp->add_option("--corpus-id", s.cfg.corpus.corpus_id, "corpus name recorded in the manifest");
  imp->add_option("--out", s.cfg.out, "output directory")->required();

  // Config entries go right after the subcommand token, so later
  // command-line flags override them under TakeLast.
  std::string sub_name;
  try {
    auto cfg_path = detail::find_config_path(args);
    auto sub_pos = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
    if (sub_pos != args.end()) sub_name = *sub_pos;
    if (!cfg_path.empty() && sub_pos != args.end()) {
      CLI::App* sub = nullptr;
      try {
        sub = app.get_subcommand(*sub_pos);
      } catch (const CLI::OptionNotFound&) {
      }
      if (sub) {
        std::vector<std::string> extra;
        for (const auto& e : detail::read_config_file(cfg_path)) {
          if (e.key == "config" || !sub->get_option_no_throw("--" + e.key))
            throw UsageError("config " + cfg_path + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                             "' for " + sub->get_name());
          extra.push_back("--" + e.key + "=" + e.value);
        }
        args.insert(sub_pos + 1, extra.begin(), extra.end());
      }
    }
  } catch (const Error& e) {
    err << "contrapro" << (sub_name.empty() ? "" : " " + sub_name) << ": config: " << e.what() << "\n";
    return 2;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  const std::string prefix = "contrapro " + sub_name + ": ";
  try {
    if (*eval) s.seed_opt = eval_seed;
    else if (*extract) s.seed_opt = extract->get_option("--seed");
    detail::resolve_common(s);
    auto& cfg = s.cfg;

    if (*tok) {
      stage("tokenize", [&] {
        const Side side = s.lang == "en" ? Side::source : Side::target;
        std::string result;
        for (const auto& line : text::read_lines(s.input)) {
          auto words = tokenize_words(line, side);
          for (std::size_t k = 0; k < words.size(); ++k) result += (k ? " " : "") + words[k];
          result += "\n";
        }
        if (s.output.empty()) out << result;
        else text::write_file(s.output, result);
      });
    } else if (*align) {
      auto r = run_align(cfg);
      std::size_t pairs = 0, links = 0;
      for (const auto& d : r.alignments)
        for (const auto& a : d) {
          ++pairs;
          links += a.links.size();
        }
      out << "aligned " << pairs << " sentence pairs, " << links << " links\n";
    } else if (*stats) {
      if (!cfg.testset.empty()) {
        auto ts = stage("testset", [&] {
          return read_testset(cfg.testset, cfg.manifest.empty() ? std::nullopt : std::optional<std::string>(cfg.manifest));
        });
        out << testset_stats(ts).to_tsv();
      } else {
        out << alignment_stats_tsv(run_alignment_stats(cfg, s.word));
      }
    } else if (*extract) {
      auto r = run_extract(cfg);
      out << r.candidates << " candidates, " << r.testset.examples.size() << " examples (seed " << cfg.seed << ")\n";
      out << r.stats.to_tsv();
    } else if (*eval) {
      auto r = run_evaluate(cfg);
      out << pronoun_tsv(r);
      out << "total accuracy " << format_accuracy(r.total) << "\n";
    } else if (*bleu) {
      auto r = run_bleu(s.hyp, s.ref);
      out << "BLEU cased " << detail::fmt2(r.cased) << "\n";
      out << "BLEU uncased " << detail::fmt2(r.uncased) << "\n";
    } else if (*imp) {
      auto r = run_import(cfg, s.input);
      out << "imported " << r.testset.examples.size() << " examples\n";
      out << r.stats.to_tsv();
    }
    return 0;
  } catch (const StageError& e) {
    err << prefix << e.what() << "\n";
    return e.exit_code();
  } catch (const InsufficientCandidates& e) {
    err << prefix << "sample: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << prefix << e.what() << "\n";
    return 1;
  }
}

}  // namespace contrapro
