#pragma once

// Scorer interface and the built-in scorers. Scores are log-probabilities:
// higher is better.

#include <contrapro/annotate.hpp>
#include <contrapro/error.hpp>
#include <contrapro/random.hpp>
#include <contrapro/testgen.hpp>
#include <contrapro/text.hpp>

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace contrapro {

struct ScoreRequest {
  std::string id;
  std::vector<std::string> src_context;
  std::string src;
  std::vector<std::string> tgt_context;
  std::string tgt;
};

/// Side information the built-in scorers are allowed to see. Never sent
/// over the wire.
struct ScoreHint {
  PronounClass candidate = PronounClass::es;
  Gender gold = Gender::unknown;
};

struct ScoreResponse {
  std::string id;
  double logprob = 0.0;
};

class Scorer {
public:
  virtual ~Scorer() = default;
  virtual std::string name() const = 0;
  /// One score per request, in request order. `hints` is parallel to `requests`.
  virtual std::vector<ScoreResponse> score(const std::vector<ScoreRequest>& requests,
                                           const std::vector<ScoreHint>& hints) = 0;
};

/// Runs a scorer and checks the answer: one finite score per request id.
inline std::vector<ScoreResponse> score_batch(Scorer& scorer, const std::vector<ScoreRequest>& requests,
                                              const std::vector<ScoreHint>& hints) {
  if (requests.empty()) throw UsageError("score_batch: empty request list");
  if (hints.size() != requests.size()) throw UsageError("score_batch: hints do not match requests");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < requests.size(); ++k)
    if (!index.emplace(requests[k].id, k).second) throw UsageError("duplicate request id '" + requests[k].id + "'");

  auto got = scorer.score(requests, hints);
  std::vector<ScoreResponse> out(requests.size());
  std::vector<bool> seen(requests.size(), false);
  for (const auto& r : got) {
    auto it = index.find(r.id);
    if (it == index.end()) throw ProtocolError("response for unknown id '" + r.id + "'");
    if (seen[it->second]) throw ProtocolError("duplicate response for id '" + r.id + "'");
    if (!std::isfinite(r.logprob)) throw ProtocolError("non-finite score for id '" + r.id + "'");
    seen[it->second] = true;
    out[it->second] = r;
  }
  for (std::size_t k = 0; k < requests.size(); ++k)
    if (!seen[k]) throw ProtocolError("no response for id '" + requests[k].id + "'");
  return out;
}

namespace detail {

template <class Fn>
class FunctionScorer : public Scorer {
public:
  FunctionScorer(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  std::vector<ScoreResponse> score(const std::vector<ScoreRequest>& requests,
                                   const std::vector<ScoreHint>& hints) override {
    std::vector<ScoreResponse> out;
    out.reserve(requests.size());
    for (std::size_t k = 0; k < requests.size(); ++k) out.push_back({requests[k].id, fn_(requests[k], hints[k])});
    return out;
  }

private:
  std::string name_;
  Fn fn_;
};

template <class Fn>
std::unique_ptr<Scorer> function_scorer(std::string name, Fn fn) {
  return std::make_unique<FunctionScorer<Fn>>(std::move(name), std::move(fn));
}

}  // namespace detail

inline std::unique_ptr<Scorer> echo_scorer() {
  return detail::function_scorer("echo", [](const ScoreRequest&, const ScoreHint&) { return 0.0; });
}

/// 0 when the candidate pronoun matches the gold antecedent gender, -1 otherwise.
inline std::unique_ptr<Scorer> oracle_scorer() {
  return detail::function_scorer("oracle", [](const ScoreRequest&, const ScoreHint& h) {
    return class_gender(h.candidate) == h.gold ? 0.0 : -1.0;
  });
}

inline std::unique_ptr<Scorer> anti_oracle_scorer() {
  return detail::function_scorer("anti_oracle", [](const ScoreRequest&, const ScoreHint& h) {
    return class_gender(h.candidate) == h.gold ? -1.0 : 0.0;
  });
}

/// Class priors of it -> es/er/sie in the reference corpus, indexed by PronounClass.
using ClassPrior = std::array<double, 3>;

inline constexpr ClassPrior kDefaultPrior = {0.334, 0.058, 0.084};

/// Parses "es=0.334,er=0.058,sie=0.084"; every class must be given once.
inline ClassPrior parse_class_prior(std::string_view text_in) {
  ClassPrior p{};
  std::array<bool, 3> given{};
  std::string s(text_in);
  for (char& c : s)
    if (c == ',') c = ' ';
  for (const auto& item : text::split_whitespace(s)) {
    auto eq = item.find('=');
    auto cls = eq == std::string::npos ? std::nullopt : pronoun_class_of(item.substr(0, eq));
    if (!cls) throw UsageError("prior: expected class=probability, got '" + item + "'");
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("prior: bad probability in '" + item + "'");
    }
    if (!(v > 0 && v <= 1)) throw UsageError("prior: probability out of (0, 1] in '" + item + "'");
    if (given[class_index(*cls)]) throw UsageError("prior: class given twice in '" + item + "'");
    given[class_index(*cls)] = true;
    p[class_index(*cls)] = v;
  }
  for (PronounClass c : kPronounClasses)
    if (!given[class_index(c)]) throw UsageError("prior: missing class '" + std::string(to_string(c)) + "'");
  return p;
}

inline std::unique_ptr<Scorer> prior_scorer(ClassPrior prior = kDefaultPrior) {
  return detail::function_scorer("prior", [prior](const ScoreRequest&, const ScoreHint& h) {
    return std::log(prior[class_index(h.candidate)]);
  });
}

/// Uniform in [0, 1), a pure function of (seed, request id).
inline std::unique_ptr<Scorer> random_scorer(std::uint64_t seed) {
  return detail::function_scorer("random", [seed](const ScoreRequest& r, const ScoreHint&) {
    return unit_interval(splitmix64(seed ^ text::fnv1a64(r.id)));
  });
}

struct NgramOptions {
  std::size_t order = 3;
  double k = 0.1;
  double lambda = 0.7;
};

/// Interpolated n-gram model with add-k smoothing at every order:
///   p_n(w | h) = lambda * (c(h w) + k) / (c(h) + k V) + (1 - lambda) * p_{n-1}(w | h')
/// with p_1(w) = (c(w) + k) / (N + k V). V counts </s> and one unknown word.
class NgramModel {
public:
  using Options = NgramOptions;

  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";

  explicit NgramModel(Options opt = {}) : opt_(opt), counts_(opt.order), context_counts_(opt.order) {
    if (opt.order == 0) throw UsageError("ngram order must be positive");
    if (!(opt.k > 0)) throw UsageError("ngram k must be positive");
    if (!(opt.lambda >= 0 && opt.lambda <= 1)) throw UsageError("ngram lambda must be in [0, 1]");
  }

  void add_sentence(const std::vector<std::string>& words) {
    auto padded = pad(words);
    for (std::size_t i = opt_.order - 1; i < padded.size(); ++i) {
      vocab_.insert(padded[i]);
      for (std::size_t n = 1; n <= opt_.order; ++n) {
        ++counts_[n - 1][key(padded, i + 1 - n, n)];
        ++context_counts_[n - 1][key(padded, i + 1 - n, n - 1)];
      }
    }
  }

  std::size_t vocab_size() const { return vocab_.size() + 1; }

  /// Probability of `w` after the last order-1 words of `history`.
  double prob(const std::vector<std::string>& history, const std::string& w) const {
    const double V = static_cast<double>(vocab_size());
    std::vector<std::string> ctx(history.end() - std::min(history.size(), opt_.order - 1), history.end());
    double p = 0;
    for (std::size_t n = 1; n <= opt_.order; ++n) {
      std::vector<std::string> gram(ctx.end() - std::min(ctx.size(), n - 1), ctx.end());
      if (gram.size() < n - 1) break;
      const double ch = lookup(context_counts_[n - 1], text::join(gram, kSep));
      gram.push_back(w);
      const double c = lookup(counts_[n - 1], text::join(gram, kSep));
      const double own = (c + opt_.k) / (ch + opt_.k * V);
      p = n == 1 ? own : opt_.lambda * own + (1 - opt_.lambda) * p;
    }
    return p;
  }

  double sentence_logprob(const std::vector<std::string>& words) const {
    auto padded = pad(words);
    double lp = 0;
    for (std::size_t i = opt_.order - 1; i < padded.size(); ++i) {
      std::vector<std::string> hist(padded.begin() + static_cast<std::ptrdiff_t>(i + 1 - opt_.order),
                                    padded.begin() + static_cast<std::ptrdiff_t>(i));
      lp += std::log(prob(hist, padded[i]));
    }
    return lp;
  }

  const Options& options() const { return opt_; }

private:
  static constexpr std::string_view kSep = "\x1f";

  std::vector<std::string> pad(const std::vector<std::string>& words) const {
    std::vector<std::string> p(opt_.order - 1, std::string(kBos));
    p.insert(p.end(), words.begin(), words.end());
    p.emplace_back(kEos);
    return p;
  }

  static std::string key(const std::vector<std::string>& p, std::size_t from, std::size_t n) {
    std::string k;
    for (std::size_t t = 0; t < n; ++t) {
      if (t) k += kSep;
      k += p[from + t];
    }
    return k;
  }

  static double lookup(const std::unordered_map<std::string, std::size_t>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : static_cast<double>(it->second);
  }

  Options opt_;
  std::vector<std::unordered_map<std::string, std::size_t>> counts_;
  std::vector<std::unordered_map<std::string, std::size_t>> context_counts_;
  std::set<std::string> vocab_;
};

/// Trains on a whitespace-tokenized target-side text, one sentence per line.
inline NgramModel train_ngram(const std::vector<std::string>& lines, NgramOptions opt = {}) {
  NgramModel m(opt);
  for (const auto& l : lines) m.add_sentence(text::split_whitespace(l));
  return m;
}

/// Scores the target sentence alone.
inline std::unique_ptr<Scorer> ngram_scorer(std::shared_ptr<const NgramModel> model) {
  if (!model) throw UsageError("ngram scorer needs a model");
  return detail::function_scorer("ngram", [model](const ScoreRequest& r, const ScoreHint&) {
    return model->sentence_logprob(text::split_whitespace(r.tgt));
  });
}

}  // namespace contrapro
