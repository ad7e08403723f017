#pragma once

// Small aligner fixtures and a brute-force posterior oracle.

#include <contrapro/align.hpp>
#include <contrapro/corpus.hpp>

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace align_oracle {

using namespace contrapro;

inline LoadOptions pretokenized() {
  LoadOptions o;
  o.pretokenized = true;
  return o;
}

inline ParallelCorpus corpus_of(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<std::string> s;
  std::vector<std::string> t;
  for (const auto& [a, b] : pairs) {
    s.push_back(a);
    t.push_back(b);
  }
  return build_parallel_corpus(s, t, std::vector<std::size_t>{pairs.size()}, pretokenized());
}

inline ParallelCorpus monotone_corpus(int pairs, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, 7);
  std::vector<std::pair<std::string, std::string>> data;
  for (int k = 0; k < pairs; ++k) {
    std::string s;
    std::string t;
    for (int i = 0; i < 3; ++i) {
      int w = pick(rng);
      s += (i ? " e" : "e") + std::to_string(w);
      t += (i ? " f" : "f") + std::to_string(w);
    }
    data.emplace_back(s, t);
  }
  return corpus_of(data);
}

// Exhaustive enumeration of all (n+1)^m alignments; returns per-target-position
// argmax of the posterior marginal (-1 for NULL), lowest position on ties.
inline std::vector<long> enumerate_posterior_argmax(const DiagAlignModel& m, const Sentence& e, const Sentence& f) {
  const std::size_t n = e.size();
  const std::size_t len = f.size();
  auto prior = [&](std::size_t i, long j) {
    if (j < 0) return m.null_prob;
    double z = 0;
    for (std::size_t jj = 1; jj <= n; ++jj)
      z += std::exp(-m.tension * std::abs(double(i + 1) / double(len) - double(jj) / double(n)));
    return (1 - m.null_prob) * std::exp(-m.tension * std::abs(double(i + 1) / double(len) - double(j + 1) / double(n))) / z;
  };
  auto lex = [&](long j, const std::string& fw) {
    double p = m.lex.prob(j < 0 ? std::string(LexTable::kNull) : e[static_cast<std::size_t>(j)], fw);
    return p > 0 ? p : 1e-12;
  };
  std::vector<std::vector<double>> marg(len, std::vector<double>(n + 1, 0.0));
  std::vector<long> a(len, -1);
  std::size_t total = 1;
  for (std::size_t i = 0; i < len; ++i) total *= (n + 1);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    double p = 1;
    for (std::size_t i = 0; i < len; ++i) {
      a[i] = static_cast<long>(c % (n + 1)) - 1;
      c /= (n + 1);
      p *= prior(i, a[i]) * lex(a[i], f[i]);
    }
    for (std::size_t i = 0; i < len; ++i) marg[i][static_cast<std::size_t>(a[i] + 1)] += p;
  }
  std::vector<long> best(len);
  for (std::size_t i = 0; i < len; ++i) {
    std::size_t b = 0;
    for (std::size_t j = 1; j <= n; ++j)
      if (marg[i][j] > marg[i][b]) b = j;
    best[i] = static_cast<long>(b) - 1;
  }
  return best;
}

}  // namespace align_oracle
