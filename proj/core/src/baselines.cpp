#include "comhyper/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace comhyper {

double FeatureVector::norm() const {
  double s = 0.0;
  for (const auto& [f, w] : weights) s += w * w;
  return std::sqrt(s);
}

double FeatureVector::sum() const {
  double s = 0.0;
  for (const auto& [f, w] : weights) s += w;
  return s;
}

FeatureSpace::FeatureSpace(const Corpus& corpus, const Vocabulary& vocab,
                           std::size_t window) {
  if (window < 1) throw DomainError("window must be >= 1");
  std::vector<std::map<WordId, std::uint64_t>> counts(vocab.size());
  std::vector<std::uint64_t> word_totals(vocab.size(), 0);
  std::uint64_t grand_total = 0;
  std::vector<WordId> ids;
  for (const auto& sent : corpus.sentences) {
    ids.clear();
    for (const auto& tok : sent) {
      if (is_comma_token(tok)) continue;
      WordId id = vocab.id(tok);
      if (id != kNoWord) ids.push_back(id);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::size_t start = i > window ? i - window : 0;
      std::size_t end = std::min(ids.size(), i + window + 1);
      for (std::size_t j = start; j < end; ++j) {
        if (j == i) continue;
        ++counts[ids[i]][ids[j]];
        ++word_totals[ids[i]];
        ++grand_total;
      }
    }
  }
  // Context marginals equal word marginals by window symmetry.
  vectors_.resize(vocab.size());
  if (grand_total == 0) return;
  const double total = static_cast<double>(grand_total);
  for (WordId w = 0; w < vocab.size(); ++w) {
    for (const auto& [c, n] : counts[w]) {
      double p_wc = static_cast<double>(n) / total;
      double p_w = static_cast<double>(word_totals[w]) / total;
      double p_c = static_cast<double>(word_totals[c]) / total;
      double pmi = std::log(p_wc / (p_w * p_c));
      if (pmi > 0.0) vectors_[w].weights.emplace(c, pmi);
    }
  }
}

double FeatureSpace::context_entropy_median(WordId w, std::size_t top_n) const {
  if (top_n < 1) throw DomainError("top_n must be >= 1");
  const FeatureVector& u = of(w);
  if (u.empty()) throw MetricUndefinedError("word has no features");
  std::vector<std::pair<double, WordId>> ranked;
  ranked.reserve(u.weights.size());
  for (const auto& [f, weight] : u.weights) ranked.emplace_back(weight, f);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (ranked.size() > top_n) ranked.resize(top_n);
  std::vector<double> entropies;
  for (const auto& [weight, ctx] : ranked) {
    const FeatureVector& cv = of(ctx);
    double total = cv.sum();
    double h = 0.0;
    if (total > 0.0) {
      for (const auto& [f, wgt] : cv.weights) {
        double p = wgt / total;
        h -= p * std::log2(p);
      }
    }
    entropies.push_back(h);
  }
  std::sort(entropies.begin(), entropies.end());
  std::size_t n = entropies.size();
  if (n % 2 == 1) return entropies[n / 2];
  return 0.5 * (entropies[n / 2 - 1] + entropies[n / 2]);
}

void FeatureSpace::save(const std::string& path, const Vocabulary& vocab) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  for (WordId w = 0; w < vectors_.size(); ++w) {
    for (const auto& [f, weight] : vectors_[w].weights) {
      out << vocab.surfaces[w] << '\t' << vocab.surfaces[f] << '\t'
          << format_real(weight) << '\n';
    }
  }
}

double cosine(const FeatureVector& u, const FeatureVector& v) {
  double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw MetricUndefinedError("cosine: zero-norm input");
  }
  double dot = 0.0;
  for (const auto& [f, w] : u.weights) {
    auto it = v.weights.find(f);
    if (it != v.weights.end()) dot += w * it->second;
  }
  return dot / (nu * nv);
}

double weeds_precision(const FeatureVector& u, const FeatureVector& v) {
  double total = u.sum();
  if (total == 0.0) throw MetricUndefinedError("weeds_precision: empty u");
  double shared = 0.0;
  for (const auto& [f, w] : u.weights) {
    if (v.weights.count(f)) shared += w;
  }
  return shared / total;
}

double cl(const FeatureVector& u, const FeatureVector& v) {
  double total = u.sum();
  if (total == 0.0) throw MetricUndefinedError("cl: empty u");
  double shared = 0.0;
  for (const auto& [f, w] : u.weights) {
    auto it = v.weights.find(f);
    if (it != v.weights.end()) shared += std::min(w, it->second);
  }
  return shared / total;
}

double invcl(const FeatureVector& u, const FeatureVector& v) {
  return std::sqrt(cl(u, v) * (1.0 - cl(v, u)));
}

double slqs(WordId u, WordId v, std::size_t top_n, const FeatureSpace& space) {
  double eu = space.context_entropy_median(u, top_n);
  double ev = space.context_entropy_median(v, top_n);
  if (ev == 0.0) throw MetricUndefinedError("slqs: zero hypernym entropy");
  return 1.0 - eu / ev;
}

}  // namespace comhyper
