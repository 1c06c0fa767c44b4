#pragma once

#include <map>
#include <string>
#include <vector>

#include "comhyper/corpus.hpp"

namespace comhyper {

// Sparse PPMI-weighted window co-occurrence vector; zero weights unstored.
struct FeatureVector {
  std::map<WordId, double> weights;

  bool empty() const { return weights.empty(); }
  double norm() const;
  double sum() const;
};

class FeatureSpace {
 public:
  // Symmetric-window co-occurrence counts over the corpus, reweighted by
  // positive PMI.
  FeatureSpace(const Corpus& corpus, const Vocabulary& vocab, std::size_t window);

  const FeatureVector& of(WordId w) const { return vectors_.at(w); }
  std::size_t size() const { return vectors_.size(); }

  // Median entropy of the word's topN strongest contexts' own normalized
  // feature distributions (the generality estimate behind slqs).
  double context_entropy_median(WordId w, std::size_t top_n) const;

  void save(const std::string& path, const Vocabulary& vocab) const;

 private:
  std::vector<FeatureVector> vectors_;
};

double cosine(const FeatureVector& u, const FeatureVector& v);

// WP(u -> v): weight mass of u's features that also occur in v.
double weeds_precision(const FeatureVector& u, const FeatureVector& v);

// CL(u -> v) = sum_f min(u_f, v_f) / sum_f u_f.
double cl(const FeatureVector& u, const FeatureVector& v);

// invCL = sqrt(CL(u->v) * (1 - CL(v->u))).
double invcl(const FeatureVector& u, const FeatureVector& v);

// SLQS = 1 - E_u / E_v with E_w the median context entropy.
double slqs(WordId u, WordId v, std::size_t top_n, const FeatureSpace& space);

}  // namespace comhyper
