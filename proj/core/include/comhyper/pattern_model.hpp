#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "comhyper/hearst.hpp"

namespace comhyper {

enum class PatternMethod { Count, Ppmi, SvdCount, SvdPpmi };

PatternMethod pattern_method_from_string(const std::string& s);
std::string to_string(PatternMethod m);

// Dense re-indexing of V_P: row/column i corresponds to ip_words[i]
// (sorted WordIds).
struct PatternIndex {
  std::vector<WordId> ip_words;            // sorted
  std::unordered_map<WordId, std::uint32_t> to_dense;

  static PatternIndex from_pairs(const ExtractedPairs& pairs);
  std::size_t size() const { return ip_words.size(); }
  bool contains(WordId w) const { return to_dense.count(w) != 0; }
  std::uint32_t dense(WordId w) const;  // throws OopError when absent
};

enum class MatrixKind { Count, Ppmi };

// Row-compressed sparse |V_P| x |V_P| matrix; zeros are unstored.
struct SparsePairMatrix {
  MatrixKind kind = MatrixKind::Count;
  std::size_t dim = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;  // col-sorted

  double entry(std::uint32_t row, std::uint32_t col) const;
  Eigen::MatrixXd to_dense() const;
  double frobenius_norm() const;
};

SparsePairMatrix build_count_matrix(const ExtractedPairs& pairs,
                                    const PatternIndex& index);

// entry(x,y) = max(0, ln( p(x,y) / (p_hypo(x) * p_hyper(y)) )) with
// directional marginals p_hypo(x) = sum_y p(x,y), p_hyper(y) = sum_x p(x,y).
SparsePairMatrix build_ppmi(const ExtractedPairs& pairs,
                            const PatternIndex& index);

struct SvdModel {
  std::size_t rank = 0;
  Eigen::MatrixXd left_vectors;     // |V_P| x r
  Eigen::VectorXd singular_values;  // r, nonincreasing
  Eigen::MatrixXd right_vectors;    // |V_P| x r
  std::uint64_t seed = 0;
};

// Rank-r truncated SVD. Dense Jacobi for dims <= 64, randomized subspace
// iteration (oversampling 8, 4 power iterations) above. Deterministic
// given seed.
SvdModel truncated_svd(const SparsePairMatrix& matrix, std::size_t r,
                       std::uint64_t seed);

// <U[x] .* sigma, V[y]> on dense indices.
double svd_score(const SvdModel& model, std::uint32_t x, std::uint32_t y);

void save_svd_model(const std::string& path, const SvdModel& model,
                    PatternMethod method);
SvdModel load_svd_model(const std::string& path, PatternMethod* method_out = nullptr);

// The pattern-based scorer f over V_P x V_P. Words outside V_P raise
// OopError; the router owns that case.
class PatternScorer {
 public:
  PatternScorer(PatternMethod method, const ExtractedPairs& pairs,
                std::size_t svd_rank = 50, std::uint64_t seed = 1);
  PatternScorer(PatternMethod method, const ExtractedPairs& pairs,
                SvdModel svd_model);

  double score(WordId x, WordId y) const;       // f(x, y)
  PatternMethod method() const { return method_; }
  const PatternIndex& index() const { return index_; }
  const SvdModel& svd_model() const;
  const ExtractedPairs& pairs() const { return *pairs_; }
  // Minimum of f over all of V_P x V_P (exact scan); the router's
  // MIN_SCORE fallback sentinel is derived from this.
  double min_score() const;
  // Provenance hash binding trained encoders to the scorer they
  // regressed onto.
  std::uint64_t provenance_hash() const;

 private:
  PatternMethod method_;
  const ExtractedPairs* pairs_;
  PatternIndex index_;
  SparsePairMatrix matrix_;
  SvdModel svd_;
  bool has_svd_ = false;
};

}  // namespace comhyper
