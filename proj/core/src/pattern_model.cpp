#include "comhyper/pattern_model.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace comhyper {

PatternMethod pattern_method_from_string(const std::string& s) {
  if (s == "count") return PatternMethod::Count;
  if (s == "ppmi") return PatternMethod::Ppmi;
  if (s == "svd-count") return PatternMethod::SvdCount;
  if (s == "svd-ppmi") return PatternMethod::SvdPpmi;
  throw ParseError("unknown pattern method: " + s);
}

std::string to_string(PatternMethod m) {
  switch (m) {
    case PatternMethod::Count: return "count";
    case PatternMethod::Ppmi: return "ppmi";
    case PatternMethod::SvdCount: return "svd-count";
    case PatternMethod::SvdPpmi: return "svd-ppmi";
  }
  return "?";
}

PatternIndex PatternIndex::from_pairs(const ExtractedPairs& pairs) {
  PatternIndex index;
  index.ip_words = pairs.ip_words_sorted();
  index.to_dense.reserve(index.ip_words.size());
  for (std::uint32_t i = 0; i < index.ip_words.size(); ++i) {
    index.to_dense.emplace(index.ip_words[i], i);
  }
  return index;
}

std::uint32_t PatternIndex::dense(WordId w) const {
  auto it = to_dense.find(w);
  if (it == to_dense.end()) {
    throw OopError("word id " + std::to_string(w) + " is out of pattern");
  }
  return it->second;
}

double SparsePairMatrix::entry(std::uint32_t row, std::uint32_t col) const {
  const auto& r = rows.at(row);
  auto it = std::lower_bound(r.begin(), r.end(), col,
                             [](const auto& e, std::uint32_t c) { return e.first < c; });
  if (it != r.end() && it->first == col) return it->second;
  return 0.0;
}

Eigen::MatrixXd SparsePairMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, v] : rows[i]) {
      m(static_cast<Eigen::Index>(i), j) = v;
    }
  }
  return m;
}

double SparsePairMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& row : rows) {
    for (const auto& [j, v] : row) s += v * v;
  }
  return std::sqrt(s);
}

SparsePairMatrix build_count_matrix(const ExtractedPairs& pairs,
                                    const PatternIndex& index) {
  if (pairs.weights.empty()) throw DomainError("extracted pair set is empty");
  SparsePairMatrix m;
  m.kind = MatrixKind::Count;
  m.dim = index.size();
  m.rows.resize(m.dim);
  for (const auto& [key, count] : pairs.weights) {
    m.rows[index.dense(key.hypo)].emplace_back(index.dense(key.hyper),
                                               static_cast<double>(count));
  }
  for (auto& row : m.rows) {
    std::sort(row.begin(), row.end());
  }
  return m;
}

SparsePairMatrix build_ppmi(const ExtractedPairs& pairs,
                            const PatternIndex& index) {
  if (pairs.weights.empty()) throw DomainError("extracted pair set is empty");
  const double total = static_cast<double>(pairs.total_weight);
  std::vector<double> hypo_marginal(index.size(), 0.0);
  std::vector<double> hyper_marginal(index.size(), 0.0);
  for (const auto& [key, count] : pairs.weights) {
    double p = static_cast<double>(count) / total;
    hypo_marginal[index.dense(key.hypo)] += p;
    hyper_marginal[index.dense(key.hyper)] += p;
  }
  SparsePairMatrix m;
  m.kind = MatrixKind::Ppmi;
  m.dim = index.size();
  m.rows.resize(m.dim);
  for (const auto& [key, count] : pairs.weights) {
    std::uint32_t i = index.dense(key.hypo);
    std::uint32_t j = index.dense(key.hyper);
    double p = static_cast<double>(count) / total;
    double pmi = std::log(p / (hypo_marginal[i] * hyper_marginal[j]));
    if (pmi > 0.0) m.rows[i].emplace_back(j, pmi);
  }
  for (auto& row : m.rows) {
    std::sort(row.begin(), row.end());
  }
  return m;
}

namespace {

// Dense product A * M for the row-compressed sparse A.
Eigen::MatrixXd sparse_mul(const SparsePairMatrix& a, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.dim),
                                              m.cols());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    for (const auto& [j, v] : a.rows[i]) {
      out.row(static_cast<Eigen::Index>(i)) += v * m.row(j);
    }
  }
  return out;
}

// Dense product A^T * M.
Eigen::MatrixXd sparse_mul_t(const SparsePairMatrix& a, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.dim),
                                              m.cols());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    for (const auto& [j, v] : a.rows[i]) {
      out.row(j) += v * m.row(static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  return q;
}

}  // namespace

SvdModel truncated_svd(const SparsePairMatrix& matrix, std::size_t r,
                       std::uint64_t seed) {
  const std::size_t n = matrix.dim;
  if (r < 1 || r > n) {
    throw DomainError("svd rank " + std::to_string(r) + " out of range for dim " +
                      std::to_string(n));
  }
  SvdModel model;
  model.seed = seed;
  model.rank = r;
  const auto ri = static_cast<Eigen::Index>(r);

  if (n <= 64) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix.to_dense(),
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    model.left_vectors = svd.matrixU().leftCols(ri);
    model.singular_values = svd.singularValues().head(ri);
    model.right_vectors = svd.matrixV().leftCols(ri);
    return model;
  }

  constexpr std::size_t kOversample = 8;
  constexpr int kPowerIterations = 4;
  const auto l = static_cast<Eigen::Index>(std::min(n, r + kOversample));
  const auto ni = static_cast<Eigen::Index>(n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd omega(ni, l);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < l; ++j) omega(i, j) = gauss(rng);
  }

  Eigen::MatrixXd q = thin_q(sparse_mul(matrix, omega));
  for (int it = 0; it < kPowerIterations; ++it) {
    Eigen::MatrixXd z = thin_q(sparse_mul_t(matrix, q));
    q = thin_q(sparse_mul(matrix, z));
  }

  // B = Q^T A, computed as (A^T Q)^T.
  Eigen::MatrixXd b = sparse_mul_t(matrix, q).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  model.left_vectors = q * svd.matrixU().leftCols(ri);
  model.singular_values = svd.singularValues().head(ri);
  model.right_vectors = svd.matrixV().leftCols(ri);
  return model;
}

double svd_score(const SvdModel& model, std::uint32_t x, std::uint32_t y) {
  return model.left_vectors.row(x)
      .cwiseProduct(model.singular_values.transpose())
      .dot(model.right_vectors.row(y));
}

namespace {

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_svd_model(const std::string& path, const SvdModel& model,
                    PatternMethod method) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  out << "comhyper-svd\t1\t" << model.left_vectors.rows() << '\t' << model.rank
      << '\t' << model.seed << '\t' << to_string(method) << '\n';
  auto write_matrix = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out << '\t';
        out << format_exact(m(i, j));
      }
      out << '\n';
    }
  };
  write_matrix(model.left_vectors);
  for (Eigen::Index i = 0; i < model.singular_values.size(); ++i) {
    if (i) out << '\t';
    out << format_exact(model.singular_values[i]);
  }
  out << '\n';
  write_matrix(model.right_vectors);
}

SvdModel load_svd_model(const std::string& path, PatternMethod* method_out) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open svd model: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty svd model: " + path);
  std::istringstream hs(header);
  std::string magic, method_str;
  int version = 0;
  std::size_t dim = 0, rank = 0;
  std::uint64_t seed = 0;
  hs >> magic >> version >> dim >> rank >> seed >> method_str;
  if (magic != "comhyper-svd" || version != 1) {
    throw ParseError("bad svd model header in " + path);
  }
  if (method_out != nullptr) *method_out = pattern_method_from_string(method_str);
  SvdModel model;
  model.rank = rank;
  model.seed = seed;
  const auto ni = static_cast<Eigen::Index>(dim);
  const auto ri = static_cast<Eigen::Index>(rank);
  auto read_matrix = [&](Eigen::MatrixXd& m) {
    m.resize(ni, ri);
    for (Eigen::Index i = 0; i < ni; ++i) {
      std::string line;
      if (!std::getline(in, line)) throw ParseError("truncated svd model: " + path);
      std::istringstream ls(line);
      for (Eigen::Index j = 0; j < ri; ++j) {
        if (!(ls >> m(i, j))) throw ParseError("malformed svd model row in " + path);
      }
    }
  };
  read_matrix(model.left_vectors);
  {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("truncated svd model: " + path);
    std::istringstream ls(line);
    model.singular_values.resize(ri);
    for (Eigen::Index j = 0; j < ri; ++j) {
      if (!(ls >> model.singular_values[j])) {
        throw ParseError("malformed singular values in " + path);
      }
    }
  }
  read_matrix(model.right_vectors);
  return model;
}

PatternScorer::PatternScorer(PatternMethod method, const ExtractedPairs& pairs,
                             std::size_t svd_rank, std::uint64_t seed)
    : method_(method), pairs_(&pairs), index_(PatternIndex::from_pairs(pairs)) {
  if (pairs.weights.empty()) throw DomainError("extracted pair set is empty");
  switch (method) {
    case PatternMethod::Count:
      matrix_ = build_count_matrix(pairs, index_);
      break;
    case PatternMethod::Ppmi:
      matrix_ = build_ppmi(pairs, index_);
      break;
    case PatternMethod::SvdCount:
    case PatternMethod::SvdPpmi: {
      matrix_ = method == PatternMethod::SvdCount ? build_count_matrix(pairs, index_)
                                                  : build_ppmi(pairs, index_);
      std::size_t r = std::min(svd_rank, index_.size());
      svd_ = truncated_svd(matrix_, r, seed);
      has_svd_ = true;
      break;
    }
  }
}

PatternScorer::PatternScorer(PatternMethod method, const ExtractedPairs& pairs,
                             SvdModel svd_model)
    : method_(method), pairs_(&pairs), index_(PatternIndex::from_pairs(pairs)),
      svd_(std::move(svd_model)), has_svd_(true) {
  if (method != PatternMethod::SvdCount && method != PatternMethod::SvdPpmi) {
    throw StateError("svd model supplied for a non-svd pattern method");
  }
  if (static_cast<std::size_t>(svd_.left_vectors.rows()) != index_.size()) {
    throw StateError("svd model dimension does not match pair set");
  }
}

const SvdModel& PatternScorer::svd_model() const {
  if (!has_svd_) throw StateError("pattern method has no svd model");
  return svd_;
}

double PatternScorer::score(WordId x, WordId y) const {
  std::uint32_t i = index_.dense(x);
  std::uint32_t j = index_.dense(y);
  switch (method_) {
    case PatternMethod::Count:
      return static_cast<double>(pairs_->weight(x, y)) /
             static_cast<double>(pairs_->total_weight);
    case PatternMethod::Ppmi:
      return matrix_.entry(i, j);
    case PatternMethod::SvdCount:
    case PatternMethod::SvdPpmi:
      return svd_score(svd_, i, j);
  }
  return 0.0;
}

double PatternScorer::min_score() const {
  const std::size_t n = index_.size();
  if (method_ == PatternMethod::Count || method_ == PatternMethod::Ppmi) {
    // Entries are >= 0 and any unseen pair scores 0; the minimum is 0
    // unless the matrix is completely dense with positive values.
    std::size_t stored = 0;
    double min_entry = std::numeric_limits<double>::infinity();
    const SparsePairMatrix* m = &matrix_;
    for (const auto& row : m->rows) {
      stored += row.size();
      for (const auto& [j, v] : row) min_entry = std::min(min_entry, v);
    }
    if (stored < n * n) return 0.0;
    return std::min(0.0, min_entry);
  }
  double min_v = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < n; ++x) {
    Eigen::VectorXd u = svd_.left_vectors.row(static_cast<Eigen::Index>(x))
                            .cwiseProduct(svd_.singular_values.transpose())
                            .transpose();
    Eigen::VectorXd scores = svd_.right_vectors * u;
    min_v = std::min(min_v, scores.minCoeff());
  }
  return min_v;
}

std::uint64_t PatternScorer::provenance_hash() const {
  std::ostringstream s;
  s << to_string(method_) << '\t' << index_.size() << '\t' << pairs_->total_weight;
  if (has_svd_) s << '\t' << svd_.rank << '\t' << svd_.seed;
  for (const auto& [key, count] : pairs_->weights) {
    s << '\n' << key.hypo << '\t' << key.hyper << '\t' << count;
  }
  return fnv1a(s.str());
}

}  // namespace comhyper
