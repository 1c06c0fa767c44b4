#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>
#include <cmath>
#include <filesystem>
#include <random>

#include "comhyper/pattern_model.hpp"
#include "support/oracles.hpp"

using namespace comhyper;

namespace {

// P = {(a,b):2, (a,c):1, (d,c):1} on ids a=0, b=1, c=2, d=3.
ExtractedPairs small_pairs() {
  ExtractedPairs p;
  p.weights[{0, 1}] = 2;
  p.weights[{0, 2}] = 1;
  p.weights[{3, 2}] = 1;
  p.in_pattern_vocab = {0, 1, 2, 3};
  p.total_weight = 4;
  return p;
}

ExtractedPairs random_pairs(std::mt19937_64& rng, std::size_t vocab_size,
                            std::size_t n_pairs) {
  ExtractedPairs p;
  std::uniform_int_distribution<WordId> pick(0, static_cast<WordId>(vocab_size - 1));
  std::uniform_int_distribution<std::uint64_t> count(1, 9);
  while (p.weights.size() < n_pairs) {
    WordId a = pick(rng), b = pick(rng);
    if (a == b) continue;
    std::uint64_t c = count(rng);
    if (p.weights.emplace(PairKey{a, b}, c).second) p.total_weight += c;
  }
  for (const auto& [key, cnt] : p.weights) {
    p.in_pattern_vocab.insert(key.hypo);
    p.in_pattern_vocab.insert(key.hyper);
  }
  return p;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                              Eigen::Index cols) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

SparsePairMatrix wrap_dense(const Eigen::MatrixXd& dense, MatrixKind kind) {
  SparsePairMatrix m;
  m.kind = kind;
  m.dim = static_cast<std::size_t>(dense.rows());
  m.rows.resize(m.dim);
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        m.rows[static_cast<std::size_t>(i)].push_back(
            {static_cast<std::uint32_t>(j), dense(i, j)});
      }
    }
  }
  return m;
}

}  // namespace

TEST_CASE("PatternIndex: dense ids follow sorted V_P; absent words throw") {
  auto pairs = small_pairs();
  auto index = PatternIndex::from_pairs(pairs);
  REQUIRE(index.size() == 4);
  for (std::uint32_t i = 0; i < 4; ++i) CHECK(index.dense(i) == i);
  CHECK_THROWS_AS(index.dense(9), OopError);
}

TEST_CASE("count scorer: w/W semantics") {
  auto pairs = small_pairs();
  PatternScorer f(PatternMethod::Count, pairs);
  CHECK(f.score(0, 1) == doctest::Approx(0.5));   // w=2, W=4
  CHECK(f.score(0, 2) == doctest::Approx(0.25));
  CHECK(f.score(1, 0) == 0.0);                    // unseen direction
  CHECK(f.score(1, 3) == 0.0);                    // unseen IP pair
  CHECK(f.score(0, 1) != f.score(1, 0));          // counts are directional
  CHECK_THROWS_AS(f.score(0, 9), OopError);
}

TEST_CASE("build_ppmi: hand-computed entry") {
  auto pairs = small_pairs();
  auto index = PatternIndex::from_pairs(pairs);
  auto m = build_ppmi(pairs, index);
  // p(a,b)=0.5, p-(a)=0.75, p+(b)=0.5 -> ln(0.5/0.375)
  CHECK(m.entry(0, 1) == doctest::Approx(std::log(0.5 / 0.375)).epsilon(1e-12));
  CHECK(m.entry(0, 1) == doctest::Approx(0.2877).epsilon(1e-3));
  CHECK(m.entry(1, 0) == 0.0);  // unseen stays unstored
}

TEST_CASE("build_ppmi: single pair degenerates to zero") {
  ExtractedPairs p;
  p.weights[{0, 1}] = 5;
  p.in_pattern_vocab = {0, 1};
  p.total_weight = 5;
  auto index = PatternIndex::from_pairs(p);
  auto m = build_ppmi(p, index);
  CHECK(m.entry(0, 1) == 0.0);
  CHECK(m.frobenius_norm() == 0.0);
}

TEST_CASE("build_ppmi: nonnegative entries, empty P rejected") {
  std::mt19937_64 rng(5);
  auto pairs = random_pairs(rng, 12, 25);
  auto index = PatternIndex::from_pairs(pairs);
  auto m = build_ppmi(pairs, index);
  for (const auto& row : m.rows) {
    for (const auto& [col, v] : row) CHECK(v > 0.0);  // zeros unstored
  }
  ExtractedPairs empty;
  auto empty_index = PatternIndex::from_pairs(empty);
  CHECK_THROWS_AS(build_ppmi(empty, empty_index), DomainError);
}

TEST_CASE("count matrix: integer entries matching the pair weights") {
  auto pairs = small_pairs();
  auto index = PatternIndex::from_pairs(pairs);
  auto m = build_count_matrix(pairs, index);
  CHECK(m.entry(0, 1) == 2.0);
  CHECK(m.entry(3, 2) == 1.0);
  CHECK(m.entry(2, 3) == 0.0);
}

TEST_CASE("truncated_svd: diagonal analytic case") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 2;
  d(2, 2) = 1;
  auto model = truncated_svd(wrap_dense(d, MatrixKind::Ppmi), 2, 1);
  REQUIRE(model.rank == 2);
  CHECK(model.singular_values[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(model.singular_values[1] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("truncated_svd: exact rank-1 reconstruction") {
  Eigen::VectorXd u(4), v(4);
  u << 1, -2, 0.5, 3;
  v << 2, 1, -1, 0.25;
  Eigen::MatrixXd m = u * v.transpose();
  auto model = truncated_svd(wrap_dense(m, MatrixKind::Ppmi), 1, 1);
  Eigen::MatrixXd rebuilt = model.left_vectors *
                            model.singular_values.asDiagonal() *
                            model.right_vectors.transpose();
  CHECK((rebuilt - m).norm() < 1e-8);
}

TEST_CASE("truncated_svd: rank out of range") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  auto sparse = wrap_dense(m, MatrixKind::Count);
  CHECK_THROWS_AS(truncated_svd(sparse, 0, 1), DomainError);
  CHECK_THROWS_AS(truncated_svd(sparse, 4, 1), DomainError);
}

TEST_CASE("truncated_svd: matches Jacobi oracle on random matrices") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> dim_pick(2, 20);
    int n = dim_pick(rng);
    Eigen::MatrixXd dense = random_matrix(rng, n, n);
    auto sparse = wrap_dense(dense, MatrixKind::Ppmi);
    auto model = truncated_svd(sparse, static_cast<std::size_t>(n), 1 + trial);

    auto oracle = oracles::jacobi_singular_values(dense);
    REQUIRE(model.singular_values.size() == n);
    for (int i = 0; i < n; ++i) {
      CHECK(model.singular_values[i] ==
            doctest::Approx(oracle[static_cast<std::size_t>(i)]).epsilon(1e-6).scale(1.0));
    }
    // Full-rank reconstruction.
    Eigen::MatrixXd rebuilt = model.left_vectors *
                              model.singular_values.asDiagonal() *
                              model.right_vectors.transpose();
    CHECK((rebuilt - dense).norm() < 1e-6 * std::max(1.0, dense.norm()));
    // Orthonormality.
    Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    CHECK((model.left_vectors.transpose() * model.left_vectors - eye).norm() < 1e-6);
    CHECK((model.right_vectors.transpose() * model.right_vectors - eye).norm() < 1e-6);
    // Spectral ordering.
    for (int i = 1; i < n; ++i) {
      CHECK(model.singular_values[i] <= model.singular_values[i - 1] + 1e-12);
      CHECK(model.singular_values[i] >= -1e-12);
    }
  }
}

TEST_CASE("truncated_svd: Frobenius error nonincreasing in rank") {
  std::mt19937_64 rng(55);
  Eigen::MatrixXd dense = random_matrix(rng, 12, 12);
  auto sparse = wrap_dense(dense, MatrixKind::Ppmi);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r <= 12; ++r) {
    auto model = truncated_svd(sparse, r, 7);
    Eigen::MatrixXd rebuilt = model.left_vectors *
                              model.singular_values.asDiagonal() *
                              model.right_vectors.transpose();
    double err = (rebuilt - dense).norm();
    CHECK(err <= prev + 1e-9);
    prev = err;
  }
}

TEST_CASE("truncated_svd: deterministic given seed, including the large path") {
  std::mt19937_64 rng(77);
  // 80 > the dense-fallback cutoff, so this exercises subspace iteration.
  Eigen::MatrixXd dense = random_matrix(rng, 80, 80);
  auto sparse = wrap_dense(dense, MatrixKind::Ppmi);
  auto a = truncated_svd(sparse, 10, 123);
  auto b = truncated_svd(sparse, 10, 123);
  CHECK(a.left_vectors == b.left_vectors);
  CHECK(a.singular_values == b.singular_values);
  CHECK(a.right_vectors == b.right_vectors);

  // On a matrix with a decaying spectrum (the shape pattern matrices
  // have), the randomized path agrees with the oracle's top values.
  Eigen::MatrixXd left = random_matrix(rng, 80, 80);
  Eigen::MatrixXd right = random_matrix(rng, 80, 80);
  Eigen::MatrixXd q_left =
      Eigen::HouseholderQR<Eigen::MatrixXd>(left).householderQ();
  Eigen::MatrixXd q_right =
      Eigen::HouseholderQR<Eigen::MatrixXd>(right).householderQ();
  Eigen::VectorXd spectrum(80);
  for (int i = 0; i < 80; ++i) spectrum[i] = 20.0 * std::pow(0.7, i);
  Eigen::MatrixXd decaying =
      q_left * spectrum.asDiagonal() * q_right.transpose();
  auto model = truncated_svd(wrap_dense(decaying, MatrixKind::Ppmi), 10, 99);
  auto oracle = oracles::jacobi_singular_values(decaying);
  for (int i = 0; i < 10; ++i) {
    CHECK(model.singular_values[i] ==
          doctest::Approx(oracle[static_cast<std::size_t>(i)]).epsilon(1e-6));
  }
}

TEST_CASE("svd_score: full rank reproduces matrix entries") {
  std::mt19937_64 rng(8);
  auto pairs = random_pairs(rng, 10, 20);
  auto index = PatternIndex::from_pairs(pairs);
  auto m = build_ppmi(pairs, index);
  auto model = truncated_svd(m, index.size(), 3);
  for (std::uint32_t i = 0; i < index.size(); ++i) {
    for (std::uint32_t j = 0; j < index.size(); ++j) {
      CHECK(svd_score(model, i, j) == doctest::Approx(m.entry(i, j)).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("svd_score: truncated rank matches dense oracle multiply") {
  std::mt19937_64 rng(12);
  auto pairs = random_pairs(rng, 10, 22);
  auto index = PatternIndex::from_pairs(pairs);
  auto m = build_ppmi(pairs, index);
  auto model = truncated_svd(m, 3, 4);
  Eigen::MatrixXd rebuilt = model.left_vectors *
                            model.singular_values.asDiagonal() *
                            model.right_vectors.transpose();
  for (std::uint32_t i = 0; i < index.size(); ++i) {
    for (std::uint32_t j = 0; j < index.size(); ++j) {
      CHECK(svd_score(model, i, j) ==
            doctest::Approx(rebuilt(i, j)).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("PatternScorer: SVD-PPMI at full rank equals PPMI within 1e-6") {
  std::mt19937_64 rng(19);
  auto pairs = random_pairs(rng, 9, 18);
  PatternScorer ppmi(PatternMethod::Ppmi, pairs);
  PatternScorer svd(PatternMethod::SvdPpmi, pairs,
                    pairs.in_pattern_vocab.size(), 2);
  for (WordId x : pairs.ip_words_sorted()) {
    for (WordId y : pairs.ip_words_sorted()) {
      CHECK(svd.score(x, y) == doctest::Approx(ppmi.score(x, y)).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("PatternScorer: COUNT ranking matches brute-force count sort") {
  std::mt19937_64 rng(23);
  auto pairs = random_pairs(rng, 8, 10);
  PatternScorer f(PatternMethod::Count, pairs);
  std::vector<std::pair<PairKey, std::uint64_t>> sorted(pairs.weights.begin(),
                                                        pairs.weights.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](auto& a, auto& b) { return a.second > b.second; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    CHECK(f.score(sorted[i - 1].first.hypo, sorted[i - 1].first.hyper) >=
          f.score(sorted[i].first.hypo, sorted[i].first.hyper));
  }
}

TEST_CASE("PatternScorer: min_score is the exact V_P x V_P minimum") {
  std::mt19937_64 rng(29);
  auto pairs = random_pairs(rng, 8, 14);
  for (auto method : {PatternMethod::Count, PatternMethod::Ppmi,
                      PatternMethod::SvdPpmi}) {
    PatternScorer f(method, pairs, 3, 5);
    double brute = std::numeric_limits<double>::infinity();
    for (WordId x : pairs.ip_words_sorted()) {
      for (WordId y : pairs.ip_words_sorted()) {
        brute = std::min(brute, f.score(x, y));
      }
    }
    CHECK(f.min_score() == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("svd model round-trip preserves scores and metadata") {
  std::mt19937_64 rng(41);
  auto pairs = random_pairs(rng, 7, 12);
  PatternScorer f(PatternMethod::SvdPpmi, pairs, 4, 9);
  auto dir = std::filesystem::temp_directory_path() / "comhyper_test_pattern";
  std::filesystem::create_directories(dir);
  auto path = (dir / "svd.tsv").string();
  save_svd_model(path, f.svd_model(), PatternMethod::SvdPpmi);
  PatternMethod method{};
  auto loaded = load_svd_model(path, &method);
  CHECK(method == PatternMethod::SvdPpmi);
  CHECK(loaded.rank == f.svd_model().rank);
  CHECK(loaded.seed == f.svd_model().seed);
  CHECK(loaded.left_vectors == f.svd_model().left_vectors);
  CHECK(loaded.singular_values == f.svd_model().singular_values);
  CHECK(loaded.right_vectors == f.svd_model().right_vectors);
}

TEST_CASE("provenance hash: stable for same inputs, sensitive to method") {
  auto pairs = small_pairs();
  PatternScorer a(PatternMethod::Ppmi, pairs);
  PatternScorer b(PatternMethod::Ppmi, pairs);
  PatternScorer c(PatternMethod::Count, pairs);
  CHECK(a.provenance_hash() == b.provenance_hash());
  CHECK(a.provenance_hash() != c.provenance_hash());
}
