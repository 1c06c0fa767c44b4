#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "comhyper/encoders.hpp"
#include "comhyper/hearst.hpp"
#include "comhyper/pattern_model.hpp"

using namespace comhyper;

namespace {

std::string make_text(std::size_t sentences) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> word(0, 199);
  std::ostringstream text;
  for (std::size_t s = 0; s < sentences; ++s) {
    for (int t = 0; t < 12; ++t) text << 'w' << word(rng) << ' ';
    if (s % 5 == 0) text << "animals such as dogs, cats and birds ";
    text << ". ";
  }
  return text.str();
}

ExtractedPairs make_pairs(std::size_t vocab, std::size_t n) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<WordId> pick(0, static_cast<WordId>(vocab - 1));
  std::uniform_int_distribution<std::uint64_t> count(1, 30);
  ExtractedPairs p;
  while (p.weights.size() < n) {
    WordId a = pick(rng), b = pick(rng);
    if (a == b) continue;
    std::uint64_t c = count(rng);
    if (p.weights.emplace(PairKey{a, b}, c).second) p.total_weight += c;
  }
  for (const auto& [key, c] : p.weights) {
    p.in_pattern_vocab.insert(key.hypo);
    p.in_pattern_vocab.insert(key.hyper);
  }
  return p;
}

void BM_Tokenize(benchmark::State& state) {
  auto text = make_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tokenize(text, true));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(100)->Arg(1000);

void BM_MatchSentence(benchmark::State& state) {
  auto sents = tokenize(make_text(200), true);
  auto templates = default_templates();
  for (auto _ : state) {
    for (const auto& s : sents) {
      benchmark::DoNotOptimize(match_sentence(s, templates));
    }
  }
}
BENCHMARK(BM_MatchSentence);

void BM_BuildPpmi(benchmark::State& state) {
  auto pairs = make_pairs(300, static_cast<std::size_t>(state.range(0)));
  auto index = PatternIndex::from_pairs(pairs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_ppmi(pairs, index));
  }
}
BENCHMARK(BM_BuildPpmi)->Arg(1000)->Arg(5000);

void BM_TruncatedSvd(benchmark::State& state) {
  auto pairs = make_pairs(static_cast<std::size_t>(state.range(0)),
                          static_cast<std::size_t>(state.range(0)) * 6);
  auto index = PatternIndex::from_pairs(pairs);
  auto matrix = build_ppmi(pairs, index);
  for (auto _ : state) {
    benchmark::DoNotOptimize(truncated_svd(matrix, 32, 1));
  }
}
BENCHMARK(BM_TruncatedSvd)->Arg(100)->Arg(300);

void BM_Attend(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  const int dim = 64;
  AttentionParams params;
  params.proj = Eigen::MatrixXd::NullaryExpr(dim, dim, [&] { return gauss(rng); });
  params.query = Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); });
  std::vector<Eigen::VectorXd> items;
  for (int i = 0; i < 32; ++i) {
    items.push_back(Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); }));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(attend(items, params));
  }
}
BENCHMARK(BM_Attend);

void BM_MlpForward(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  const int dim = 128;
  MlpParams mlp;
  mlp.layers.push_back(
      {Eigen::MatrixXd::NullaryExpr(dim, dim, [&] { return gauss(rng); }),
       Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); })});
  mlp.layers.push_back(
      {Eigen::MatrixXd::NullaryExpr(dim, dim, [&] { return gauss(rng); }),
       Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); })});
  Eigen::VectorXd input =
      Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); });
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlp_forward(mlp, input));
  }
}
BENCHMARK(BM_MlpForward);

}  // namespace

BENCHMARK_MAIN();
