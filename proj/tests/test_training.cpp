#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "comhyper/training.hpp"
#include "support/fixtures.hpp"

using namespace comhyper;

namespace {

// A small but nondegenerate training world: planted fixture corpus with
// in-toolkit embeddings and a PPMI scorer.
struct World {
  Corpus corpus;
  Vocabulary vocab;
  ContextStore store;
  EmbeddingTable embeddings;
  ExtractedPairs pairs;
  std::vector<ValidationPair> validation;
};

World make_world(std::uint64_t seed, fixtures::PlantedOptions opts = {}) {
  World w;
  auto fx = fixtures::make_planted_fixture(seed, opts);
  w.corpus = load_corpus_from_string(fx.corpus_text);
  w.vocab = build_vocabulary(w.corpus, 1);
  w.store = collect_contexts(w.corpus, w.vocab, 6, 16, seed);
  SgnsConfig sgns;
  sgns.dimension = 12;
  sgns.epochs = 8;
  sgns.window = 4;
  sgns.seed = seed;
  w.embeddings = train_sgns(w.corpus, w.vocab, sgns);
  w.pairs = extract_pairs(w.corpus, default_templates(), w.vocab);
  for (const auto& lp : fx.detection) {
    WordId a = w.vocab.id(lp.hypo), b = w.vocab.id(lp.hyper);
    if (a != kNoWord && b != kNoWord) w.validation.push_back({a, b, lp.label});
  }
  return w;
}

fixtures::PlantedOptions tiny_options() {
  fixtures::PlantedOptions opts;
  opts.categories = 4;
  opts.hyponyms_per_category = 6;
  opts.context_sentences_per_word = 6;
  return opts;
}

}  // namespace

TEST_CASE("sample_delta: singleton V_P always yields (x,x)") {
  std::mt19937_64 rng(1);
  auto samples = sample_delta(7, {7}, 20, rng);
  REQUIRE(samples.size() == 20);
  for (auto [a, b] : samples) {
    CHECK(a == 7);
    CHECK(b == 7);
  }
}

TEST_CASE("sample_delta: every sample contains x") {
  std::mt19937_64 rng(2);
  std::vector<WordId> vp = {1, 4, 6, 9, 12};
  for (int trial = 0; trial < 50; ++trial) {
    for (auto [a, b] : sample_delta(6, vp, 8, rng)) {
      CHECK((a == 6 || b == 6));
    }
  }
}

TEST_CASE("sample_delta: k < 1 rejected") {
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(sample_delta(1, {1, 2}, 0, rng), DomainError);
}

TEST_CASE("sample_delta: uniform over |Delta_x| = 5 (chi-square at 0.001)") {
  std::mt19937_64 rng(4);
  std::vector<WordId> vp = {0, 1, 2};
  const int n = 100000;
  std::map<std::pair<WordId, WordId>, int> freq;
  for (auto [a, b] : sample_delta(1, vp, n, rng)) ++freq[{a, b}];
  REQUIRE(freq.size() == 5);  // |Delta_x| = 2*3 - 1
  double chi2 = 0.0;
  const double expected = n / 5.0;
  for (const auto& [key, count] : freq) {
    chi2 += (count - expected) * (count - expected) / expected;
  }
  // chi-square critical value, df=4, alpha=0.001
  CHECK(chi2 < 18.467);
}

TEST_CASE("make_batch: targets equal direct f calls, order preserved") {
  auto w = make_world(5, tiny_options());
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  auto vp = w.pairs.ip_words_sorted();
  std::mt19937_64 rng(6);
  auto drawn = sample_delta(vp[0], vp, 5, rng);
  auto batch = make_batch(drawn, f);
  REQUIRE(batch.size() == drawn.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(batch[i].hypo == drawn[i].first);
    CHECK(batch[i].hyper == drawn[i].second);
    CHECK(batch[i].target == f.score(drawn[i].first, drawn[i].second));
  }
}

TEST_CASE("sample_loss: squared error against independent recomputation") {
  auto w = make_world(7, tiny_options());
  auto encoder = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   8, 3);
  auto vp = w.pairs.ip_words_sorted();
  TrainingSample s{vp[0], vp[1], 0.37};
  double g = g_score(encoder, s.hypo, s.hyper, w.store, w.embeddings);
  CHECK(sample_loss(s, encoder, w.store, w.embeddings) ==
        doctest::Approx((g - 0.37) * (g - 0.37)).epsilon(1e-12));
  TrainingSample zero{vp[0], vp[1], g};
  CHECK(sample_loss(zero, encoder, w.store, w.embeddings) == 0.0);
}

TEST_CASE("grad_check: all variants under 1e-4 across seeds") {
  auto w = make_world(11, tiny_options());
  auto vp = w.pairs.ip_words_sorted();
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  for (auto variant : {EncoderVariant::W2v, EncoderVariant::Nbow,
                       EncoderVariant::Han}) {
    for (std::uint64_t seed = 1; seed <= 7; ++seed) {
      auto encoder =
          init_encoder_pair(variant, w.embeddings.dimension, 6, seed);
      TrainingSample s{vp[seed % vp.size()], vp[(3 * seed) % vp.size()],
                       f.score(vp[seed % vp.size()], vp[(3 * seed) % vp.size()])};
      CHECK(grad_check(encoder, s, w.store, w.embeddings) < 1e-4);
    }
  }
}

TEST_CASE("grad_check: epsilon outside [1e-7, 1e-3] rejected") {
  auto w = make_world(13, tiny_options());
  auto vp = w.pairs.ip_words_sorted();
  auto encoder = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   4, 1);
  TrainingSample s{vp[0], vp[1], 0.0};
  CHECK_THROWS_AS(grad_check(encoder, s, w.store, w.embeddings, 1e-8),
                  DomainError);
  CHECK_THROWS_AS(grad_check(encoder, s, w.store, w.embeddings, 1e-2),
                  DomainError);
}

TEST_CASE("train: epochs=0 leaves parameters unchanged") {
  auto w = make_world(17, tiny_options());
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  auto encoder = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   6, 2);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.k = 2;
  auto result = train(encoder, w.pairs, f, w.store, w.embeddings, cfg);
  CHECK(result.encoder.params() == encoder.params());
  CHECK(result.loss_history.empty());
}

TEST_CASE("train: deterministic loss history; embeddings stay frozen") {
  auto w = make_world(19, tiny_options());
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  auto encoder = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   6, 2);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.k = 3;
  cfg.batch_size = 32;
  cfg.seed = 21;
  auto before = w.embeddings;
  auto r1 = train(encoder, w.pairs, f, w.store, w.embeddings, cfg);
  auto r2 = train(encoder, w.pairs, f, w.store, w.embeddings, cfg);
  CHECK(r1.loss_history == r2.loss_history);
  CHECK(r1.encoder.params() == r2.encoder.params());
  for (WordId id = 0; id < w.vocab.size(); ++id) {
    CHECK(w.embeddings.vec(id) == before.vec(id));
  }
}

TEST_CASE("train: loss shrinks by 10x on the toy fixture") {
  auto w = make_world(23, tiny_options());
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  auto encoder = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   8, 4);
  TrainConfig cfg;
  cfg.epochs = 4000;
  cfg.k = 6;
  cfg.batch_size = 64;
  cfg.learning_rate = 1e-2;
  cfg.seed = 9;
  auto result = train(encoder, w.pairs, f, w.store, w.embeddings, cfg);
  REQUIRE(result.loss_history.size() >= 2);
  CHECK(result.loss_history.back() < 0.1 * result.loss_history.front());
}

TEST_CASE("train: held-out |g - f| improves from initialization") {
  auto w = make_world(29, tiny_options());
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  auto vp = w.pairs.ip_words_sorted();
  // Hold out every 7th IP pair from evaluation (training still samples
  // uniformly; this just measures generalization inside V_P).
  std::vector<std::pair<WordId, WordId>> held;
  for (std::size_t i = 0; i < vp.size(); ++i) {
    held.push_back({vp[i], vp[(i * 5 + 3) % vp.size()]});
  }
  auto initial = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   8, 4);
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.k = 6;
  cfg.batch_size = 64;
  cfg.learning_rate = 1e-2;
  cfg.seed = 10;
  auto result = train(initial, w.pairs, f, w.store, w.embeddings, cfg);

  auto mean_gap = [&](const EncoderPair& enc) {
    double total = 0;
    for (auto [a, b] : held) {
      total += std::abs(g_score(enc, a, b, w.store, w.embeddings) - f.score(a, b));
    }
    return total / static_cast<double>(held.size());
  };
  CHECK(mean_gap(result.encoder) < mean_gap(initial));
}

TEST_CASE("train: validation AP drives early stop and provenance binding") {
  auto w = make_world(31, tiny_options());
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  auto encoder = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   8, 4);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.k = 4;
  cfg.batch_size = 64;
  cfg.seed = 2;
  cfg.patience = 3;
  auto result =
      train(encoder, w.pairs, f, w.store, w.embeddings, cfg, &w.validation);
  CHECK(result.val_ap_history.size() == result.loss_history.size());
  CHECK(result.encoder.provenance_hash == f.provenance_hash());
  // The returned parameters are the best-validation snapshot.
  double best = *std::max_element(result.val_ap_history.begin(),
                                  result.val_ap_history.end());
  CHECK(validation_ap(result.encoder, w.validation, w.store, w.embeddings) ==
        doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("tune_k: single-value grid returns it; ties take the smaller k") {
  auto w = make_world(37, tiny_options());
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  auto encoder = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   6, 1);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 64;
  cfg.seed = 5;

  cfg.k_grid = {3};
  CHECK(tune_k(encoder, w.pairs, f, w.store, w.embeddings, cfg, w.validation) == 3);

  // With zero epochs every k trains to the same (initial) encoder, so all
  // validation APs tie and the smallest k must win.
  cfg.epochs = 0;
  cfg.k_grid = {5, 2, 9};
  CHECK(tune_k(encoder, w.pairs, f, w.store, w.embeddings, cfg, w.validation) == 2);
}

TEST_CASE("tune_k: empty validation rejected") {
  auto w = make_world(41, tiny_options());
  PatternScorer f(PatternMethod::Ppmi, w.pairs);
  auto encoder = init_encoder_pair(EncoderVariant::W2v, w.embeddings.dimension,
                                   6, 1);
  TrainConfig cfg;
  std::vector<ValidationPair> empty;
  CHECK_THROWS_AS(
      tune_k(encoder, w.pairs, f, w.store, w.embeddings, cfg, empty),
      DomainError);
}

TEST_CASE("TrainConfig::validate rejects degenerate settings") {
  TrainConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}
