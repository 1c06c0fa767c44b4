#pragma once

#include <random>
#include <vector>

#include "comhyper/encoders.hpp"
#include "comhyper/pattern_model.hpp"

namespace comhyper {

enum class Optimizer { Sgd, Adam };
Optimizer optimizer_from_string(const std::string& s);

struct TrainConfig {
  std::size_t k = 10;            // samples per IP word per epoch
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::Adam;
  std::vector<std::size_t> k_grid = {1, 3, 5, 10, 100, 200, 400, 800};
  std::size_t patience = 5;      // early-stop patience on validation AP

  void validate() const;
};

struct TrainingSample {
  WordId hypo;
  WordId hyper;
  double target;  // f(hypo, hyper)
};

// k i.i.d. uniform draws from Delta_x = {(x,y)} ∪ {(y,x)} over V_P, with
// (x,x) counted once, so |Delta_x| = 2|V_P| - 1.
std::vector<std::pair<WordId, WordId>> sample_delta(
    WordId x, const std::vector<WordId>& vp_sorted, std::size_t k,
    std::mt19937_64& rng);

std::vector<TrainingSample> make_batch(
    const std::vector<std::pair<WordId, WordId>>& pairs,
    const PatternScorer& f);

// (g(x,y) - f(x,y))^2
double sample_loss(const TrainingSample& sample, const EncoderPair& encoder,
                   const ContextStore& store, const EmbeddingTable& embeddings);

struct TrainResult {
  EncoderPair encoder;
  std::vector<double> loss_history;     // per-epoch mean loss
  std::vector<double> val_ap_history;   // empty without validation
};

struct ValidationPair {
  WordId hypo;
  WordId hyper;
  bool positive;
};

// Regresses g onto f over uniform Delta_x samples, re-drawn each epoch.
// Embeddings stay frozen. Deterministic given config.seed. With a
// validation set, stops early when AP fails to improve for
// config.patience epochs and returns the best-AP parameters.
TrainResult train(const EncoderPair& initial, const ExtractedPairs& pairs,
                  const PatternScorer& f, const ContextStore& store,
                  const EmbeddingTable& embeddings, const TrainConfig& config,
                  const std::vector<ValidationPair>* validation = nullptr);

// Validation AP of g alone on the given pairs.
double validation_ap(const EncoderPair& encoder,
                     const std::vector<ValidationPair>& validation,
                     const ContextStore& store, const EmbeddingTable& embeddings);

// Max relative error between the analytic gradient of sample_loss and
// central finite differences over every parameter.
double grad_check(const EncoderPair& encoder, const TrainingSample& sample,
                  const ContextStore& store, const EmbeddingTable& embeddings,
                  double epsilon = 1e-5);

// Trains once per k in config.k_grid and returns the k with the highest
// validation AP; ties go to the smaller k.
std::size_t tune_k(const EncoderPair& initial, const ExtractedPairs& pairs,
                   const PatternScorer& f, const ContextStore& store,
                   const EmbeddingTable& embeddings, TrainConfig config,
                   const std::vector<ValidationPair>& validation);

}  // namespace comhyper
