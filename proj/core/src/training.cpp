#include "comhyper/training.hpp"

#include <algorithm>
#include <cmath>

#include "comhyper/metrics.hpp"

namespace comhyper {

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "adam") return Optimizer::Adam;
  throw ParseError("unknown optimizer: " + s);
}

void TrainConfig::validate() const {
  if (k < 1) throw DomainError("k must be >= 1");
  if (batch_size < 1) throw DomainError("batch_size must be >= 1");
  if (learning_rate <= 0.0) throw DomainError("learning_rate must be > 0");
}

std::vector<std::pair<WordId, WordId>> sample_delta(
    WordId x, const std::vector<WordId>& vp_sorted, std::size_t k,
    std::mt19937_64& rng) {
  if (k < 1) throw DomainError("sample_delta: k must be >= 1");
  if (vp_sorted.empty()) throw DomainError("sample_delta: empty V_P");
  auto pos_it = std::lower_bound(vp_sorted.begin(), vp_sorted.end(), x);
  if (pos_it == vp_sorted.end() || *pos_it != x) {
    throw DomainError("sample_delta: x not in V_P");
  }
  const std::size_t pos = static_cast<std::size_t>(pos_it - vp_sorted.begin());
  const std::size_t m = vp_sorted.size();
  // Delta_x enumerated as (x, vp[0..m-1]) then (vp[j], x) for vp[j] != x.
  std::uniform_int_distribution<std::size_t> pick(0, 2 * m - 2);
  std::vector<std::pair<WordId, WordId>> samples;
  samples.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t u = pick(rng);
    if (u < m) {
      samples.emplace_back(x, vp_sorted[u]);
    } else {
      std::size_t j = u - m;
      if (j >= pos) ++j;  // skip x itself; (x,x) already counted above
      samples.emplace_back(vp_sorted[j], x);
    }
  }
  return samples;
}

std::vector<TrainingSample> make_batch(
    const std::vector<std::pair<WordId, WordId>>& pairs,
    const PatternScorer& f) {
  std::vector<TrainingSample> samples;
  samples.reserve(pairs.size());
  for (const auto& [hypo, hyper] : pairs) {
    samples.push_back({hypo, hyper, f.score(hypo, hyper)});
  }
  return samples;
}

double sample_loss(const TrainingSample& sample, const EncoderPair& encoder,
                   const ContextStore& store, const EmbeddingTable& embeddings) {
  double g = g_score(encoder, sample.hypo, sample.hyper, store, embeddings);
  double d = g - sample.target;
  return d * d;
}

namespace {

// Accumulates the gradient of sample_loss into `grad` (EncoderPair layout)
// scaled by `weight`; returns the loss.
double accumulate_sample_gradient(const TrainingSample& sample,
                                  const EncoderPair& encoder,
                                  const ContextStore& store,
                                  const EmbeddingTable& embeddings,
                                  double weight, double* grad) {
  Eigen::VectorXd xh = encode_side(encoder.hypo_side, sample.hypo, store, embeddings);
  Eigen::VectorXd yh = encode_side(encoder.hyper_side, sample.hyper, store, embeddings);
  double d = xh.dot(yh) - sample.target;
  double coeff = 2.0 * d * weight;
  encode_side_backward(encoder.hypo_side, sample.hypo, store, embeddings,
                       coeff * yh, grad);
  encode_side_backward(encoder.hyper_side, sample.hyper, store, embeddings,
                       coeff * xh, grad + encoder.hypo_side.param_count());
  return d * d;
}

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::size_t t = 0;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit AdamState(Eigen::Index n)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
    ++t;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v.array().matrix() + (1.0 - kBeta2) * grad.array().square().matrix();
    double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    theta -= (lr / bias1) * m.cwiseQuotient(
        ((v / bias2).array().sqrt() + kEps).matrix());
  }
};

}  // namespace

double validation_ap(const EncoderPair& encoder,
                     const std::vector<ValidationPair>& validation,
                     const ContextStore& store, const EmbeddingTable& embeddings) {
  std::vector<double> scores;
  std::vector<bool> labels;
  scores.reserve(validation.size());
  labels.reserve(validation.size());
  for (const auto& p : validation) {
    scores.push_back(g_score(encoder, p.hypo, p.hyper, store, embeddings));
    labels.push_back(p.positive);
  }
  return average_precision(scores, labels);
}

TrainResult train(const EncoderPair& initial, const ExtractedPairs& pairs,
                  const PatternScorer& f, const ContextStore& store,
                  const EmbeddingTable& embeddings, const TrainConfig& config,
                  const std::vector<ValidationPair>* validation) {
  config.validate();
  TrainResult result;
  result.encoder = initial;
  result.encoder.provenance_hash = f.provenance_hash();

  const std::vector<WordId> vp = pairs.ip_words_sorted();
  if (vp.empty()) throw DomainError("train: empty V_P");

  const auto n_params = static_cast<Eigen::Index>(result.encoder.param_count());
  Eigen::VectorXd theta = result.encoder.params();
  Eigen::VectorXd grad(n_params);
  AdamState adam(n_params);
  std::mt19937_64 rng(config.seed);

  double best_ap = -1.0;
  Eigen::VectorXd best_theta = theta;
  std::size_t epochs_since_best = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::pair<WordId, WordId>> epoch_pairs;
    epoch_pairs.reserve(vp.size() * config.k);
    for (WordId x : vp) {
      auto drawn = sample_delta(x, vp, config.k, rng);
      epoch_pairs.insert(epoch_pairs.end(), drawn.begin(), drawn.end());
    }
    std::shuffle(epoch_pairs.begin(), epoch_pairs.end(), rng);
    std::vector<TrainingSample> samples = make_batch(epoch_pairs, f);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < samples.size(); start += config.batch_size) {
      std::size_t end = std::min(samples.size(), start + config.batch_size);
      double inv_b = 1.0 / static_cast<double>(end - start);
      grad.setZero();
      for (std::size_t i = start; i < end; ++i) {
        epoch_loss += accumulate_sample_gradient(samples[i], result.encoder, store,
                                                 embeddings, inv_b, grad.data());
      }
      if (!grad.allFinite()) {
        throw TrainingDivergedError("gradient diverged", static_cast<int>(epoch));
      }
      if (config.optimizer == Optimizer::Adam) {
        adam.step(theta, grad, config.learning_rate);
      } else {
        theta -= config.learning_rate * grad;
      }
      result.encoder.set_params(theta);
    }
    double mean_loss = epoch_loss / static_cast<double>(samples.size());
    if (!std::isfinite(mean_loss)) {
      throw TrainingDivergedError("loss diverged", static_cast<int>(epoch));
    }
    result.loss_history.push_back(mean_loss);

    if (validation != nullptr && !validation->empty()) {
      double ap = validation_ap(result.encoder, *validation, store, embeddings);
      result.val_ap_history.push_back(ap);
      if (ap > best_ap) {
        best_ap = ap;
        best_theta = theta;
        epochs_since_best = 0;
      } else if (++epochs_since_best >= config.patience) {
        break;
      }
    }
  }

  if (validation != nullptr && !validation->empty() && best_ap >= 0.0) {
    result.encoder.set_params(best_theta);
  }
  return result;
}

double grad_check(const EncoderPair& encoder, const TrainingSample& sample,
                  const ContextStore& store, const EmbeddingTable& embeddings,
                  double epsilon) {
  if (epsilon < 1e-7 || epsilon > 1e-3) {
    throw DomainError("grad_check: epsilon out of [1e-7, 1e-3]");
  }
  EncoderPair probe = encoder;
  const auto n = static_cast<Eigen::Index>(probe.param_count());
  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(n);
  accumulate_sample_gradient(sample, probe, store, embeddings, 1.0,
                             analytic.data());
  Eigen::VectorXd theta = probe.params();
  double max_rel = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double saved = theta[i];
    theta[i] = saved + epsilon;
    probe.set_params(theta);
    double lp = sample_loss(sample, probe, store, embeddings);
    theta[i] = saved - epsilon;
    probe.set_params(theta);
    double lm = sample_loss(sample, probe, store, embeddings);
    theta[i] = saved;
    double numeric = (lp - lm) / (2.0 * epsilon);
    double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1.0});
    max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
  }
  probe.set_params(theta);
  return max_rel;
}

std::size_t tune_k(const EncoderPair& initial, const ExtractedPairs& pairs,
                   const PatternScorer& f, const ContextStore& store,
                   const EmbeddingTable& embeddings, TrainConfig config,
                   const std::vector<ValidationPair>& validation) {
  if (config.k_grid.empty()) throw DomainError("tune_k: empty k grid");
  if (validation.empty()) throw DomainError("tune_k: empty validation set");
  std::vector<std::size_t> grid = config.k_grid;
  std::sort(grid.begin(), grid.end());
  std::size_t best_k = 0;
  double best_ap = -1.0;
  for (std::size_t k : grid) {
    config.k = k;
    TrainResult result =
        train(initial, pairs, f, store, embeddings, config, &validation);
    double ap = validation_ap(result.encoder, validation, store, embeddings);
    if (ap > best_ap) {  // ties keep the smaller k (grid is sorted)
      best_ap = ap;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace comhyper
