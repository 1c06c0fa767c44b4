#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "comhyper/corpus.hpp"

namespace comhyper {

enum class EncoderVariant { W2v, Nbow, Han };
EncoderVariant encoder_variant_from_string(const std::string& s);
std::string to_string(EncoderVariant v);

enum class Activation { Tanh, Relu };

struct MlpLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

// Hidden layers use `activation`, the output layer is linear.
struct MlpParams {
  std::vector<MlpLayer> layers;
  Activation activation = Activation::Tanh;

  std::size_t param_count() const;
  void copy_to(double* dst) const;
  void copy_from(const double* src);
};

Eigen::VectorXd mlp_forward(const MlpParams& mlp, const Eigen::VectorXd& input);

// Accumulates parameter gradients into `grad` (laid out as copy_to) and
// returns the gradient w.r.t. the input.
Eigen::VectorXd mlp_backward(const MlpParams& mlp, const Eigen::VectorXd& input,
                             const Eigen::VectorXd& upstream, double* grad);

struct AttentionParams {
  Eigen::MatrixXd proj;   // W_a, d_a x d_in
  Eigen::VectorXd query;  // w_a, d_a

  std::size_t param_count() const;
  void copy_to(double* dst) const;
  void copy_from(const double* src);
};

struct AttendResult {
  Eigen::VectorXd weights;  // softmax over items, sums to 1
  Eigen::VectorXd pooled;
};

// weights_j = softmax_j(w^T tanh(W c_j)), pooled = sum_j weights_j c_j.
// Softmax is max-shifted.
AttendResult attend(const std::vector<Eigen::VectorXd>& items,
                    const AttentionParams& params);

// Accumulates parameter gradients into `grad`; returns per-item input
// gradients (needed by the context level of the hierarchical encoder).
std::vector<Eigen::VectorXd> attend_backward(
    const std::vector<Eigen::VectorXd>& items, const AttentionParams& params,
    const Eigen::VectorXd& upstream_pooled, double* grad);

struct HanParams {
  AttentionParams word_attn;
  AttentionParams ctx_attn;

  std::size_t param_count() const;
  void copy_to(double* dst) const;
  void copy_from(const double* src);
};

// One side (hypo or hyper) of the encoder pair; the active member is
// chosen by `variant`.
struct EncoderSide {
  EncoderVariant variant = EncoderVariant::W2v;
  MlpParams mlp;   // W2v and Nbow
  HanParams han;   // Han

  std::size_t param_count() const;
  void copy_to(double* dst) const;
  void copy_from(const double* src);
};

struct EncoderPair {
  EncoderVariant variant = EncoderVariant::W2v;
  EncoderSide hypo_side;
  EncoderSide hyper_side;
  std::size_t output_dim = 0;
  std::size_t embedding_dim = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t provenance_hash = 0;  // hash of the pattern scorer g was trained against

  std::size_t param_count() const;
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& flat);
};

// Seeded uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] initialization. The MLP
// variants use 2 layers (embedding_dim -> output_dim -> output_dim); the
// hierarchical variant outputs in embedding space, so its output_dim is
// forced to embedding_dim.
EncoderPair init_encoder_pair(EncoderVariant variant, std::size_t embedding_dim,
                              std::size_t output_dim, std::uint64_t seed);

Eigen::VectorXd encode_w2v(WordId word, const EmbeddingTable& embeddings,
                           const MlpParams& side_params);

// Mean of embeddings of embeddable tokens; tokens without embeddings are
// skipped, a context with none raises.
Eigen::VectorXd encode_context_mean(const Context& context,
                                    const EmbeddingTable& embeddings);

Eigen::VectorXd encode_nbow(WordId word, const ContextStore& store,
                            const EmbeddingTable& embeddings,
                            const MlpParams& side_params);

Eigen::VectorXd encode_han(WordId word, const ContextStore& store,
                           const EmbeddingTable& embeddings,
                           const HanParams& side_params);

Eigen::VectorXd encode_side(const EncoderSide& side, WordId word,
                            const ContextStore& store,
                            const EmbeddingTable& embeddings);

// Accumulates d(encode_side)/d(params) . upstream into `grad` (side layout).
void encode_side_backward(const EncoderSide& side, WordId word,
                          const ContextStore& store,
                          const EmbeddingTable& embeddings,
                          const Eigen::VectorXd& upstream, double* grad);

// g(x, y) = <encode(x; hypo_side), encode(y; hyper_side)>.
double g_score(const EncoderPair& pair, WordId x, WordId y,
               const ContextStore& store, const EmbeddingTable& embeddings);

void save_encoder_pair(const std::string& path, const EncoderPair& pair);
EncoderPair load_encoder_pair(const std::string& path);

}  // namespace comhyper
