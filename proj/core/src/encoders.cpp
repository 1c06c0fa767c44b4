#include "comhyper/encoders.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace comhyper {

EncoderVariant encoder_variant_from_string(const std::string& s) {
  if (s == "w2v") return EncoderVariant::W2v;
  if (s == "nbow") return EncoderVariant::Nbow;
  if (s == "han") return EncoderVariant::Han;
  throw ParseError("unknown encoder variant: " + s);
}

std::string to_string(EncoderVariant v) {
  switch (v) {
    case EncoderVariant::W2v: return "w2v";
    case EncoderVariant::Nbow: return "nbow";
    case EncoderVariant::Han: return "han";
  }
  return "?";
}

std::size_t MlpParams::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    n += static_cast<std::size_t>(l.weight.size()) +
         static_cast<std::size_t>(l.bias.size());
  }
  return n;
}

void MlpParams::copy_to(double* dst) const {
  for (const auto& l : layers) {
    Eigen::Map<Eigen::MatrixXd>(dst, l.weight.rows(), l.weight.cols()) = l.weight;
    dst += l.weight.size();
    Eigen::Map<Eigen::VectorXd>(dst, l.bias.size()) = l.bias;
    dst += l.bias.size();
  }
}

void MlpParams::copy_from(const double* src) {
  for (auto& l : layers) {
    l.weight = Eigen::Map<const Eigen::MatrixXd>(src, l.weight.rows(), l.weight.cols());
    src += l.weight.size();
    l.bias = Eigen::Map<const Eigen::VectorXd>(src, l.bias.size());
    src += l.bias.size();
  }
}

namespace {

Eigen::VectorXd apply_activation(Activation act, const Eigen::VectorXd& z) {
  if (act == Activation::Tanh) return z.array().tanh();
  return z.cwiseMax(0.0);
}

Eigen::VectorXd activation_grad(Activation act, const Eigen::VectorXd& activated) {
  if (act == Activation::Tanh) {
    return (1.0 - activated.array().square()).matrix();
  }
  return (activated.array() > 0.0).cast<double>().matrix();
}

}  // namespace

Eigen::VectorXd mlp_forward(const MlpParams& mlp, const Eigen::VectorXd& input) {
  Eigen::VectorXd a = input;
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    Eigen::VectorXd z = mlp.layers[k].weight * a + mlp.layers[k].bias;
    a = (k + 1 < mlp.layers.size()) ? apply_activation(mlp.activation, z) : z;
  }
  return a;
}

Eigen::VectorXd mlp_backward(const MlpParams& mlp, const Eigen::VectorXd& input,
                             const Eigen::VectorXd& upstream, double* grad) {
  const std::size_t L = mlp.layers.size();
  std::vector<Eigen::VectorXd> activations(L + 1);
  activations[0] = input;
  for (std::size_t k = 0; k < L; ++k) {
    Eigen::VectorXd z = mlp.layers[k].weight * activations[k] + mlp.layers[k].bias;
    activations[k + 1] = (k + 1 < L) ? apply_activation(mlp.activation, z) : z;
  }
  // Per-layer gradient offsets within the flat region.
  std::vector<double*> offsets(L);
  double* p = grad;
  for (std::size_t k = 0; k < L; ++k) {
    offsets[k] = p;
    p += mlp.layers[k].weight.size() + mlp.layers[k].bias.size();
  }
  Eigen::VectorXd delta = upstream;
  for (std::size_t k = L; k-- > 0;) {
    if (k + 1 < L) {
      delta = delta.cwiseProduct(activation_grad(mlp.activation, activations[k + 1]));
    }
    const auto& layer = mlp.layers[k];
    Eigen::Map<Eigen::MatrixXd> gw(offsets[k], layer.weight.rows(), layer.weight.cols());
    gw += delta * activations[k].transpose();
    Eigen::Map<Eigen::VectorXd> gb(offsets[k] + layer.weight.size(), layer.bias.size());
    gb += delta;
    delta = layer.weight.transpose() * delta;
  }
  return delta;
}

std::size_t AttentionParams::param_count() const {
  return static_cast<std::size_t>(proj.size()) + static_cast<std::size_t>(query.size());
}

void AttentionParams::copy_to(double* dst) const {
  Eigen::Map<Eigen::MatrixXd>(dst, proj.rows(), proj.cols()) = proj;
  Eigen::Map<Eigen::VectorXd>(dst + proj.size(), query.size()) = query;
}

void AttentionParams::copy_from(const double* src) {
  proj = Eigen::Map<const Eigen::MatrixXd>(src, proj.rows(), proj.cols());
  query = Eigen::Map<const Eigen::VectorXd>(src + proj.size(), query.size());
}

AttendResult attend(const std::vector<Eigen::VectorXd>& items,
                    const AttentionParams& params) {
  if (items.empty()) throw DomainError("attend: no items");
  const auto n = static_cast<Eigen::Index>(items.size());
  Eigen::VectorXd scores(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    scores[j] = params.query.dot((params.proj * items[j]).array().tanh().matrix());
  }
  double m = scores.maxCoeff();
  Eigen::VectorXd w = (scores.array() - m).exp();
  w /= w.sum();
  AttendResult result;
  result.weights = w;
  result.pooled = Eigen::VectorXd::Zero(items[0].size());
  for (Eigen::Index j = 0; j < n; ++j) {
    result.pooled += w[j] * items[j];
  }
  return result;
}

std::vector<Eigen::VectorXd> attend_backward(
    const std::vector<Eigen::VectorXd>& items, const AttentionParams& params,
    const Eigen::VectorXd& upstream_pooled, double* grad) {
  if (items.empty()) throw DomainError("attend_backward: no items");
  const auto n = static_cast<Eigen::Index>(items.size());
  std::vector<Eigen::VectorXd> tanh_proj(items.size());
  Eigen::VectorXd scores(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    tanh_proj[j] = (params.proj * items[j]).array().tanh();
    scores[j] = params.query.dot(tanh_proj[j]);
  }
  double m = scores.maxCoeff();
  Eigen::VectorXd w = (scores.array() - m).exp();
  w /= w.sum();

  // d pooled / d weights and softmax backward.
  Eigen::VectorXd dw_weights(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    dw_weights[j] = upstream_pooled.dot(items[j]);
  }
  double mixed = w.dot(dw_weights);
  Eigen::VectorXd dscores = w.cwiseProduct(dw_weights.array().matrix() -
                                           Eigen::VectorXd::Constant(n, mixed));

  Eigen::Map<Eigen::MatrixXd> gproj(grad, params.proj.rows(), params.proj.cols());
  Eigen::Map<Eigen::VectorXd> gquery(grad + params.proj.size(), params.query.size());
  std::vector<Eigen::VectorXd> ditems(items.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    gquery += dscores[j] * tanh_proj[j];
    Eigen::VectorXd dz = dscores[j] *
        params.query.cwiseProduct((1.0 - tanh_proj[j].array().square()).matrix());
    gproj += dz * items[j].transpose();
    ditems[j] = params.proj.transpose() * dz + w[j] * upstream_pooled;
  }
  return ditems;
}

std::size_t HanParams::param_count() const {
  return word_attn.param_count() + ctx_attn.param_count();
}

void HanParams::copy_to(double* dst) const {
  word_attn.copy_to(dst);
  ctx_attn.copy_to(dst + word_attn.param_count());
}

void HanParams::copy_from(const double* src) {
  word_attn.copy_from(src);
  ctx_attn.copy_from(src + word_attn.param_count());
}

std::size_t EncoderSide::param_count() const {
  return variant == EncoderVariant::Han ? han.param_count() : mlp.param_count();
}

void EncoderSide::copy_to(double* dst) const {
  if (variant == EncoderVariant::Han) {
    han.copy_to(dst);
  } else {
    mlp.copy_to(dst);
  }
}

void EncoderSide::copy_from(const double* src) {
  if (variant == EncoderVariant::Han) {
    han.copy_from(src);
  } else {
    mlp.copy_from(src);
  }
}

std::size_t EncoderPair::param_count() const {
  return hypo_side.param_count() + hyper_side.param_count();
}

Eigen::VectorXd EncoderPair::params() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(param_count()));
  hypo_side.copy_to(flat.data());
  hyper_side.copy_to(flat.data() + hypo_side.param_count());
  return flat;
}

void EncoderPair::set_params(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != param_count()) {
    throw StateError("parameter vector size mismatch");
  }
  hypo_side.copy_from(flat.data());
  hyper_side.copy_from(flat.data() + hypo_side.param_count());
}

namespace {

void init_uniform(Eigen::MatrixXd& m, std::size_t fan_in, std::mt19937_64& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  }
}

void init_uniform(Eigen::VectorXd& v, std::size_t fan_in, std::mt19937_64& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
}

EncoderSide init_side(EncoderVariant variant, std::size_t emb_dim,
                      std::size_t out_dim, std::mt19937_64& rng) {
  EncoderSide side;
  side.variant = variant;
  const auto ed = static_cast<Eigen::Index>(emb_dim);
  const auto od = static_cast<Eigen::Index>(out_dim);
  if (variant == EncoderVariant::Han) {
    side.han.word_attn.proj.resize(ed, ed);
    side.han.word_attn.query.resize(ed);
    side.han.ctx_attn.proj.resize(ed, ed);
    side.han.ctx_attn.query.resize(ed);
    init_uniform(side.han.word_attn.proj, emb_dim, rng);
    init_uniform(side.han.word_attn.query, emb_dim, rng);
    init_uniform(side.han.ctx_attn.proj, emb_dim, rng);
    init_uniform(side.han.ctx_attn.query, emb_dim, rng);
  } else {
    side.mlp.layers.resize(2);
    side.mlp.layers[0].weight.resize(od, ed);
    side.mlp.layers[0].bias = Eigen::VectorXd::Zero(od);
    side.mlp.layers[1].weight.resize(od, od);
    side.mlp.layers[1].bias = Eigen::VectorXd::Zero(od);
    init_uniform(side.mlp.layers[0].weight, emb_dim, rng);
    init_uniform(side.mlp.layers[1].weight, out_dim, rng);
  }
  return side;
}

}  // namespace

EncoderPair init_encoder_pair(EncoderVariant variant, std::size_t embedding_dim,
                              std::size_t output_dim, std::uint64_t seed) {
  if (embedding_dim < 1) throw DomainError("embedding_dim must be >= 1");
  if (output_dim < 1) throw DomainError("output_dim must be >= 1");
  EncoderPair pair;
  pair.variant = variant;
  pair.embedding_dim = embedding_dim;
  // Attention pooling emits weighted sums of embeddings.
  pair.output_dim = variant == EncoderVariant::Han ? embedding_dim : output_dim;
  pair.init_seed = seed;
  std::mt19937_64 rng(seed);
  pair.hypo_side = init_side(variant, embedding_dim, pair.output_dim, rng);
  pair.hyper_side = init_side(variant, embedding_dim, pair.output_dim, rng);
  return pair;
}

Eigen::VectorXd encode_w2v(WordId word, const EmbeddingTable& embeddings,
                           const MlpParams& side_params) {
  if (!embeddings.has(word)) {
    throw MissingEmbeddingError("no embedding for word id " + std::to_string(word));
  }
  return mlp_forward(side_params, embeddings.vec(word));
}

Eigen::VectorXd encode_context_mean(const Context& context,
                                    const EmbeddingTable& embeddings) {
  Eigen::VectorXd sum;
  std::size_t n = 0;
  for (WordId t : context.tokens) {
    if (!embeddings.has(t)) continue;
    if (n == 0) {
      sum = embeddings.vec(t);
    } else {
      sum += embeddings.vec(t);
    }
    ++n;
  }
  if (n == 0) throw NoContextError("context has no embeddable token");
  return sum / static_cast<double>(n);
}

namespace {

std::vector<const Context*> usable_contexts(WordId word, const ContextStore& store,
                                            const EmbeddingTable& embeddings) {
  std::vector<const Context*> usable;
  if (word < store.contexts.size()) {
    for (const auto& ctx : store.contexts[word]) {
      bool any = false;
      for (WordId t : ctx.tokens) {
        if (embeddings.has(t)) {
          any = true;
          break;
        }
      }
      if (any) usable.push_back(&ctx);
    }
  }
  if (usable.empty()) {
    throw NoContextError("no usable context for word id " + std::to_string(word));
  }
  return usable;
}

std::vector<Eigen::VectorXd> context_token_embeddings(
    const Context& ctx, const EmbeddingTable& embeddings) {
  std::vector<Eigen::VectorXd> vecs;
  for (WordId t : ctx.tokens) {
    if (embeddings.has(t)) vecs.push_back(embeddings.vec(t));
  }
  return vecs;
}

}  // namespace

Eigen::VectorXd encode_nbow(WordId word, const ContextStore& store,
                            const EmbeddingTable& embeddings,
                            const MlpParams& side_params) {
  auto contexts = usable_contexts(word, store, embeddings);
  Eigen::VectorXd sum;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    Eigen::VectorXd out =
        mlp_forward(side_params, encode_context_mean(*contexts[i], embeddings));
    if (i == 0) {
      sum = out;
    } else {
      sum += out;
    }
  }
  return sum / static_cast<double>(contexts.size());
}

Eigen::VectorXd encode_han(WordId word, const ContextStore& store,
                           const EmbeddingTable& embeddings,
                           const HanParams& side_params) {
  auto contexts = usable_contexts(word, store, embeddings);
  std::vector<Eigen::VectorXd> pooled_contexts;
  pooled_contexts.reserve(contexts.size());
  for (const Context* ctx : contexts) {
    auto items = context_token_embeddings(*ctx, embeddings);
    pooled_contexts.push_back(attend(items, side_params.word_attn).pooled);
  }
  return attend(pooled_contexts, side_params.ctx_attn).pooled;
}

Eigen::VectorXd encode_side(const EncoderSide& side, WordId word,
                            const ContextStore& store,
                            const EmbeddingTable& embeddings) {
  switch (side.variant) {
    case EncoderVariant::W2v:
      return encode_w2v(word, embeddings, side.mlp);
    case EncoderVariant::Nbow:
      return encode_nbow(word, store, embeddings, side.mlp);
    case EncoderVariant::Han:
      return encode_han(word, store, embeddings, side.han);
  }
  throw StateError("unreachable encoder variant");
}

void encode_side_backward(const EncoderSide& side, WordId word,
                          const ContextStore& store,
                          const EmbeddingTable& embeddings,
                          const Eigen::VectorXd& upstream, double* grad) {
  switch (side.variant) {
    case EncoderVariant::W2v: {
      if (!embeddings.has(word)) {
        throw MissingEmbeddingError("no embedding for word id " +
                                    std::to_string(word));
      }
      mlp_backward(side.mlp, embeddings.vec(word), upstream, grad);
      return;
    }
    case EncoderVariant::Nbow: {
      auto contexts = usable_contexts(word, store, embeddings);
      Eigen::VectorXd scaled = upstream / static_cast<double>(contexts.size());
      for (const Context* ctx : contexts) {
        mlp_backward(side.mlp, encode_context_mean(*ctx, embeddings), scaled, grad);
      }
      return;
    }
    case EncoderVariant::Han: {
      auto contexts = usable_contexts(word, store, embeddings);
      std::vector<std::vector<Eigen::VectorXd>> items_per_ctx(contexts.size());
      std::vector<Eigen::VectorXd> pooled_contexts(contexts.size());
      for (std::size_t i = 0; i < contexts.size(); ++i) {
        items_per_ctx[i] = context_token_embeddings(*contexts[i], embeddings);
        pooled_contexts[i] = attend(items_per_ctx[i], side.han.word_attn).pooled;
      }
      double* word_grad = grad;
      double* ctx_grad = grad + side.han.word_attn.param_count();
      auto dcontexts =
          attend_backward(pooled_contexts, side.han.ctx_attn, upstream, ctx_grad);
      for (std::size_t i = 0; i < contexts.size(); ++i) {
        attend_backward(items_per_ctx[i], side.han.word_attn, dcontexts[i],
                        word_grad);
      }
      return;
    }
  }
}

double g_score(const EncoderPair& pair, WordId x, WordId y,
               const ContextStore& store, const EmbeddingTable& embeddings) {
  Eigen::VectorXd xh, yh;
  try {
    xh = encode_side(pair.hypo_side, x, store, embeddings);
  } catch (const MissingEmbeddingError& e) {
    throw MissingEmbeddingError(std::string("hypo side: ") + e.what());
  } catch (const NoContextError& e) {
    throw NoContextError(std::string("hypo side: ") + e.what());
  }
  try {
    yh = encode_side(pair.hyper_side, y, store, embeddings);
  } catch (const MissingEmbeddingError& e) {
    throw MissingEmbeddingError(std::string("hyper side: ") + e.what());
  } catch (const NoContextError& e) {
    throw NoContextError(std::string("hyper side: ") + e.what());
  }
  return xh.dot(yh);
}

namespace {

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_encoder_pair(const std::string& path, const EncoderPair& pair) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  out << "comhyper-encoder\t1\t" << to_string(pair.variant) << '\t'
      << pair.embedding_dim << '\t' << pair.output_dim << '\t' << pair.init_seed
      << '\t' << pair.provenance_hash << '\n';
  Eigen::VectorXd flat = pair.params();
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    out << format_exact(flat[i]) << '\n';
  }
}

EncoderPair load_encoder_pair(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open encoder checkpoint: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty encoder checkpoint: " + path);
  std::istringstream hs(header);
  std::string magic, variant_str;
  int version = 0;
  std::size_t emb_dim = 0, out_dim = 0;
  std::uint64_t seed = 0, provenance = 0;
  hs >> magic >> version >> variant_str >> emb_dim >> out_dim >> seed >> provenance;
  if (magic != "comhyper-encoder" || version != 1) {
    throw ParseError("bad encoder checkpoint header in " + path);
  }
  EncoderPair pair = init_encoder_pair(encoder_variant_from_string(variant_str),
                                       emb_dim, out_dim, seed);
  pair.provenance_hash = provenance;
  Eigen::VectorXd flat(static_cast<Eigen::Index>(pair.param_count()));
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    if (!(in >> flat[i])) {
      throw ParseError("truncated encoder checkpoint: " + path);
    }
  }
  pair.set_params(flat);
  return pair;
}

}  // namespace comhyper
