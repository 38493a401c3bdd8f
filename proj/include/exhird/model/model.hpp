#pragma once

#include <cstdint>
#include <string>

#include "exhird/model/config.hpp"
#include "exhird/model/gru.hpp"
#include "exhird/nn/ops.hpp"
#include "exhird/nn/random.hpp"

namespace exhird::model {

inline std::string encoder_prefix(std::size_t layer, bool forward) {
  return "encoder.l" + std::to_string(layer) + (forward ? ".fwd" : ".bwd");
}

/// Configuration plus the parameter store of one keyphrase generation model.
///
/// Parameter map (d = hidden_dim, e = embed_dim, V = vocab_size):
///   embedding            V x e   shared by encoder and decoder by default
///   decoder.embedding    V x e   only when embeddings are not shared
///   encoder.l<n>.{fwd,bwd}       GRU, hidden d/2, input e (n = 0) or d
///   decoder.start        e       start-token embedding fed at WD step 0
///   pd.gru, pd.attn      GRU(d -> d), d x d      hierarchical only
///   wd.gru               GRU(d + e -> d)
///   wd.attn              d x d   bilinear word-level attention
///   wd.combine           d x 2d  attentional vector tanh(W [h; a])
///   out.W, out.b         V x d, V
///   gate.w, gate.b       1 x d, 1
template <class T>
class Model {
 public:
  explicit Model(ModelConfig config) : config_(config) {
    config_.validate();
    const auto V = config_.vocab_size, e = config_.embed_dim, d = config_.hidden_dim;
    params_.add("embedding", {V, e});
    if (!config_.share_embeddings) params_.add("decoder.embedding", {V, e});
    for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
      const std::size_t in = l == 0 ? e : d;
      register_gru(params_, encoder_prefix(l, true), in, d / 2);
      register_gru(params_, encoder_prefix(l, false), in, d / 2);
    }
    params_.add("decoder.start", {e});
    if (config_.decoder == DecoderKind::hierarchical) {
      register_gru(params_, "pd.gru", d, d);
      params_.add("pd.attn", {d, d});
    }
    register_gru(params_, "wd.gru", d + e, d);
    params_.add("wd.attn", {d, d});
    params_.add("wd.combine", {d, 2 * d});
    params_.add("out.W", {V, d});
    params_.add("out.b", {V});
    params_.add("gate.w", {1, d});
    params_.add("gate.b", {1});
  }

  const ModelConfig& config() const noexcept { return config_; }
  nn::ParameterStore<T>& params() noexcept { return params_; }
  const nn::ParameterStore<T>& params() const noexcept { return params_; }

  /// U[-0.1, 0.1] for weights and embeddings, zero biases.
  void initialize(std::uint64_t seed, double bound = 0.1) {
    nn::Rng rng(seed);
    params_.init_uniform(rng, bound);
  }

 private:
  ModelConfig config_;
  nn::ParameterStore<T> params_;
};

/// A model's parameters bound as leaves of one graph.
template <class T>
struct BoundModel {
  Graph<T>* graph = nullptr;
  const ModelConfig* config = nullptr;
  Var<T> embedding, decoder_embedding, start;
  std::vector<GruCell<T>> encoder_fwd, encoder_bwd;
  GruCell<T> pd_gru, wd_gru;
  Var<T> pd_attn, wd_attn, wd_combine, out_W, out_b, gate_w, gate_b;

  BoundModel(Graph<T>& g, Model<T>& m) : graph(&g), config(&m.config()) {
    auto& p = m.params();
    embedding = g.param(p.at("embedding"));
    decoder_embedding = m.config().share_embeddings ? embedding : g.param(p.at("decoder.embedding"));
    for (std::size_t l = 0; l < m.config().encoder_layers; ++l) {
      encoder_fwd.push_back(GruCell<T>::bind(g, p, encoder_prefix(l, true)));
      encoder_bwd.push_back(GruCell<T>::bind(g, p, encoder_prefix(l, false)));
    }
    start = g.param(p.at("decoder.start"));
    if (m.config().decoder == DecoderKind::hierarchical) {
      pd_gru = GruCell<T>::bind(g, p, "pd.gru");
      pd_attn = g.param(p.at("pd.attn"));
    }
    wd_gru = GruCell<T>::bind(g, p, "wd.gru");
    wd_attn = g.param(p.at("wd.attn"));
    wd_combine = g.param(p.at("wd.combine"));
    out_W = g.param(p.at("out.W"));
    out_b = g.param(p.at("out.b"));
    gate_w = g.param(p.at("gate.w"));
    gate_b = g.param(p.at("gate.b"));
  }

  std::size_t hidden() const { return config->hidden_dim; }
  std::size_t embed() const { return config->embed_dim; }
  std::size_t vocab() const { return config->vocab_size; }

  Var<T> zeros(std::size_t n) const { return graph->constant(nn::Tensor<T>(nn::Shape{n})); }
};

}  // namespace exhird::model
