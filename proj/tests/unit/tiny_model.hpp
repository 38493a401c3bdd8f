#pragma once

#include <vector>

#include "exhird/model/decode.hpp"
#include "exhird/text/document.hpp"

namespace exhird::testing {

inline model::ModelConfig tiny_config(std::size_t vocab, model::DecoderKind kind = model::DecoderKind::hierarchical,
                                      std::size_t layers = 2) {
  model::ModelConfig c;
  c.vocab_size = vocab;
  c.embed_dim = 3;
  c.hidden_dim = 4;
  c.encoder_layers = layers;
  c.decoder = kind;
  return c;
}

/// Weights drawn wider than the training init so gradients are not tiny.
template <class T>
model::Model<T> tiny_model(std::size_t vocab, model::DecoderKind kind = model::DecoderKind::hierarchical,
                           std::size_t layers = 2, std::uint64_t seed = 3) {
  model::Model<T> m(tiny_config(vocab, kind, layers));
  m.initialize(seed, 0.5);
  nn::Rng rng(seed + 1);
  for (std::size_t i = 0; i < m.params().size(); ++i)
    if (m.params()[i].name.ends_with(".b"))
      for (auto& v : m.params()[i].value.storage()) v = static_cast<T>(rng.uniform(-0.3, 0.3));
  return m;
}

template <class T>
std::vector<nn::Parameter<T>*> all_params(model::Model<T>& m) {
  std::vector<nn::Parameter<T>*> out;
  for (std::size_t i = 0; i < m.params().size(); ++i) out.push_back(&m.params()[i]);
  return out;
}

inline text::Vocabulary small_vocab() {
  return text::Vocabulary(std::vector<std::string>{"graph", "slam", "loop", "closure", "map"});
}

}  // namespace exhird::testing

namespace exhird::testing {

inline std::vector<text::RawSample> tiny_corpus() {
  return {
      {"graph slam", "loop closure for the map", {"graph slam", "loop closure", "mapping"}},
      {"loop closure", "graph map", {"loop closure", "map", "graph"}},
      {"slam map", "graph loop", {"slam", "graph loop", "closure"}},
      {"map closure", "slam graph closure", {"map closure", "slam"}},
  };
}

inline std::vector<text::Example> tiny_examples(const text::Vocabulary& vocab) {
  std::vector<text::Example> out;
  for (const auto& s : tiny_corpus()) out.push_back(text::make_example(s, vocab));
  return out;
}

}  // namespace exhird::testing
