#pragma once

#include <cstddef>
#include <string>

#include "exhird/errors.hpp"

namespace exhird::model {

enum class DecoderKind { hierarchical, sequential };

inline const char* to_string(DecoderKind k) { return k == DecoderKind::hierarchical ? "hierarchical" : "sequential"; }

inline DecoderKind parse_decoder_kind(const std::string& s) {
  if (s == "hierarchical") return DecoderKind::hierarchical;
  if (s == "sequential") return DecoderKind::sequential;
  throw ConfigError("unknown decoder '" + s + "' (expected hierarchical or sequential)");
}

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 100;   // d_e
  std::size_t hidden_dim = 300;  // d; each encoder direction gets d / 2
  std::size_t encoder_layers = 2;
  DecoderKind decoder = DecoderKind::hierarchical;
  bool share_embeddings = true;

  void validate() const {
    if (vocab_size < 6) throw ConfigError("model vocabulary must hold the special tokens");
    if (embed_dim == 0 || hidden_dim == 0) throw ConfigError("model dimensions must be positive");
    if (hidden_dim % 2 != 0) throw ConfigError("hidden_dim must be even (two encoder directions)");
    if (encoder_layers == 0) throw ConfigError("encoder needs at least one layer");
  }
};

}  // namespace exhird::model
