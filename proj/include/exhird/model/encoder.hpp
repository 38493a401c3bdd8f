#pragma once

#include <vector>

#include "exhird/errors.hpp"
#include "exhird/model/model.hpp"
#include "exhird/text/document.hpp"

namespace exhird::model {

/// Output of the bidirectional encoder for one document.
template <class T>
struct EncodedDocument {
  Var<T> memory;          // l_x x d, row k = [forward_k ; backward_k] of the top layer
  Var<T> forward_last;    // top-layer forward state at position l_x
  Var<T> backward_first;  // top-layer backward state at position 1
  Var<T> pd_keys;         // memory * W_pd^T, so that scores = pd_keys * query
  Var<T> wd_keys;         // memory * W_wd^T
  std::vector<text::TokenId> merged_ids;  // copy target of each position
  std::size_t merged_size = 0;

  std::size_t length() const { return memory.value().rows(); }
};

/// Stacked bidirectional GRU over the document embeddings. Layer n + 1 reads
/// the concatenated [forward; backward] outputs of layer n; all initial
/// states are zero.
template <class T>
EncodedDocument<T> encode(BoundModel<T>& m, const text::Document& doc) {
  if (doc.token_ids.empty()) throw EmptyDocumentError("cannot encode an empty document");
  const std::size_t n = doc.token_ids.size();
  const std::size_t half = m.hidden() / 2;

  std::vector<Var<T>> inputs;
  inputs.reserve(n);
  for (auto id : doc.token_ids) inputs.push_back(nn::embedding(m.embedding, id));

  std::vector<Var<T>> fwd(n), bwd(n);
  for (std::size_t layer = 0; layer < m.encoder_fwd.size(); ++layer) {
    Var<T> h = m.zeros(half);
    for (std::size_t k = 0; k < n; ++k) fwd[k] = h = m.encoder_fwd[layer](inputs[k], h);
    h = m.zeros(half);
    for (std::size_t k = n; k-- > 0;) bwd[k] = h = m.encoder_bwd[layer](inputs[k], h);
    for (std::size_t k = 0; k < n; ++k) inputs[k] = nn::concat(fwd[k], bwd[k]);
  }

  EncodedDocument<T> enc;
  enc.memory = nn::stack_rows(inputs);
  enc.forward_last = fwd[n - 1];
  enc.backward_first = bwd[0];
  if (m.config->decoder == DecoderKind::hierarchical) enc.pd_keys = nn::matmul_nt(enc.memory, m.pd_attn);
  enc.wd_keys = nn::matmul_nt(enc.memory, m.wd_attn);
  enc.merged_ids = doc.merged_ids;
  enc.merged_size = doc.merged_size();
  return enc;
}

/// [forward state at the last position ; backward state at the first].
template <class T>
Var<T> initial_pd_state(const EncodedDocument<T>& enc) {
  return nn::concat(enc.forward_last, enc.backward_first);
}

}  // namespace exhird::model
