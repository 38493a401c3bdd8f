#pragma once

#include <vector>

#include "exhird/model/encoder.hpp"

namespace exhird::model {

template <class T>
struct AttentionRecord {
  Var<T> scores;       // raw bilinear scores, l_x
  Var<T> alpha;        // softmax(scores)
  Var<T> rescaled;     // alpha * beta renormalised (equals alpha without a PD step)
  Var<T> context;      // sum_k rescaled_k m_k
  Var<T> attentional;  // tanh(W_combine [h ; context])
};

template <class T>
struct OutputDistribution {
  Var<T> p;        // merged distribution over V and the document's OOV words
  Var<T> gate;     // copy probability g
  Var<T> p_vocab;  // softmax over V
  Var<T> p_copy;   // rescaled attention summed per source word, merged space
};

/// Phrase-level update h_i = GRU_pd(att_{i-1,end}, h_{i-1}).
template <class T>
Var<T> pd_step(BoundModel<T>& m, Var<T> h_prev, Var<T> prev_attentional) {
  return m.pd_gru(prev_attentional, h_prev);
}

/// beta_i = softmax(h_i^T W_pd m_n).
template <class T>
Var<T> pd_attention(const EncodedDocument<T>& enc, Var<T> h) {
  if (enc.length() == 0) throw nn::DimensionError("pd_attention: empty memory");
  return nn::softmax(nn::matvec(enc.pd_keys, h));
}

/// h_{i,0} = GRU_wd([0 ; e_start], h_i).
template <class T>
Var<T> wd_init(BoundModel<T>& m, Var<T> h_pd) {
  return m.wd_gru(nn::concat(m.zeros(m.hidden()), m.start), h_pd);
}

/// h_{i,j} = GRU_wd([att_{i,j-1} ; e_{y_{j-1}}], h_{i,j-1}).
template <class T>
Var<T> wd_step(BoundModel<T>& m, Var<T> h_prev, Var<T> prev_attentional, Var<T> prev_embedding) {
  return m.wd_gru(nn::concat(prev_attentional, prev_embedding), h_prev);
}

/// Decoder input embedding of a merged-space token (copied OOV words are fed
/// back as <unk>).
template <class T>
Var<T> token_embedding(BoundModel<T>& m, text::TokenId merged) {
  return nn::embedding(m.decoder_embedding, text::Document::input_id(merged, m.vocab()));
}

/// Word-level attention. With `beta`, the word-level weights are rescaled by
/// the phrase-level ones: rescaled_k = alpha_k beta_k / sum_n alpha_n beta_n.
template <class T>
AttentionRecord<T> wd_attention(BoundModel<T>& m, const EncodedDocument<T>& enc, Var<T> h,
                                const Var<T>* beta) {
  AttentionRecord<T> rec;
  rec.scores = nn::matvec(enc.wd_keys, h);
  rec.alpha = nn::softmax(rec.scores);
  rec.rescaled = beta ? nn::renormalized_product(rec.alpha, *beta) : rec.alpha;
  rec.context = nn::matvec_t(enc.memory, rec.rescaled);
  rec.attentional = nn::tanh(nn::matvec(m.wd_combine, nn::concat(h, rec.context)));
  return rec;
}

/// P = (1 - g) P_vocab + g P_copy over the merged id space.
template <class T>
OutputDistribution<T> output_distribution(BoundModel<T>& m, const EncodedDocument<T>& enc, Var<T> attentional,
                                          Var<T> rescaled) {
  OutputDistribution<T> out;
  out.gate = nn::sigmoid(nn::add(nn::matvec(m.gate_w, attentional), m.gate_b));
  out.p_vocab = nn::softmax(nn::add(nn::matvec(m.out_W, attentional), m.out_b));
  out.p_copy = nn::scatter_add(rescaled, enc.merged_ids, enc.merged_size);
  out.p = nn::add(nn::mul_scalar(nn::pad_to(out.p_vocab, enc.merged_size), nn::one_minus(out.gate)),
                  nn::mul_scalar(out.p_copy, out.gate));
  return out;
}

}  // namespace exhird::model
