#pragma once

#include <vector>

#include "exhird/exclusion.hpp"
#include "exhird/model/decoder.hpp"

namespace exhird::train {

using model::BoundModel;
using nn::Var;
using text::TokenId;

template <class T>
struct LossTerms {
  Var<T> total;       // generation + exclusive
  Var<T> generation;  // sum of token NLLs
  Var<T> exclusive;   // soft exclusion terms (zero when disabled)
  std::size_t target_tokens = 0;
};

namespace detail {

template <class T>
LossTerms<T> combine(nn::Graph<T>& g, const std::vector<Var<T>>& nll_terms, const std::vector<Var<T>>& el_terms,
                     std::size_t tokens) {
  LossTerms<T> out;
  out.generation = nn::add_scalars(g, nll_terms);
  out.exclusive = nn::add_scalars(g, el_terms);
  out.total = el_terms.empty() ? out.generation : nn::add(out.generation, out.exclusive);
  out.target_tokens = tokens;
  return out;
}

/// Gold first word of a phrase target in the merged space.
inline TokenId first_word(const text::PhraseTarget& t) {
  return t.copy_word_ids.empty() ? text::kEndOfPhraseId : t.copy_word_ids.front();
}

}  // namespace detail

/// Teacher-forced loss of the hierarchical decoder on one example.
///
/// Every phrase runs one PD step and WD steps j = 0 .. l + 1 over
/// [control, w_1 .. w_l, ";"]; a final PD step predicts "</s>" at j = 0.
/// With `exclusive_window` > 0 the soft exclusion term is added at j = 1,
/// windowed over the gold first words of previous phrases.
template <class T>
LossTerms<T> hierarchical_loss(BoundModel<T>& m, const text::Example& ex, std::size_t exclusive_window) {
  auto& g = *m.graph;
  auto enc = model::encode(m, ex.doc);
  std::vector<Var<T>> nll_terms, el_terms;
  exclusion::ExclusionWindow window(exclusive_window);

  Var<T> h = model::initial_pd_state(enc);
  Var<T> att_end = m.zeros(m.hidden());
  const std::size_t n = ex.program.phrases.size();
  for (std::size_t i = 0; i <= n; ++i) {
    const std::vector<TokenId> targets =
        i < n ? ex.program.phrases[i].sequence() : std::vector<TokenId>{text::kEndOfProgramId};
    h = model::pd_step(m, h, att_end);
    Var<T> beta = model::pd_attention(enc, h);
    Var<T> wd_h = model::wd_init(m, h);
    Var<T> att;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (j > 0) wd_h = model::wd_step(m, wd_h, att, model::token_embedding(m, targets[j - 1]));
      auto rec = model::wd_attention(m, enc, wd_h, &beta);
      att = rec.attentional;
      auto dist = model::output_distribution(m, enc, att, rec.rescaled);
      nll_terms.push_back(nn::nll(dist.p, targets[j]));
      if (j == 1 && !window.empty()) el_terms.push_back(exclusion::exclusive_loss(dist.p, targets[1], window, j));
    }
    att_end = att;
    if (i < n) window.push(detail::first_word(ex.program.phrases[i]));
  }
  return detail::combine(g, nll_terms, el_terms, nll_terms.size());
}

/// Teacher-forced loss of the sequential decoder over the flattened program.
/// The soft exclusion applies to the token after each control token.
template <class T>
LossTerms<T> sequential_loss(BoundModel<T>& m, const text::Example& ex, std::size_t exclusive_window) {
  auto& g = *m.graph;
  auto enc = model::encode(m, ex.doc);
  std::vector<Var<T>> nll_terms, el_terms;
  exclusion::ExclusionWindow window(exclusive_window);
  const std::vector<TokenId> targets = ex.program.flatten();

  Var<T> h = model::wd_init(m, model::initial_pd_state(enc));
  Var<T> att;
  std::size_t phrase_pos = 0;  // position within the current phrase, 0 = control token
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (t > 0) h = model::wd_step(m, h, att, model::token_embedding(m, targets[t - 1]));
    auto rec = model::wd_attention<T>(m, enc, h, nullptr);
    att = rec.attentional;
    auto dist = model::output_distribution(m, enc, att, rec.rescaled);
    nll_terms.push_back(nn::nll(dist.p, targets[t]));
    if (phrase_pos == 1 && !window.empty()) el_terms.push_back(exclusion::exclusive_loss(dist.p, targets[t], window, 1));
    if (phrase_pos == 1) window.push(targets[t]);
    phrase_pos = targets[t] == text::kEndOfPhraseId ? 0 : phrase_pos + 1;
  }
  return detail::combine(g, nll_terms, el_terms, nll_terms.size());
}

template <class T>
LossTerms<T> example_loss(BoundModel<T>& m, const text::Example& ex, std::size_t exclusive_window) {
  return m.config->decoder == model::DecoderKind::hierarchical ? hierarchical_loss(m, ex, exclusive_window)
                                                                : sequential_loss(m, ex, exclusive_window);
}

/// Generation loss alone (no exclusive terms).
template <class T>
Var<T> generation_loss(BoundModel<T>& m, const text::Example& ex) {
  return example_loss(m, ex, 0).generation;
}

/// Generation loss plus soft exclusion with window `k_el`.
template <class T>
Var<T> joint_loss(BoundModel<T>& m, const text::Example& ex, std::size_t k_el) {
  return example_loss(m, ex, k_el).total;
}

}  // namespace exhird::train
