#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "exhird/exclusion.hpp"
#include "exhird/model/decoder.hpp"

namespace exhird::model {

using text::PhraseKind;
using text::TokenId;

struct DecodeLimits {
  std::size_t max_pd_steps = 20;
  std::size_t min_pd_steps = 1;
  std::size_t max_wd_words = 10;
  std::size_t max_seq_tokens = 120;  // sequential decoder only
  bool mask_start_tokens = true;     // step 0 may only emit <p_start>, <a_start> or </s>
  bool mask_control_in_words = true; // word steps may not emit control tokens or an empty phrase
  bool mask_unk = true;
};

struct DecodedPhrase {
  std::vector<TokenId> ids;  // merged ids of the words
  PhraseKind kind = PhraseKind::present;
};

struct DecodeStats {
  std::size_t exclusion_fallbacks = 0;  // windows that masked every allowed token
  std::size_t steps = 0;
};

inline constexpr TokenId kNoToken = static_cast<TokenId>(-1);

/// Highest-probability allowed id; ties go to the lowest id.
template <class T, class Allowed>
TokenId argmax_allowed(std::span<const T> p, Allowed&& allowed) {
  TokenId best = kNoToken;
  for (TokenId id = 0; id < p.size(); ++id) {
    if (!allowed(id)) continue;
    if (best == kNoToken || p[id] > p[best]) best = id;
  }
  return best;
}

namespace detail {

inline bool allowed_at_start(TokenId id, const DecodeLimits& lim, std::size_t completed) {
  if (id == text::kEndOfProgramId) return completed >= lim.min_pd_steps;
  if (!lim.mask_start_tokens) return id != text::kPadId;
  return id == text::kPresentStartId || id == text::kAbsentStartId;
}

inline bool allowed_in_word(TokenId id, const DecodeLimits& lim, std::size_t j) {
  if (id == text::kPadId) return false;
  if (lim.mask_unk && id == text::kUnkId) return false;
  if (lim.mask_control_in_words) {
    if (id == text::kPresentStartId || id == text::kAbsentStartId || id == text::kEndOfProgramId) return false;
    if (j == 1 && id == text::kEndOfPhraseId) return false;
  }
  return true;
}

/// Word choice at WD step j, with the hard exclusion applied at j = 1.
template <class T>
TokenId choose_word(std::span<const T> p, const DecodeLimits& lim, std::size_t j,
                    const exclusion::ExclusionWindow* window, DecodeStats& stats) {
  auto allowed = [&](TokenId id) { return allowed_in_word(id, lim, j); };
  if (window && j == 1 && !window->empty()) {
    auto masked = exclusion::exclusive_search_mask<T>(p, *window, j);
    const TokenId pick = argmax_allowed<T>(std::span<const T>(masked), allowed);
    if (pick != kNoToken && masked[pick] > T{0}) return pick;
    ++stats.exclusion_fallbacks;
  }
  return argmax_allowed<T>(p, allowed);
}

inline PhraseKind kind_of(TokenId control) {
  return control == text::kAbsentStartId ? PhraseKind::absent : PhraseKind::present;
}

}  // namespace detail

/// Greedy hierarchical decoding state machine over any session exposing
///   begin_phrase() -> distribution for WD step 0 of the next PD step
///   advance(token) -> distribution for the next WD step given the emitted token
///   end_phrase()   -> closes the current PD step
///
/// Step 0 decides between another phrase (<p_start>/<a_start>) and the end
/// of decoding (</s>); later steps emit words until ";" or the word cap.
/// `window` (optional) applies the hard exclusion at step 1.
template <class Session>
std::vector<DecodedPhrase> decode_hierarchical(Session& session, const DecodeLimits& lim,
                                               exclusion::ExclusionWindow* window = nullptr,
                                               DecodeStats* stats_out = nullptr) {
  using T = typename Session::value_type;
  DecodeStats stats;
  std::vector<DecodedPhrase> phrases;
  for (std::size_t i = 0; i < lim.max_pd_steps; ++i) {
    const std::vector<T> p0 = session.begin_phrase();
    ++stats.steps;
    const TokenId control = argmax_allowed<T>(
        std::span<const T>(p0), [&](TokenId id) { return detail::allowed_at_start(id, lim, phrases.size()); });
    if (control == text::kEndOfProgramId || control == kNoToken) break;
    DecodedPhrase phrase;
    phrase.kind = detail::kind_of(control);
    TokenId prev = control;
    for (std::size_t j = 1; phrase.ids.size() < lim.max_wd_words; ++j) {
      const std::vector<T> p = session.advance(prev);
      ++stats.steps;
      const TokenId tok = detail::choose_word<T>(std::span<const T>(p), lim, j, window, stats);
      if (tok == text::kEndOfPhraseId || tok == kNoToken) break;
      phrase.ids.push_back(tok);
      prev = tok;
    }
    session.end_phrase();
    if (window && !phrase.ids.empty()) window->push(phrase.ids.front());
    phrases.push_back(std::move(phrase));
  }
  if (stats_out) *stats_out = stats;
  return phrases;
}

/// Greedy decoding of a flat program [control, words.., ";", control, ..,
/// "</s>"] from a session exposing start() and advance(token). Phrase
/// boundaries, masks and the exclusion hook follow decode_hierarchical; the
/// whole output is capped at max_seq_tokens tokens.
template <class Session>
std::vector<DecodedPhrase> decode_sequential(Session& session, const DecodeLimits& lim,
                                             exclusion::ExclusionWindow* window = nullptr,
                                             DecodeStats* stats_out = nullptr) {
  using T = typename Session::value_type;
  DecodeStats stats;
  std::vector<DecodedPhrase> phrases;
  std::vector<T> p = session.start();
  std::size_t emitted = 0;
  bool at_start = true;
  DecodedPhrase phrase;
  std::size_t j = 0;

  auto close_phrase = [&] {
    if (window && !phrase.ids.empty()) window->push(phrase.ids.front());
    phrases.push_back(std::move(phrase));
    phrase = DecodedPhrase{};
    at_start = true;
  };

  while (emitted < lim.max_seq_tokens) {
    ++stats.steps;
    TokenId tok;
    if (at_start) {
      if (phrases.size() >= lim.max_pd_steps) break;
      tok = argmax_allowed<T>(std::span<const T>(p),
                              [&](TokenId id) { return detail::allowed_at_start(id, lim, phrases.size()); });
      if (tok == text::kEndOfProgramId || tok == kNoToken) break;
      phrase.kind = detail::kind_of(tok);
      at_start = false;
      j = 1;
    } else {
      // the word cap closes the phrase as if ";" had been produced
      tok = phrase.ids.size() >= lim.max_wd_words ? text::kEndOfPhraseId
                                                  : detail::choose_word<T>(std::span<const T>(p), lim, j, window, stats);
      if (tok == kNoToken) break;
      if (tok == text::kEndOfPhraseId) {
        close_phrase();
      } else {
        phrase.ids.push_back(tok);
        ++j;
      }
    }
    if (++emitted >= lim.max_seq_tokens) break;
    p = session.advance(tok);
  }
  if (!at_start && !phrase.ids.empty()) phrases.push_back(std::move(phrase));
  if (stats_out) *stats_out = stats;
  return phrases;
}

/// Inference-mode decoding state of the hierarchical model for one document.
template <class T>
class HierarchicalSession {
 public:
  using value_type = T;

  HierarchicalSession(Model<T>& model, const text::Document& doc)
      : graph_(std::make_unique<Graph<T>>(false)), bound_(*graph_, model), enc_(encode(bound_, doc)) {
    if (model.config().decoder != DecoderKind::hierarchical)
      throw ConfigError("hierarchical session needs a hierarchical model");
    pd_h_ = initial_pd_state(enc_);
    last_attentional_ = bound_.zeros(bound_.hidden());
  }

  std::vector<T> begin_phrase() {
    pd_h_ = pd_step(bound_, pd_h_, last_attentional_);
    beta_ = pd_attention(enc_, pd_h_);
    wd_h_ = wd_init(bound_, pd_h_);
    return emit();
  }

  std::vector<T> advance(TokenId token) {
    wd_h_ = wd_step(bound_, wd_h_, last_.attentional, token_embedding(bound_, token));
    return emit();
  }

  void end_phrase() { last_attentional_ = last_.attentional; }

  const AttentionRecord<T>& last_attention() const { return last_; }
  const Var<T>& beta() const { return beta_; }
  const EncodedDocument<T>& encoded() const { return enc_; }

 private:
  std::vector<T> emit() {
    last_ = wd_attention(bound_, enc_, wd_h_, &beta_);
    auto dist = output_distribution(bound_, enc_, last_.attentional, last_.rescaled);
    return dist.p.value().storage();
  }

  std::unique_ptr<Graph<T>> graph_;
  BoundModel<T> bound_;
  EncodedDocument<T> enc_;
  Var<T> pd_h_, last_attentional_, beta_, wd_h_;
  AttentionRecord<T> last_;
};

/// Inference-mode state of the sequential (flat) decoder.
template <class T>
class SequentialSession {
 public:
  using value_type = T;

  SequentialSession(Model<T>& model, const text::Document& doc)
      : graph_(std::make_unique<Graph<T>>(false)), bound_(*graph_, model), enc_(encode(bound_, doc)) {
    if (model.config().decoder != DecoderKind::sequential)
      throw ConfigError("sequential session needs a sequential model");
  }

  std::vector<T> start() {
    h_ = wd_init(bound_, initial_pd_state(enc_));
    return emit();
  }

  std::vector<T> advance(TokenId token) {
    h_ = wd_step(bound_, h_, last_.attentional, token_embedding(bound_, token));
    return emit();
  }

 private:
  std::vector<T> emit() {
    last_ = wd_attention<T>(bound_, enc_, h_, nullptr);
    auto dist = output_distribution(bound_, enc_, last_.attentional, last_.rescaled);
    return dist.p.value().storage();
  }

  std::unique_ptr<Graph<T>> graph_;
  BoundModel<T> bound_;
  EncodedDocument<T> enc_;
  Var<T> h_;
  AttentionRecord<T> last_;
};

struct PredictedPhrase {
  std::vector<std::string> words;
  PhraseKind kind = PhraseKind::present;
};

struct InferenceOptions {
  DecodeLimits limits;
  exclusion::Mode exclusion = exclusion::Mode::none;  // only "hard" changes decoding
  std::size_t window = 1;
};

/// Decodes one document with the decoder the model was built with.
template <class T>
std::vector<PredictedPhrase> predict(Model<T>& model, const text::Document& doc, const text::Vocabulary& vocab,
                                     const InferenceOptions& opt, DecodeStats* stats = nullptr) {
  exclusion::ExclusionWindow window(opt.exclusion == exclusion::Mode::hard ? opt.window : 0);
  exclusion::ExclusionWindow* w = opt.exclusion == exclusion::Mode::hard ? &window : nullptr;
  std::vector<DecodedPhrase> decoded;
  if (model.config().decoder == DecoderKind::hierarchical) {
    HierarchicalSession<T> session(model, doc);
    decoded = decode_hierarchical(session, opt.limits, w, stats);
  } else {
    SequentialSession<T> session(model, doc);
    decoded = decode_sequential(session, opt.limits, w, stats);
  }
  std::vector<PredictedPhrase> out;
  for (const auto& d : decoded) {
    PredictedPhrase p;
    p.kind = d.kind;
    for (auto id : d.ids) p.words.push_back(doc.merged_word(id, vocab));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace exhird::model
