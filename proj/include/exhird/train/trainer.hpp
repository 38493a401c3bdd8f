#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <string>
#include <vector>

#include "exhird/errors.hpp"
#include "exhird/exclusion.hpp"
#include "exhird/train/loss.hpp"
#include "exhird/train/optimizer.hpp"
#include "exhird/train/schedule.hpp"

namespace exhird::train {

struct TrainConfig {
  std::size_t batch_size = 10;
  double max_grad_norm = 1.0;
  double lr = 0.001;
  double lr_decay = 0.5;
  AdamConfig adam;  // lr is taken from `lr`
  std::uint64_t seed = 1;
  std::size_t max_epochs = 30;
  std::size_t patience = 3;
  double min_relative_improvement = 1e-4;
  exclusion::Mode exclusion = exclusion::Mode::none;  // soft adds the exclusive loss
  std::size_t exclusive_window = 4;                   // K_EL
  double init_bound = 0.1;
  bool restore_best = true;  // reload the best-validation weights when training ends

  std::size_t effective_el_window() const { return exclusion == exclusion::Mode::soft ? exclusive_window : 0; }

  void validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(max_grad_norm > 0)) throw ConfigError("max_grad_norm must be positive");
    if (!(lr > 0)) throw ConfigError("learning rate must be positive");
    if (!(lr_decay > 0 && lr_decay <= 1)) throw ConfigError("lr_decay must lie in (0, 1]");
    if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;       // mean per-example joint loss
  double generation_loss = 0.0;  // mean per-example L_g
  double exclusive_loss = 0.0;   // mean per-example L_EL
  double perplexity = 0.0;       // validation perplexity
  double lr = 0.0;               // learning rate used during the epoch
};

template <class T>
struct FitResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_perplexity = 0.0;
  bool early_stopped = false;
};

/// exp(sum of token NLL / number of target tokens) under teacher forcing.
/// Target tokens include control tokens, words, ";" and "</s>".
template <class T>
double perplexity(model::Model<T>& m, const std::vector<text::Example>& data) {
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const auto& ex : data) {
    nn::Graph<T> g(false);
    BoundModel<T> b(g, m);
    auto terms = example_loss(b, ex, 0);
    nll += static_cast<double>(terms.generation.item());
    tokens += terms.target_tokens;
  }
  return tokens == 0 ? 1.0 : std::exp(nll / static_cast<double>(tokens));
}

/// Called after every validation; return false to stop training.
using EpochCallback = std::function<bool(const EpochRecord&)>;

/// Mini-batch Adam over shuffled training examples with global gradient
/// clipping, per-epoch validation, learning-rate halving on plateaus and
/// early stopping. On return the model holds the best-validation weights.
///
/// The model is initialised from `config.seed` unless `initialize` is false.
template <class T>
FitResult<T> fit(model::Model<T>& m, const std::vector<text::Example>& train, const std::vector<text::Example>& valid,
                 const TrainConfig& config, const EpochCallback& on_epoch = {}, bool initialize = true) {
  config.validate();
  if (train.empty()) throw DataError("training set is empty");
  if (initialize) m.initialize(config.seed, config.init_bound);
  auto& params = m.params();
  params.zero_grad();

  AdamConfig adam = config.adam;
  adam.lr = config.lr;
  Adam<T> optimizer(params, adam);
  PlateauSchedule schedule(config.lr, config.lr_decay, config.patience, config.min_relative_improvement);
  nn::Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ull);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<nn::Tensor<T>> best(params.size());
  auto snapshot = [&] {
    for (std::size_t i = 0; i < params.size(); ++i) best[i] = params[i].value;
  };
  snapshot();

  const std::size_t k_el = config.effective_el_window();
  const auto& validation = valid.empty() ? train : valid;
  FitResult<T> result;
  std::size_t batch_index = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = optimizer.learning_rate();
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const T inv = static_cast<T>(1.0 / static_cast<double>(end - start));
      try {
        for (std::size_t k = start; k < end; ++k) {
          nn::Graph<T> g;
          BoundModel<T> b(g, m);
          auto terms = example_loss(b, train[order[k]], k_el);
          const double total = terms.total.item();
          if (!std::isfinite(total)) throw DivergenceError("non-finite training loss", batch_index);
          rec.train_loss += total;
          rec.generation_loss += terms.generation.item();
          rec.exclusive_loss += terms.exclusive.item();
          g.backward(nn::scale(terms.total, inv));
        }
      } catch (const nn::NumericalError& e) {
        throw DivergenceError(e.what(), batch_index);
      }
      clip_gradient_norm(params, config.max_grad_norm);
      optimizer.step();
      params.zero_grad();
    }
    const double n = static_cast<double>(train.size());
    rec.train_loss /= n;
    rec.generation_loss /= n;
    rec.exclusive_loss /= n;
    rec.perplexity = perplexity(m, validation);
    if (!std::isfinite(rec.perplexity)) throw DivergenceError("non-finite validation perplexity", batch_index);

    if (schedule.observe(rec.perplexity, epoch)) snapshot();
    optimizer.set_learning_rate(schedule.learning_rate());
    result.history.push_back(rec);
    const bool keep_going = on_epoch ? on_epoch(rec) : true;
    if (!keep_going) break;
    if (schedule.should_stop()) {
      result.early_stopped = true;
      break;
    }
  }
  if (config.restore_best)
    for (std::size_t i = 0; i < params.size(); ++i) params[i].value = best[i];
  result.best_epoch = schedule.best_epoch();
  result.best_perplexity = schedule.best();
  return result;
}

/// CSV with one row per validation.
inline void write_training_log(const std::string& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write training log " + path);
  out << "epoch,train_loss,L_g,L_EL,perplexity,lr\n";
  out << std::setprecision(8);
  for (const auto& r : history)
    out << r.epoch << ',' << r.train_loss << ',' << r.generation_loss << ',' << r.exclusive_loss << ','
        << r.perplexity << ',' << r.lr << '\n';
}

}  // namespace exhird::train
