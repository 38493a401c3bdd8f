#pragma once

#include <cstddef>
#include <limits>

namespace exhird::train {

/// Validation-driven learning-rate halving and early stopping.
///
/// A validation counts as an improvement when perplexity falls below the
/// best so far by more than `min_relative_improvement`. Every other
/// validation multiplies the learning rate by `decay` and counts toward
/// `patience`; training stops once `patience` consecutive validations fail.
class PlateauSchedule {
 public:
  PlateauSchedule(double lr, double decay, std::size_t patience, double min_relative_improvement = 1e-4)
      : lr_(lr), decay_(decay), patience_(patience), min_rel_(min_relative_improvement) {}

  /// Records the perplexity of validation number `epoch` (1-based); returns
  /// true when it is the new best.
  bool observe(double perplexity, std::size_t epoch) {
    ++validations_;
    if (perplexity < best_ * (1.0 - min_rel_)) {
      best_ = perplexity;
      best_epoch_ = epoch;
      bad_ = 0;
      return true;
    }
    ++bad_;
    lr_ *= decay_;
    return false;
  }

  bool should_stop() const noexcept { return patience_ > 0 && bad_ >= patience_; }
  double learning_rate() const noexcept { return lr_; }
  double best() const noexcept { return best_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  std::size_t validations() const noexcept { return validations_; }

 private:
  double lr_;
  double decay_;
  std::size_t patience_;
  double min_rel_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t bad_ = 0;
  std::size_t validations_ = 0;
};

}  // namespace exhird::train
