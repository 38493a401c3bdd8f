#pragma once

#include <cmath>
#include <vector>

#include "exhird/nn/parameter.hpp"

namespace exhird::train {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Global L2 norm across every parameter gradient.
template <class T>
double gradient_norm(const nn::ParameterStore<T>& params) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (T g : params[i].grad.storage()) sq += static_cast<double>(g) * static_cast<double>(g);
  return std::sqrt(sq);
}

/// Rescales all gradients so their global norm is at most `max_norm`.
/// Returns the norm before clipping.
template <class T>
double clip_gradient_norm(nn::ParameterStore<T>& params, double max_norm) {
  const double norm = gradient_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (std::size_t i = 0; i < params.size(); ++i)
      for (T& g : params[i].grad.storage()) g *= factor;
  }
  return norm;
}

template <class T>
class Adam {
 public:
  Adam(nn::ParameterStore<T>& params, AdamConfig config) : params_(params), config_(config) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.emplace_back(params[i].value.size(), 0.0);
      v_.emplace_back(params[i].value.size(), 0.0);
    }
  }

  double learning_rate() const noexcept { return config_.lr; }
  void set_learning_rate(double lr) noexcept { config_.lr = lr; }
  std::size_t steps() const noexcept { return t_; }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t k = 0; k < p.value.size(); ++k) {
        const double g = p.grad[k];
        m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g;
        v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g * g;
        const double update = config_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + config_.eps);
        p.value[k] = static_cast<T>(p.value[k] - update);
      }
    }
  }

 private:
  nn::ParameterStore<T>& params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace exhird::train
