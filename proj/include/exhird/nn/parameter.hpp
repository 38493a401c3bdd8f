#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "exhird/nn/random.hpp"
#include "exhird/nn/tensor.hpp"

namespace exhird::nn {

template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter(std::string n, Shape shape)
      : name(std::move(n)), value(shape), grad(shape) {}

  void zero_grad() { grad.fill(T{0}); }
};

/// Owns the trainable parameters of a model. Parameter addresses are stable
/// for the lifetime of the store, and iteration follows insertion order.
template <class T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;

  Parameter<T>& add(const std::string& name, Shape shape) {
    if (index_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
    params_.push_back(std::make_unique<Parameter<T>>(name, std::move(shape)));
    index_[name] = params_.size() - 1;
    return *params_.back();
  }

  Parameter<T>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
    return *params_[it->second];
  }
  const Parameter<T>& at(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->at(name);
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (auto& p : params_) n += p->value.size();
    return n;
  }

  /// Weights and embeddings are drawn from U[-bound, bound]; parameters whose
  /// name ends in ".b" (biases) start at zero.
  void init_uniform(Rng& rng, double bound = 0.1) {
    for (auto& p : params_) {
      const bool bias = p->name.size() >= 2 && p->name.ends_with(".b");
      for (auto& v : p->value.storage())
        v = bias ? T{0} : static_cast<T>(rng.uniform(-bound, bound));
      p->zero_grad();
    }
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace exhird::nn
