#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "exhird/nn/parameter.hpp"
#include "exhird/nn/tensor.hpp"

namespace exhird::nn {

template <class T>
class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while its graph lives.
template <class T>
struct Var {
  Graph<T>* graph = nullptr;
  std::uint32_t id = 0;

  const Tensor<T>& value() const { return graph->value(id); }
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  T item() const { return value()[0]; }
};

/// Tape for reverse-mode differentiation. Nodes are appended in evaluation
/// order, so a reverse sweep visits every node after all of its consumers.
///
/// Parameter leaves alias the parameter's value and gradient: backward adds
/// straight into Parameter::grad and never touches forward values.
template <class T>
class Graph {
 public:
  using Backward = std::function<void(Graph&)>;

  /// With recording off, backward rules are not stored (inference mode).
  explicit Graph(bool recording = true) : recording_(recording) {
    nodes_.reserve(1024);
  }

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const noexcept { return recording_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  Var<T> constant(Tensor<T> value) { return add_leaf(std::move(value), nullptr, false); }

  /// Leaf whose gradient is kept in the graph (see grad()).
  Var<T> input(Tensor<T> value) { return add_leaf(std::move(value), nullptr, true); }

  Var<T> param(Parameter<T>& p) { return add_leaf(Tensor<T>{}, &p, true); }

  const Tensor<T>& value(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.param ? n.param->value : n.value;
  }

  bool needs_grad(std::uint32_t id) const { return nodes_[id].needs_grad; }

  /// Gradient buffer of a node, allocated (zeroed) on first use.
  Tensor<T>& grad(std::uint32_t id) {
    Node& n = nodes_[id];
    if (n.param) return n.param->grad;
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor<T>(n.value.shape());
    return n.grad;
  }
  Tensor<T>& grad(Var<T> v) { return grad(v.id); }

  /// Appends an op result. `inputs_need_grad` decides whether the backward
  /// rule is kept at all.
  Var<T> push(const char* op, Tensor<T> value, bool inputs_need_grad, Backward backward) {
    if (!value.all_finite())
      throw NumericalError(std::string(op) + ": non-finite value produced");
    Node n;
    n.value = std::move(value);
    n.needs_grad = inputs_need_grad;
    if (recording_ && inputs_need_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var<T>{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  /// Seeds d(root)/d(root) = 1 for every entry of root and sweeps backwards.
  /// Intermediate gradients are reset first, so repeated calls accumulate
  /// only into parameters and input leaves.
  void backward(Var<T> root) {
    if (!recording_) throw std::logic_error("backward on a non-recording graph");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      Node& n = nodes_[i];
      if (!n.param && n.backward) n.grad = Tensor<T>{};
    }
    grad(root.id).fill(T{1});
    for (std::size_t i = root.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.empty()) continue;
      current_ = static_cast<std::uint32_t>(i);
      n.backward(*this);
    }
  }

  /// Gradient of the node whose backward rule is running.
  const Tensor<T>& upstream() const { return nodes_[current_].grad; }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    Parameter<T>* param = nullptr;
    Backward backward;
    bool needs_grad = false;
  };

  Var<T> add_leaf(Tensor<T> value, Parameter<T>* p, bool needs_grad) {
    Node n;
    n.value = std::move(value);
    n.param = p;
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return Var<T>{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
  bool recording_;
  std::uint32_t current_ = 0;
};

}  // namespace exhird::nn
