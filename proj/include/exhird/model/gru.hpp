#pragma once

#include <string>

#include "exhird/nn/ops.hpp"

namespace exhird::model {

using nn::Graph;
using nn::ParameterStore;
using nn::Var;

/// Gated recurrent unit with gates
///
///   z  = sigmoid(W_z x + U_z h + b_z)
///   r  = sigmoid(W_r x + U_r h + b_r)
///   c  = tanh(W_c x + b_c + U_c (r * h))
///   h' = (1 - z) * h + z * c
///
/// Storage under `prefix`: W [3H x I] (rows z | r | c), U [2H x H] (z | r),
/// Uc [H x H], b [3H].
template <class T>
void register_gru(ParameterStore<T>& store, const std::string& prefix, std::size_t input, std::size_t hidden) {
  store.add(prefix + ".W", {3 * hidden, input});
  store.add(prefix + ".U", {2 * hidden, hidden});
  store.add(prefix + ".Uc", {hidden, hidden});
  store.add(prefix + ".b", {3 * hidden});
}

template <class T>
struct GruCell {
  Var<T> W, U, Uc, b;
  std::size_t input = 0;
  std::size_t hidden = 0;

  static GruCell bind(Graph<T>& g, ParameterStore<T>& store, const std::string& prefix) {
    GruCell cell;
    cell.W = g.param(store.at(prefix + ".W"));
    cell.U = g.param(store.at(prefix + ".U"));
    cell.Uc = g.param(store.at(prefix + ".Uc"));
    cell.b = g.param(store.at(prefix + ".b"));
    cell.hidden = cell.Uc.value().rows();
    cell.input = cell.W.value().cols();
    return cell;
  }

  Var<T> operator()(Var<T> x, Var<T> h) const {
    if (x.size() != input) nn::shape_mismatch("gru input", W.shape(), x.shape());
    if (h.size() != hidden) nn::shape_mismatch("gru state", Uc.shape(), h.shape());
    auto gx = nn::add(nn::matvec(W, x), b);
    auto gh = nn::matvec(U, h);
    auto z = nn::sigmoid(nn::add(nn::slice(gx, 0, hidden), nn::slice(gh, 0, hidden)));
    auto r = nn::sigmoid(nn::add(nn::slice(gx, hidden, hidden), nn::slice(gh, hidden, hidden)));
    auto c = nn::tanh(nn::add(nn::slice(gx, 2 * hidden, hidden), nn::matvec(Uc, nn::mul(r, h))));
    return nn::add(h, nn::mul(z, nn::sub(c, h)));
  }
};

}  // namespace exhird::model
