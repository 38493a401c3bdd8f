#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "exhird/nn/graph.hpp"

// Differentiable ops over Graph nodes. Vectors are rank-1 tensors, matrices
// are rank-2 row-major. Each op validates shapes, computes its forward value
// and registers a backward rule that adds into its inputs' gradients.

namespace exhird::nn {

namespace detail {

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using ColVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
Eigen::Map<const RowMatrix<T>> mat(const Tensor<T>& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
template <class T>
Eigen::Map<RowMatrix<T>> mat(Tensor<T>& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
template <class T>
Eigen::Map<const ColVector<T>> vec(const Tensor<T>& t) {
  return {t.data(), static_cast<Eigen::Index>(t.size())};
}
template <class T>
Eigen::Map<ColVector<T>> vec(Tensor<T>& t) {
  return {t.data(), static_cast<Eigen::Index>(t.size())};
}

inline void require_vector(const char* op, const Shape& s) {
  if (s.size() != 1) throw DimensionError(std::string(op) + ": expected a vector, got " + to_string(s));
}
inline void require_matrix(const char* op, const Shape& s) {
  if (s.size() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + to_string(s));
}

template <class T>
Graph<T>& graph_of(const char* op, Var<T> a) {
  if (!a.graph) throw std::invalid_argument(std::string(op) + ": detached variable");
  return *a.graph;
}
template <class T>
Graph<T>& graph_of(const char* op, Var<T> a, Var<T> b) {
  if (a.graph != b.graph) throw std::invalid_argument(std::string(op) + ": variables from different graphs");
  return graph_of(op, a);
}

}  // namespace detail

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  auto& g = detail::graph_of("add", a, b);
  if (a.shape() != b.shape()) shape_mismatch("add", a.shape(), b.shape());
  Tensor<T> out = a.value();
  detail::vec(out) += detail::vec(b.value());
  const bool ng = g.needs_grad(a.id) || g.needs_grad(b.id);
  return g.push("add", std::move(out), ng, [a = a.id, b = b.id](Graph<T>& g) {
    const auto& up = g.upstream();
    if (g.needs_grad(a)) detail::vec(g.grad(a)) += detail::vec(up);
    if (g.needs_grad(b)) detail::vec(g.grad(b)) += detail::vec(up);
  });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  auto& g = detail::graph_of("sub", a, b);
  if (a.shape() != b.shape()) shape_mismatch("sub", a.shape(), b.shape());
  Tensor<T> out = a.value();
  detail::vec(out) -= detail::vec(b.value());
  const bool ng = g.needs_grad(a.id) || g.needs_grad(b.id);
  return g.push("sub", std::move(out), ng, [a = a.id, b = b.id](Graph<T>& g) {
    const auto& up = g.upstream();
    if (g.needs_grad(a)) detail::vec(g.grad(a)) += detail::vec(up);
    if (g.needs_grad(b)) detail::vec(g.grad(b)) -= detail::vec(up);
  });
}

/// Elementwise product.
template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  auto& g = detail::graph_of("mul", a, b);
  if (a.shape() != b.shape()) shape_mismatch("mul", a.shape(), b.shape());
  Tensor<T> out = a.value();
  detail::vec(out).array() *= detail::vec(b.value()).array();
  const bool ng = g.needs_grad(a.id) || g.needs_grad(b.id);
  return g.push("mul", std::move(out), ng, [a = a.id, b = b.id](Graph<T>& g) {
    const auto& up = g.upstream();
    if (g.needs_grad(a))
      detail::vec(g.grad(a)).array() += detail::vec(up).array() * detail::vec(g.value(b)).array();
    if (g.needs_grad(b))
      detail::vec(g.grad(b)).array() += detail::vec(up).array() * detail::vec(g.value(a)).array();
  });
}

template <class T>
Var<T> scale(Var<T> a, T factor) {
  auto& g = detail::graph_of("scale", a);
  Tensor<T> out = a.value();
  detail::vec(out) *= factor;
  return g.push("scale", std::move(out), g.needs_grad(a.id), [a = a.id, factor](Graph<T>& g) {
    detail::vec(g.grad(a)) += factor * detail::vec(g.upstream());
  });
}

/// 1 - a, elementwise.
template <class T>
Var<T> one_minus(Var<T> a) {
  auto& g = detail::graph_of("one_minus", a);
  Tensor<T> out = a.value();
  for (auto& v : out.storage()) v = T{1} - v;
  return g.push("one_minus", std::move(out), g.needs_grad(a.id), [a = a.id](Graph<T>& g) {
    detail::vec(g.grad(a)) -= detail::vec(g.upstream());
  });
}

/// v * s where s holds a single value.
template <class T>
Var<T> mul_scalar(Var<T> v, Var<T> s) {
  auto& g = detail::graph_of("mul_scalar", v, s);
  if (s.size() != 1) throw DimensionError("mul_scalar: scalar operand has shape " + to_string(s.shape()));
  Tensor<T> out = v.value();
  detail::vec(out) *= s.item();
  const bool ng = g.needs_grad(v.id) || g.needs_grad(s.id);
  return g.push("mul_scalar", std::move(out), ng, [v = v.id, s = s.id](Graph<T>& g) {
    const auto& up = g.upstream();
    if (g.needs_grad(v)) detail::vec(g.grad(v)) += g.value(s)[0] * detail::vec(up);
    if (g.needs_grad(s)) g.grad(s)[0] += detail::vec(up).dot(detail::vec(g.value(v)));
  });
}

namespace detail {

/// Unary op whose derivative is a function of the output only.
template <class T, class Fwd, class Deriv>
Var<T> unary_by_output(const char* name, Var<T> a, Fwd fwd, Deriv deriv) {
  auto& g = graph_of(name, a);
  Tensor<T> out = a.value();
  for (auto& v : out.storage()) v = fwd(v);
  const std::uint32_t self = static_cast<std::uint32_t>(g.node_count());
  return g.push(name, std::move(out), g.needs_grad(a.id), [a = a.id, self, deriv](Graph<T>& g) {
    const auto& up = g.upstream();
    const auto& y = g.value(self);
    auto& ga = g.grad(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += up[i] * deriv(y[i]);
  });
}

}  // namespace detail

template <class T>
Var<T> sigmoid(Var<T> a) {
  return detail::unary_by_output<T>(
      "sigmoid", a, [](T v) { return T{1} / (T{1} + std::exp(-v)); },
      [](T y) { return y * (T{1} - y); });
}

template <class T>
Var<T> tanh(Var<T> a) {
  return detail::unary_by_output<T>(
      "tanh", a, [](T v) { return std::tanh(v); }, [](T y) { return T{1} - y * y; });
}

/// Softmax over the last axis (each row of a matrix, or the whole vector).
template <class T>
Var<T> softmax(Var<T> a) {
  auto& g = detail::graph_of("softmax", a);
  if (a.value().rank() == 0 || a.value().rank() > 2)
    throw DimensionError("softmax: unsupported shape " + to_string(a.shape()));
  Tensor<T> out = a.value();
  const std::size_t rows = out.rows(), cols = out.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = out.row(r);
    const T mx = *std::max_element(row.begin(), row.end());
    T sum{0};
    for (auto& v : row) sum += (v = std::exp(v - mx));
    for (auto& v : row) v /= sum;
  }
  const std::uint32_t self = static_cast<std::uint32_t>(g.node_count());
  return g.push("softmax", std::move(out), g.needs_grad(a.id), [a = a.id, self, rows, cols](Graph<T>& g) {
    const auto& up = g.upstream();
    const auto& y = g.value(self);
    auto& ga = g.grad(a);
    for (std::size_t r = 0; r < rows; ++r) {
      T dot{0};
      for (std::size_t c = 0; c < cols; ++c) dot += up(r, c) * y(r, c);
      for (std::size_t c = 0; c < cols; ++c) ga(r, c) += y(r, c) * (up(r, c) - dot);
    }
  });
}

template <class T>
Var<T> concat(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  auto& g = detail::graph_of("concat", parts.front());
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  bool ng = false;
  for (auto p : parts) {
    detail::graph_of("concat", parts.front(), p);
    detail::require_vector("concat", p.shape());
    ids.push_back(p.id);
    sizes.push_back(p.size());
    total += p.size();
    ng = ng || g.needs_grad(p.id);
  }
  Tensor<T> out(Shape{total});
  std::size_t off = 0;
  for (auto p : parts) {
    std::copy(p.value().storage().begin(), p.value().storage().end(), out.data() + off);
    off += p.size();
  }
  return g.push("concat", std::move(out), ng, [ids = std::move(ids), sizes = std::move(sizes)](Graph<T>& g) {
    const auto& up = g.upstream();
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (g.needs_grad(ids[k])) {
        auto& gk = g.grad(ids[k]);
        for (std::size_t i = 0; i < sizes[k]; ++i) gk[i] += up[off + i];
      }
      off += sizes[k];
    }
  });
}

template <class T>
Var<T> concat(Var<T> a, Var<T> b) {
  return concat<T>(std::vector<Var<T>>{a, b});
}

/// Contiguous slice [offset, offset + length) of a vector.
template <class T>
Var<T> slice(Var<T> a, std::size_t offset, std::size_t length) {
  auto& g = detail::graph_of("slice", a);
  detail::require_vector("slice", a.shape());
  if (offset + length > a.size())
    throw DimensionError("slice: range [" + std::to_string(offset) + "," + std::to_string(offset + length) +
                         ") outside " + to_string(a.shape()));
  const auto& src = a.value().storage();
  Tensor<T> out(Shape{length}, std::vector<T>(src.begin() + offset, src.begin() + offset + length));
  return g.push("slice", std::move(out), g.needs_grad(a.id), [a = a.id, offset, length](Graph<T>& g) {
    const auto& up = g.upstream();
    auto& ga = g.grad(a);
    for (std::size_t i = 0; i < length; ++i) ga[offset + i] += up[i];
  });
}

/// A[m x n] * x[n] -> [m]
template <class T>
Var<T> matvec(Var<T> A, Var<T> x) {
  auto& g = detail::graph_of("matvec", A, x);
  detail::require_matrix("matvec", A.shape());
  detail::require_vector("matvec", x.shape());
  if (A.value().cols() != x.size()) shape_mismatch("matvec", A.shape(), x.shape());
  Tensor<T> out(Shape{A.value().rows()});
  detail::vec(out).noalias() = detail::mat(A.value()) * detail::vec(x.value());
  const bool ng = g.needs_grad(A.id) || g.needs_grad(x.id);
  return g.push("matvec", std::move(out), ng, [A = A.id, x = x.id](Graph<T>& g) {
    const auto up = detail::vec(g.upstream());
    if (g.needs_grad(A)) detail::mat(g.grad(A)).noalias() += up * detail::vec(g.value(x)).transpose();
    if (g.needs_grad(x)) detail::vec(g.grad(x)).noalias() += detail::mat(g.value(A)).transpose() * up;
  });
}

/// A[m x n]^T * x[m] -> [n]
template <class T>
Var<T> matvec_t(Var<T> A, Var<T> x) {
  auto& g = detail::graph_of("matvec_t", A, x);
  detail::require_matrix("matvec_t", A.shape());
  detail::require_vector("matvec_t", x.shape());
  if (A.value().rows() != x.size()) shape_mismatch("matvec_t", A.shape(), x.shape());
  Tensor<T> out(Shape{A.value().cols()});
  detail::vec(out).noalias() = detail::mat(A.value()).transpose() * detail::vec(x.value());
  const bool ng = g.needs_grad(A.id) || g.needs_grad(x.id);
  return g.push("matvec_t", std::move(out), ng, [A = A.id, x = x.id](Graph<T>& g) {
    const auto up = detail::vec(g.upstream());
    if (g.needs_grad(A)) detail::mat(g.grad(A)).noalias() += detail::vec(g.value(x)) * up.transpose();
    if (g.needs_grad(x)) detail::vec(g.grad(x)).noalias() += detail::mat(g.value(A)) * up;
  });
}

/// A[m x k] * B[k x n] -> [m x n]
template <class T>
Var<T> matmul(Var<T> A, Var<T> B) {
  auto& g = detail::graph_of("matmul", A, B);
  detail::require_matrix("matmul", A.shape());
  detail::require_matrix("matmul", B.shape());
  if (A.value().cols() != B.value().rows()) shape_mismatch("matmul", A.shape(), B.shape());
  Tensor<T> out(Shape{A.value().rows(), B.value().cols()});
  detail::mat(out).noalias() = detail::mat(A.value()) * detail::mat(B.value());
  const bool ng = g.needs_grad(A.id) || g.needs_grad(B.id);
  return g.push("matmul", std::move(out), ng, [A = A.id, B = B.id](Graph<T>& g) {
    const auto up = detail::mat(g.upstream());
    if (g.needs_grad(A)) detail::mat(g.grad(A)).noalias() += up * detail::mat(g.value(B)).transpose();
    if (g.needs_grad(B)) detail::mat(g.grad(B)).noalias() += detail::mat(g.value(A)).transpose() * up;
  });
}

/// A[m x k] * B[n x k]^T -> [m x n]
template <class T>
Var<T> matmul_nt(Var<T> A, Var<T> B) {
  auto& g = detail::graph_of("matmul_nt", A, B);
  detail::require_matrix("matmul_nt", A.shape());
  detail::require_matrix("matmul_nt", B.shape());
  if (A.value().cols() != B.value().cols()) shape_mismatch("matmul_nt", A.shape(), B.shape());
  Tensor<T> out(Shape{A.value().rows(), B.value().rows()});
  detail::mat(out).noalias() = detail::mat(A.value()) * detail::mat(B.value()).transpose();
  const bool ng = g.needs_grad(A.id) || g.needs_grad(B.id);
  return g.push("matmul_nt", std::move(out), ng, [A = A.id, B = B.id](Graph<T>& g) {
    const auto up = detail::mat(g.upstream());
    if (g.needs_grad(A)) detail::mat(g.grad(A)).noalias() += up * detail::mat(g.value(B));
    if (g.needs_grad(B)) detail::mat(g.grad(B)).noalias() += up.transpose() * detail::mat(g.value(A));
  });
}

/// Stacks equal-length vectors as the rows of a matrix.
template <class T>
Var<T> stack_rows(const std::vector<Var<T>>& rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no inputs");
  auto& g = detail::graph_of("stack_rows", rows.front());
  const std::size_t n = rows.front().size();
  std::vector<std::uint32_t> ids;
  bool ng = false;
  for (auto r : rows) {
    detail::graph_of("stack_rows", rows.front(), r);
    detail::require_vector("stack_rows", r.shape());
    if (r.size() != n) shape_mismatch("stack_rows", rows.front().shape(), r.shape());
    ids.push_back(r.id);
    ng = ng || g.needs_grad(r.id);
  }
  Tensor<T> out(Shape{rows.size(), n});
  for (std::size_t k = 0; k < rows.size(); ++k)
    std::copy(rows[k].value().storage().begin(), rows[k].value().storage().end(), out.row(k).begin());
  return g.push("stack_rows", std::move(out), ng, [ids = std::move(ids), n](Graph<T>& g) {
    const auto& up = g.upstream();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.needs_grad(ids[k])) continue;
      auto& gk = g.grad(ids[k]);
      for (std::size_t i = 0; i < n; ++i) gk[i] += up(k, i);
    }
  });
}

/// Row `index` of an embedding table.
template <class T>
Var<T> embedding(Var<T> table, std::size_t index) {
  auto& g = detail::graph_of("embedding", table);
  detail::require_matrix("embedding", table.shape());
  if (index >= table.value().rows())
    throw DimensionError("embedding: index " + std::to_string(index) + " outside table " + to_string(table.shape()));
  auto row = table.value().row(index);
  Tensor<T> out(Shape{row.size()}, std::vector<T>(row.begin(), row.end()));
  return g.push("embedding", std::move(out), g.needs_grad(table.id), [t = table.id, index](Graph<T>& g) {
    const auto& up = g.upstream();
    auto row = g.grad(t).row(index);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] += up[i];
  });
}

/// out[size], out[indices[k]] += v[k]
template <class T>
Var<T> scatter_add(Var<T> v, std::vector<std::size_t> indices, std::size_t size) {
  auto& g = detail::graph_of("scatter_add", v);
  detail::require_vector("scatter_add", v.shape());
  if (indices.size() != v.size())
    throw DimensionError("scatter_add: " + std::to_string(indices.size()) + " indices for " + to_string(v.shape()));
  Tensor<T> out(Shape{size});
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size) throw DimensionError("scatter_add: index out of range");
    out[indices[k]] += v.value()[k];
  }
  return g.push("scatter_add", std::move(out), g.needs_grad(v.id), [v = v.id, idx = std::move(indices)](Graph<T>& g) {
    const auto& up = g.upstream();
    auto& gv = g.grad(v);
    for (std::size_t k = 0; k < idx.size(); ++k) gv[k] += up[idx[k]];
  });
}

/// Zero-extends a vector to `size` entries.
template <class T>
Var<T> pad_to(Var<T> v, std::size_t size) {
  auto& g = detail::graph_of("pad_to", v);
  detail::require_vector("pad_to", v.shape());
  if (size < v.size()) throw DimensionError("pad_to: target smaller than " + to_string(v.shape()));
  Tensor<T> out(Shape{size});
  std::copy(v.value().storage().begin(), v.value().storage().end(), out.data());
  const std::size_t n = v.size();
  return g.push("pad_to", std::move(out), g.needs_grad(v.id), [v = v.id, n](Graph<T>& g) {
    const auto& up = g.upstream();
    auto& gv = g.grad(v);
    for (std::size_t i = 0; i < n; ++i) gv[i] += up[i];
  });
}

/// Sum of all entries, as a one-element vector.
template <class T>
Var<T> sum(Var<T> a) {
  auto& g = detail::graph_of("sum", a);
  Tensor<T> out(Shape{1}, std::vector<T>{detail::vec(a.value()).sum()});
  return g.push("sum", std::move(out), g.needs_grad(a.id), [a = a.id](Graph<T>& g) {
    detail::vec(g.grad(a)).array() += g.upstream()[0];
  });
}

/// Sum of one-element vectors. An empty list gives a constant zero.
template <class T>
Var<T> add_scalars(Graph<T>& g, const std::vector<Var<T>>& terms) {
  std::vector<std::uint32_t> ids;
  T total{0};
  bool ng = false;
  for (auto t : terms) {
    if (t.size() != 1) throw DimensionError("add_scalars: term has shape " + to_string(t.shape()));
    ids.push_back(t.id);
    total += t.item();
    ng = ng || g.needs_grad(t.id);
  }
  return g.push("add_scalars", Tensor<T>(Shape{1}, std::vector<T>{total}), ng, [ids = std::move(ids)](Graph<T>& g) {
    const T up = g.upstream()[0];
    for (auto id : ids)
      if (g.needs_grad(id)) g.grad(id)[0] += up;
  });
}

/// Default guard inside log for likelihood terms.
template <class T>
inline constexpr T kLogEpsilon = static_cast<T>(1e-12);

/// -log(p[target] + eps)
template <class T>
Var<T> nll(Var<T> p, std::size_t target, T eps = kLogEpsilon<T>) {
  auto& g = detail::graph_of("nll", p);
  detail::require_vector("nll", p.shape());
  if (target >= p.size())
    throw DimensionError("nll: target " + std::to_string(target) + " outside " + to_string(p.shape()));
  const T pt = p.value()[target];
  Tensor<T> out(Shape{1}, std::vector<T>{-std::log(pt + eps)});
  return g.push("nll", std::move(out), g.needs_grad(p.id), [p = p.id, target, eps](Graph<T>& g) {
    g.grad(p)[target] -= g.upstream()[0] / (g.value(p)[target] + eps);
  });
}

/// sum_k -log(1 - min(p[ids[k]], clamp) + eps); one term per listed id.
template <class T>
Var<T> neg_log_complement(Var<T> p, std::vector<std::size_t> ids, T eps, T clamp) {
  auto& g = detail::graph_of("neg_log_complement", p);
  detail::require_vector("neg_log_complement", p.shape());
  T total{0};
  for (auto id : ids) {
    if (id >= p.size()) throw DimensionError("neg_log_complement: id out of range");
    total += -std::log(T{1} - std::min(p.value()[id], clamp) + eps);
  }
  return g.push("neg_log_complement", Tensor<T>(Shape{1}, std::vector<T>{total}), g.needs_grad(p.id),
                [p = p.id, ids = std::move(ids), eps, clamp](Graph<T>& g) {
                  const T up = g.upstream()[0];
                  for (auto id : ids) {
                    const T v = g.value(p)[id];
                    if (v < clamp) g.grad(p)[id] += up / (T{1} - v + eps);
                  }
                });
}

class UnderflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// (a * b) / sum(a * b), elementwise product renormalised onto the simplex.
template <class T>
Var<T> renormalized_product(Var<T> a, Var<T> b) {
  auto& g = detail::graph_of("renormalized_product", a, b);
  detail::require_vector("renormalized_product", a.shape());
  if (a.shape() != b.shape()) shape_mismatch("renormalized_product", a.shape(), b.shape());
  Tensor<T> out = a.value();
  T total{0};
  for (std::size_t k = 0; k < out.size(); ++k) total += (out[k] *= b.value()[k]);
  if (!(total > T{0})) throw UnderflowError("renormalized_product: product mass underflowed to zero");
  for (auto& v : out.storage()) v /= total;
  const std::uint32_t self = static_cast<std::uint32_t>(g.node_count());
  const bool ng = g.needs_grad(a.id) || g.needs_grad(b.id);
  return g.push("renormalized_product", std::move(out), ng, [a = a.id, b = b.id, self, total](Graph<T>& g) {
    const auto& up = g.upstream();
    const auto& y = g.value(self);
    T dot{0};
    for (std::size_t k = 0; k < y.size(); ++k) dot += up[k] * y[k];
    const bool ga = g.needs_grad(a), gb = g.needs_grad(b);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const T du = (up[k] - dot) / total;
      if (ga) g.grad(a)[k] += du * g.value(b)[k];
      if (gb) g.grad(b)[k] += du * g.value(a)[k];
    }
  });
}

}  // namespace exhird::nn
