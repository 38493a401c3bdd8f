#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "exhird/nn/graph.hpp"

namespace exhird::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_entry;  // "<param>[<index>]"
  std::size_t entries_checked = 0;
  bool passed = true;
};

/// Compares reverse-mode gradients of a scalar loss against central finite
/// differences over every entry of `params`.
///
/// Relative error per entry is |analytic - numeric| / max(|analytic|,
/// |numeric|, 1e-3); the floor stops vanishing gradients from turning
/// finite-difference round-off into spurious failures.
template <class LossFn>
GradCheckReport finite_difference_check(LossFn&& loss, const std::vector<Parameter<double>*>& params,
                                        double tolerance = 1e-4, double step = 1e-5) {
  for (auto* p : params) p->zero_grad();
  {
    Graph<double> g;
    Var<double> out = loss(g);
    if (out.size() != 1) throw DimensionError("finite_difference_check: loss must be a scalar");
    g.backward(out);
  }
  auto evaluate = [&] {
    Graph<double> g(false);
    return loss(g).item();
  };

  GradCheckReport report;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + step;
      const double up = evaluate();
      p->value[i] = saved - step;
      const double down = evaluate();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p->grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
      const double err = std::abs(analytic - numeric) / denom;
      ++report.entries_checked;
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_entry = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace exhird::nn
