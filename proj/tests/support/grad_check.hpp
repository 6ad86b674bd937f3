#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "umt/nn/graph.hpp"
#include "umt/nn/ops.hpp"

namespace umt::test {

struct GradReport {
  double max_rel = 0.0;
  int checked = 0;
};

/// Central-difference check of every element of every trainable leaf against
/// the analytic gradient. `build` must reconstruct the graph from the leaves'
/// current values and return a scalar.
inline GradReport check_gradients(const std::vector<nn::Var>& leaves,
                                  const std::function<nn::Var()>& build,
                                  double h = 1e-5) {
  for (const auto& l : leaves) l->grad = nn::Tensor();
  nn::backward(build());
  GradReport rep;
  for (const auto& l : leaves) {
    if (!l->requires_grad) continue;
    nn::Tensor analytic = l->grad.data.empty() ? nn::Tensor::zeros(l->value.shape)
                                               : l->grad;
    for (std::size_t i = 0; i < l->value.data.size(); ++i) {
      const double keep = l->value.data[i];
      l->value.data[i] = keep + h;
      const double fp = build()->value.data[0];
      l->value.data[i] = keep - h;
      const double fm = build()->value.data[0];
      l->value.data[i] = keep;
      const double num = (fp - fm) / (2.0 * h);
      const double ana = analytic.data[i];
      const double rel = std::abs(ana - num) / (std::abs(ana) + std::abs(num) + 1e-6);
      rep.max_rel = std::max(rep.max_rel, rel);
      ++rep.checked;
    }
  }
  return rep;
}

/// Weighted mean with fixed random weights; makes the scalar sensitive to the
/// sign and position of each output element.
inline nn::Var weighted_scalar(const nn::Var& y, const nn::Tensor& weights) {
  return nn::mean_all(nn::mul_const(y, weights));
}

}  // namespace umt::test
