#include <cmath>

#include "umt/nn/modules.hpp"

namespace umt::nn {

double global_grad_norm(const ParamStore& ps) {
  double s = 0.0;
  for (const auto& [_, p] : ps.items()) {
    if (!p->requires_grad || p->grad.data.empty()) continue;
    for (double g : p->grad.data) s += g * g;
  }
  return std::sqrt(s);
}

void clip_global_grad_norm(ParamStore& ps, double max_norm) {
  const double n = global_grad_norm(ps);
  if (n <= max_norm || n == 0.0) return;
  const double f = max_norm / n;
  for (auto& [_, p] : ps.items()) {
    if (!p->requires_grad || p->grad.data.empty()) continue;
    for (double& g : p->grad.data) g *= f;
  }
}

void Adam::step(ParamStore& ps) {
  if (m_.empty()) {
    m_.resize(ps.size());
    v_.resize(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const Tensor& val = ps.items()[i].second->value;
      m_[i] = Tensor::zeros(val.shape);
      v_[i] = Tensor::zeros(val.shape);
    }
  }
  if (m_.size() != ps.size())
    throw ConfigError("Adam: store size changed after first step");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1, double(t_));
  const double bc2 = 1.0 - std::pow(beta2, double(t_));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Node& p = *ps.items()[i].second;
    if (!p.requires_grad || p.grad.data.empty()) continue;
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t j = 0; j < p.value.data.size(); ++j) {
      const double g = p.grad.data[j];
      m.data[j] = beta1 * m.data[j] + (1.0 - beta1) * g;
      v.data[j] = beta2 * v.data[j] + (1.0 - beta2) * g * g;
      const double mh = m.data[j] / bc1;
      const double vh = v.data[j] / bc2;
      p.value.data[j] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
}

}  // namespace umt::nn
