#include "umt/flow/noise.hpp"

#include "umt/core/error.hpp"
#include "umt/nn/ops.hpp"

namespace umt::flow {

using nn::Tensor;
using nn::Var;

namespace {
void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape != b.shape) throw ShapeError(std::string(what) + ": shape mismatch");
}
}  // namespace

NoisePair forward_noise(const Tensor& z0, double t, const Tensor& eps) {
  require_same(z0, eps, "forward_noise");
  NoisePair out;
  out.z_t = z0;
  out.v_star = z0;
  for (std::size_t i = 0; i < z0.data.size(); ++i) {
    out.z_t.data[i] = (1.0 - t) * z0.data[i] + t * eps.data[i];
    out.v_star.data[i] = eps.data[i] - z0.data[i];
  }
  return out;
}

Tensor target_velocity(const Tensor& z0, const Tensor& eps) {
  require_same(z0, eps, "target_velocity");
  Tensor v = eps;
  for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] -= z0.data[i];
  return v;
}

Tensor estimate_x0(const Tensor& z_t, const Tensor& v, double t) {
  require_same(z_t, v, "estimate_x0");
  Tensor x0 = z_t;
  for (std::size_t i = 0; i < x0.data.size(); ++i) x0.data[i] -= t * v.data[i];
  return x0;
}

Var estimate_x0(const Var& z_t, const Var& v, double t) {
  return nn::sub(z_t, nn::scale(v, t));
}

}  // namespace umt::flow
