#include "umt/loss/surrogate.hpp"

#include <cmath>

#include "umt/core/error.hpp"
#include "umt/latent/codec.hpp"
#include "umt/nn/ops.hpp"

namespace umt::loss {

using nn::Tensor;
using nn::Var;

namespace {

/// Depthwise (C,C,k,k) kernel: each output channel filters only its own
/// input channel.
Tensor depthwise(int c, const std::vector<double>& k2d, int k) {
  Tensor w({c, c, k, k});
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < k * k; ++i)
      w.data[(std::size_t(ch) * std::size_t(c) + std::size_t(ch)) * std::size_t(k * k) +
             std::size_t(i)] = k2d[std::size_t(i)];
  return w;
}

std::vector<double> gauss2d(int k, double sigma) {
  const int r = k / 2;
  std::vector<double> kw(std::size_t(k) * std::size_t(k));
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      kw[std::size_t(dy + r) * std::size_t(k) + std::size_t(dx + r)] = v;
      sum += v;
    }
  for (double& v : kw) v /= sum;
  return kw;
}

}  // namespace

Var edge_surrogate(const Var& x, double sigma, int kernel) {
  if (x->value.ndim() != 4) throw ShapeError("edge_surrogate: expected (N,C,H,W)");
  if (kernel < 3 || kernel % 2 == 0 || sigma <= 0.0)
    throw ConfigError("edge_surrogate: kernel must be odd >= 3, sigma positive");
  const int c = x->value.dim(1);

  const Var gw = nn::constant(depthwise(c, gauss2d(kernel, sigma), kernel));
  const Var kx = nn::constant(depthwise(c, {-1, 0, 1, -2, 0, 2, -1, 0, 1}, 3));
  const Var ky = nn::constant(depthwise(c, {-1, -2, -1, 0, 0, 0, 1, 2, 1}, 3));
  const Var ones = nn::constant(Tensor::full({1, c, 1, 1}, 1.0));

  Var blur = nn::conv2d(nn::reflect_pad2d(x, kernel / 2), gw, nullptr, 1, 0);
  Var pb = nn::reflect_pad2d(blur, 1);
  Var gx = nn::conv2d(pb, kx, nullptr, 1, 0);
  Var gy = nn::conv2d(pb, ky, nullptr, 1, 0);
  Var mag = nn::sqrt_eps(nn::add(nn::square(gx), nn::square(gy)), 1e-8);
  // Same sqrt on the same literal: a zero gradient yields exactly zero.
  mag = nn::add_scalar(mag, -std::sqrt(1e-8));
  return nn::conv2d(mag, ones, nullptr, 1, 0);
}

Tensor edge_surrogate_map(const Image& img, double sigma, int kernel) {
  Tensor chw = latent::image_to_chw(img).reshaped({1, img.c, img.h, img.w});
  Tensor out = edge_surrogate(nn::constant(chw), sigma, kernel)->value;
  return out.reshaped({img.h, img.w});
}

}  // namespace umt::loss
