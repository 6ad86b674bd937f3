#include "umt/loss/losses.hpp"

#include <algorithm>
#include <cmath>

#include "umt/core/error.hpp"
#include "umt/loss/surrogate.hpp"
#include "umt/nn/ops.hpp"

namespace umt::loss {

using nn::Tensor;
using nn::Var;

std::string mask_norm_name(MaskNorm m) {
  return m == MaskNorm::per_masked_element ? "per_masked_element" : "global_mean";
}

MaskNorm mask_norm_from_name(const std::string& s) {
  if (s == "per_masked_element") return MaskNorm::per_masked_element;
  if (s == "global_mean") return MaskNorm::global_mean;
  throw ConfigError("unknown mask normalization: " + s);
}

Config LossConfig::to_config() const {
  Config c;
  c.set_num("loss.lambda", lambda);
  c.set_num("loss.beta", beta);
  c.set("loss.mask_norm", mask_norm_name(mask_norm));
  c.set_num("loss.canny.sigma", canny.sigma);
  c.set_int("loss.canny.kernel", canny.kernel);
  c.set_num("loss.canny.low", canny.low);
  c.set_num("loss.canny.high", canny.high);
  return c;
}

LossConfig LossConfig::from_config(const Config& c) {
  LossConfig k;
  k.lambda = c.get_num("loss.lambda", k.lambda);
  k.beta = c.get_num("loss.beta", k.beta);
  k.mask_norm = mask_norm_from_name(
      c.get_str("loss.mask_norm", mask_norm_name(k.mask_norm)));
  k.canny.sigma = c.get_num("loss.canny.sigma", k.canny.sigma);
  k.canny.kernel = static_cast<int>(c.get_int("loss.canny.kernel", k.canny.kernel));
  k.canny.low = c.get_num("loss.canny.low", k.canny.low);
  k.canny.high = c.get_num("loss.canny.high", k.canny.high);
  if (k.lambda < 0.0 || k.beta < 0.0)
    throw ConfigError("loss: lambda and beta must be nonnegative");
  return k;
}

Var loss_rf(const Var& v_hat, const Tensor& v_star) {
  if (!v_hat->value.same_shape(v_star)) throw ShapeError("loss_rf: shape mismatch");
  return nn::mse(v_hat, nn::constant(v_star));
}

Var loss_rc_latent(const Var& v_hat, const Tensor& v_star, const Tensor& m_lat,
                   MaskNorm norm) {
  if (!v_hat->value.same_shape(v_star) || !v_hat->value.same_shape(m_lat))
    throw ShapeError("loss_rc_latent: shape mismatch");
  double denom = 0.0;
  if (norm == MaskNorm::per_masked_element) {
    for (double m : m_lat.data) denom += m;
    denom = std::max(1.0, denom);
  } else {
    denom = double(m_lat.numel());
  }
  return nn::masked_sq_sum(v_hat, nn::constant(v_star), m_lat, denom);
}

double dilated_mask_pixels(const Tensor& i_m, int radius) {
  if (i_m.ndim() != 4 || i_m.dim(1) != 1)
    throw ShapeError("dilated_mask_pixels: expected (N,1,H,W)");
  const int n = i_m.dim(0), h = i_m.dim(2), w = i_m.dim(3);
  double count = 0.0;
  for (int b = 0; b < n; ++b) {
    const double* m = i_m.data.data() + std::size_t(b) * std::size_t(h) * std::size_t(w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        bool hit = false;
        for (int dy = -radius; dy <= radius && !hit; ++dy)
          for (int dx = -radius; dx <= radius && !hit; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny >= 0 && ny < h && nx >= 0 && nx < w &&
                m[std::size_t(ny) * std::size_t(w) + std::size_t(nx)] != 0.0)
              hit = true;
          }
        if (hit) count += 1.0;
      }
  }
  return count;
}

Var loss_rc_rgb(const Var& i_hat, const Tensor& i_s, const Tensor& i_m,
                MaskNorm norm) {
  const auto& s = i_hat->value.shape;
  if (s.size() != 4 || !i_hat->value.same_shape(i_s))
    throw ShapeError("loss_rc_rgb: i_hat/i_s must both be (N,C,H,W)");
  if (i_m.ndim() != 4 || i_m.dim(0) != s[0] || i_m.dim(1) != 1 ||
      i_m.dim(2) != s[2] || i_m.dim(3) != s[3])
    throw ShapeError("loss_rc_rgb: i_m must be (N,1,H,W)");
  const int n = s[0], c = s[1], h = s[2], w = s[3];

  // Broadcast the mask across channels; mask both images identically.
  Tensor m_full({n, c, h, w});
  const std::size_t hw = std::size_t(h) * std::size_t(w);
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      std::copy(i_m.data.begin() + std::size_t(b) * hw,
                i_m.data.begin() + std::size_t(b + 1) * hw,
                m_full.data.begin() + (std::size_t(b) * c + std::size_t(ch)) * hw);
  Tensor src_masked = i_s;
  for (std::size_t i = 0; i < src_masked.data.size(); ++i)
    src_masked.data[i] *= m_full.data[i];

  Var e_hat = edge_surrogate(nn::mul_const(i_hat, m_full));
  Var e_src = edge_surrogate(nn::constant(src_masked));

  double denom = norm == MaskNorm::per_masked_element
                     ? std::max(1.0, dilated_mask_pixels(i_m, 2))
                     : double(i_m.numel());
  return nn::scale(nn::sum_all(nn::square(nn::sub(e_hat, e_src))), 1.0 / denom);
}

LossTerms total_loss(const Var& l_rf, const Var& l_rcl, const Var& l_rci,
                     const LossConfig& cfg) {
  if (cfg.lambda < 0.0 || cfg.beta < 0.0)
    throw ConfigError("loss: lambda and beta must be nonnegative");
  LossTerms t;
  t.l_rf = l_rf;
  t.l_rcl = l_rcl;
  t.l_rci = l_rci;
  t.total = nn::add(
      l_rf, nn::scale(nn::add(l_rci, nn::scale(l_rcl, cfg.lambda)), cfg.beta));
  return t;
}

LossReport make_report(const LossTerms& t, double masked_elements,
                       double rgb_masked_pixels) {
  LossReport r;
  r.l_rf = t.l_rf->value.data[0];
  r.l_rcl = t.l_rcl->value.data[0];
  r.l_rci = t.l_rci->value.data[0];
  r.total = t.total->value.data[0];
  r.masked_elements = masked_elements;
  r.rgb_masked_pixels = rgb_masked_pixels;
  return r;
}

}  // namespace umt::loss
