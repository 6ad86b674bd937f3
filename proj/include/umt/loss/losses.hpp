#pragma once
#include <string>

#include "umt/core/config.hpp"
#include "umt/loss/canny.hpp"
#include "umt/nn/graph.hpp"

namespace umt::loss {

/// per_masked_element divides masked sums by the masked-element count, so
/// the loss scale does not shrink with the mask; global_mean divides by the
/// full element count (the literal expectation).
enum class MaskNorm { per_masked_element, global_mean };
std::string mask_norm_name(MaskNorm m);
MaskNorm mask_norm_from_name(const std::string& s);

struct LossConfig {
  double lambda = 5.0;  // weight of the latent regional term inside L_RC
  double beta = 2.0;    // weight of L_RC in the total
  MaskNorm mask_norm = MaskNorm::per_masked_element;
  CannyParams canny;  // evaluation edge operator parameters

  Config to_config() const;
  static LossConfig from_config(const Config& c);
};

struct LossReport {
  double l_rf = 0.0, l_rcl = 0.0, l_rci = 0.0, total = 0.0;
  double masked_elements = 0.0;  // sum of the latent loss mask
  double rgb_masked_pixels = 0.0;  // dilated-mask pixel count (rgb denominator)
};

/// Differentiable loss terms plus their combination.
struct LossTerms {
  nn::Var l_rf, l_rcl, l_rci, total;
};

/// Mean over all elements of (v_hat - v_star)^2.
nn::Var loss_rf(const nn::Var& v_hat, const nn::Tensor& v_star);

/// Sum of m * (v_hat - v_star)^2 over the masked elements, divided by
/// max(1, sum m) (or by the element count under global_mean). m_lat is
/// binary with the same shape as v_hat.
nn::Var loss_rc_latent(const nn::Var& v_hat, const nn::Tensor& v_star,
                       const nn::Tensor& m_lat,
                       MaskNorm norm = MaskNorm::per_masked_element);

/// Squared difference of the surrogate edge maps of i_hat*m and i_s*m,
/// divided by max(1, pixels of the mask dilated by 2) (or the pixel count
/// under global_mean). i_hat, i_s are (N,3,H,W) in [0,1]; i_m is (N,1,H,W)
/// binary.
nn::Var loss_rc_rgb(const nn::Var& i_hat, const nn::Tensor& i_s,
                    const nn::Tensor& i_m,
                    MaskNorm norm = MaskNorm::per_masked_element);

/// total = l_rf + beta * (l_rci + lambda * l_rcl).
LossTerms total_loss(const nn::Var& l_rf, const nn::Var& l_rcl,
                     const nn::Var& l_rci, const LossConfig& cfg);

/// Pixel count of the mask dilated by `radius` (Chebyshev), per batch.
double dilated_mask_pixels(const nn::Tensor& i_m, int radius);

LossReport make_report(const LossTerms& t, double masked_elements,
                       double rgb_masked_pixels);

}  // namespace umt::loss
