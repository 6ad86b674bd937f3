#pragma once
#include "umt/core/image.hpp"
#include "umt/nn/tensor.hpp"

namespace umt::loss {

/// Thresholds are fractions of the maximum gradient magnitude.
struct CannyParams {
  double sigma = 1.4;
  int kernel = 5;
  double low = 0.1;
  double high = 0.3;
};

/// Exact (non-differentiable) edge detector for evaluation: Gaussian blur
/// with mirrored reflection, Sobel, 4-direction non-maximum suppression,
/// relative double threshold, 8-connected hysteresis. gray is (H,W) in
/// [0,1]; the result is (H,W) in {0,1}.
///
/// The arithmetic order (row-major kernel accumulation, >= suppression on
/// both sides, out-of-bounds neighbors treated as zero, thresholds relative
/// to the pre-suppression maximum) is part of the contract: golden fixtures
/// compare bit for bit.
nn::Tensor canny(const nn::Tensor& gray, const CannyParams& p = {});

/// Luminance convenience for 3-channel images.
nn::Tensor canny(const Image& img, const CannyParams& p = {});

}  // namespace umt::loss
