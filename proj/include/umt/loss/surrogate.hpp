#pragma once
#include "umt/core/image.hpp"
#include "umt/nn/graph.hpp"

namespace umt::loss {

/// Differentiable edge map: per-channel reflect-padded Gaussian blur, Sobel
/// gradients, smooth magnitude sqrt(gx^2+gy^2+1e-8) shifted down by
/// sqrt(1e-8) so a constant image maps to exactly zero, summed over
/// channels. x is (N,C,H,W) in [0,1]; the result is (N,1,H,W), nonnegative.
nn::Var edge_surrogate(const nn::Var& x, double sigma = 1.4, int kernel = 5);

/// Convenience evaluation on a plain image, returns an (H,W) map.
nn::Tensor edge_surrogate_map(const Image& img, double sigma = 1.4, int kernel = 5);

}  // namespace umt::loss
