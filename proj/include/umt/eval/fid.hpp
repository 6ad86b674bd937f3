#pragma once
#include "umt/nn/tensor.hpp"

namespace umt::eval {

/// Frechet distance between Gaussians fit to two feature sets (rows are
/// samples): ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with
/// sample covariances (ddof=1) jittered by 1e-6 I and the matrix square
/// root taken through the symmetric form S_a^{1/2} S_b S_a^{1/2}. Clamped
/// at zero against rounding.
double metric_fid(const nn::Tensor& features_a, const nn::Tensor& features_b);

}  // namespace umt::eval
