#pragma once
#include "umt/nn/graph.hpp"
#include "umt/nn/tensor.hpp"

namespace umt::flow {

/// Rectified-flow convention: data sits at t=0, noise at t=1.
///   z_t = (1-t) * z_0 + t * eps        v* = eps - z_0
/// estimate_x0 inverts forward_noise exactly: z_t - t * v* == z_0.
struct NoisePair {
  nn::Tensor z_t;
  nn::Tensor v_star;
};

NoisePair forward_noise(const nn::Tensor& z0, double t, const nn::Tensor& eps);
nn::Tensor target_velocity(const nn::Tensor& z0, const nn::Tensor& eps);

nn::Tensor estimate_x0(const nn::Tensor& z_t, const nn::Tensor& v, double t);
/// Graph form used inside the regional-consistency loss.
nn::Var estimate_x0(const nn::Var& z_t, const nn::Var& v, double t);

}  // namespace umt::flow
