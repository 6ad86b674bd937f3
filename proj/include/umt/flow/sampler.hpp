#pragma once
#include <cstdint>
#include <functional>

#include "umt/flow/backbone.hpp"
#include "umt/latent/codec.hpp"

namespace umt::flow {

using VelocityField = std::function<nn::Tensor(const nn::Tensor& z, double t)>;

/// Euler integration of dz/dt = -v from t=1 to 0: for k = steps..1 at
/// t_k = k/steps, z <- z - (1/steps) * field(z, t_k). With the exact
/// straight-path field v = eps - z_0 the result equals z_0 for any step
/// count. SamplerError if steps < 1.
nn::Tensor integrate(const VelocityField& field, nn::Tensor z, int steps);

/// Draws z ~ N(0,I) from `seed`, integrates the backbone velocity under the
/// given conditions, and decodes. z_m, z_c: (cz, lh, lw); cond: (Lc, width)
/// with optional (1, Lc) valid mask. Deterministic given identical inputs.
Image sample(const Backbone& bb, const latent::LatentCodec& codec,
             const nn::Tensor& z_m, const nn::Tensor& z_c, const nn::Var& cond,
             const nn::Tensor* cond_valid, int steps, std::uint64_t seed);

}  // namespace umt::flow
