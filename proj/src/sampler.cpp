#include "umt/flow/sampler.hpp"

#include "umt/core/error.hpp"
#include "umt/core/rng.hpp"
#include "umt/nn/ops.hpp"

namespace umt::flow {

using nn::Tensor;
using nn::Var;

Tensor integrate(const VelocityField& field, Tensor z, int steps) {
  if (steps < 1) throw SamplerError("integrate: steps must be >= 1");
  const double dt = 1.0 / steps;
  for (int k = steps; k >= 1; --k) {
    const double t = double(k) / steps;
    Tensor v = field(z, t);
    if (v.shape != z.shape)
      throw ShapeError("integrate: field output shape mismatch");
    for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] -= dt * v.data[i];
  }
  return z;
}

Image sample(const Backbone& bb, const latent::LatentCodec& codec,
             const Tensor& z_m, const Tensor& z_c, const Var& cond,
             const Tensor* cond_valid, int steps, std::uint64_t seed) {
  if (steps < 1) throw SamplerError("sample: steps must be >= 1");
  const std::vector<int> lat_shape = {codec.channels(), codec.latent_h(),
                                      codec.latent_w()};
  if (z_m.shape != lat_shape || z_c.shape != lat_shape)
    throw ShapeError("sample: condition latents do not match the codec shape");
  const std::vector<int> batched = {1, lat_shape[0], lat_shape[1], lat_shape[2]};
  Var zm = nn::constant(z_m.reshaped(batched));
  Var zc = nn::constant(z_c.reshaped(batched));

  VelocityField field = [&](const Tensor& z, double t) {
    Var v = bb.forward(nn::constant(z.reshaped(batched)), zm, zc, cond,
                       cond_valid, {t});
    return v->value.reshaped(z.shape);
  };

  Rng rng(seed);
  Tensor z = Tensor::randn(lat_shape, rng);
  return codec.decode(integrate(field, std::move(z), steps));
}

}  // namespace umt::flow
