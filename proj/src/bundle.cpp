#include "umt/latent/bundle.hpp"

#include "umt/core/error.hpp"
#include "umt/flow/noise.hpp"

namespace umt::latent {

const char* condition_source_name(ConditionSource s) {
  return s == ConditionSource::masked ? "masked" : "hole";
}

ConditionSource condition_source_from_name(const std::string& s) {
  if (s == "masked") return ConditionSource::masked;
  if (s == "hole") return ConditionSource::hole;
  throw ConfigError("unknown condition source: " + s);
}

Image condition_image(const glyph::SceneSample& s, ConditionSource src) {
  if (src == ConditionSource::masked) return s.condition;
  Image out = s.image;
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      const double keep = 1.0 - s.mask.at(y, x);
      for (int c = 0; c < out.c; ++c) out.at(y, x, c) *= keep;
    }
  return out;
}

LatentBundle build_bundle(const glyph::SceneSample& s, const LatentCodec& codec,
                          double t, const nn::Tensor& eps,
                          const BundleOptions& opt) {
  LatentBundle b;
  b.t = t;
  b.z0 = codec.encode(s.image);
  b.zc = codec.encode(condition_image(s, opt.condition_source));
  b.m_lat = mask_to_latent(s.mask, codec.f(), codec.channels());
  if (codec.config().mode == CodecMode::identity) {
    b.zm = b.m_lat;
  } else {
    Image mask3(s.mask.h, s.mask.w, 3);
    for (int y = 0; y < s.mask.h; ++y)
      for (int x = 0; x < s.mask.w; ++x)
        for (int c = 0; c < 3; ++c) mask3.at(y, x, c) = s.mask.at(y, x);
    b.zm = codec.encode(mask3);
  }
  b.eps = eps;
  flow::NoisePair np = flow::forward_noise(b.z0, t, eps);
  b.z_t = std::move(np.z_t);
  b.v_star = std::move(np.v_star);
  return b;
}

}  // namespace umt::latent
