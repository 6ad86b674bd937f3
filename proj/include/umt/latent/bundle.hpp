#pragma once
#include <string>

#include "umt/glyph/scene.hpp"
#include "umt/latent/codec.hpp"

namespace umt::latent {

/// What the condition latent z_c encodes.
///   masked: I_c = I_s (.) I_m, the stored corpus condition (region content).
///   hole:   I_s (.) (1 - I_m), background context with the target region
///           zeroed; carries no glyph pixels, so training cannot copy the
///           answer out of the condition. Default for stage-2/3 training.
enum class ConditionSource { masked, hole };
const char* condition_source_name(ConditionSource s);
ConditionSource condition_source_from_name(const std::string& s);

struct BundleOptions {
  ConditionSource condition_source = ConditionSource::masked;
};

/// Per-sample training quantities. All latent tensors share (cz, lh, lw).
struct LatentBundle {
  nn::Tensor z0;      // encode(I_s)
  nn::Tensor zm;      // mask conditioning channel
  nn::Tensor zc;      // encode(condition image)
  nn::Tensor m_lat;   // binary loss mask
  nn::Tensor z_t;     // (1-t) z0 + t eps
  nn::Tensor eps;
  nn::Tensor v_star;  // eps - z0
  double t = 0.0;
};

Image condition_image(const glyph::SceneSample& s, ConditionSource src);

LatentBundle build_bundle(const glyph::SceneSample& s, const LatentCodec& codec,
                          double t, const nn::Tensor& eps,
                          const BundleOptions& opt = {});

}  // namespace umt::latent
