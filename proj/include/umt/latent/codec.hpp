#pragma once
#include <cstdint>
#include <string>

#include "umt/core/config.hpp"
#include "umt/core/image.hpp"
#include "umt/nn/modules.hpp"

namespace umt::latent {

/// IDENTITY reinterprets the HWC image as a CHW latent (f=1, C_z=3); encode
/// and decode are bitwise inverses, which the zero-loss oracles rely on.
/// VAE is a small 3-level conv autoencoder (f=4, C_z=4) trained on the
/// synthetic corpus; inference uses the posterior mean.
enum class CodecMode { identity, vae };
const char* codec_mode_name(CodecMode m);
CodecMode codec_mode_from_name(const std::string& s);

struct CodecConfig {
  CodecMode mode = CodecMode::identity;
  int canvas = 64;
  std::uint64_t init_seed = 1;

  int f() const { return mode == CodecMode::identity ? 1 : 4; }
  int cz() const { return mode == CodecMode::identity ? 3 : 4; }

  Config to_config() const;
  static CodecConfig from_config(const Config& c);
  std::uint64_t hash() const { return to_config().hash(); }
};

struct VaeMoments {
  nn::Var mean;    // (N, cz, lh, lw)
  nn::Var logvar;  // (N, cz, lh, lw)
};

struct VaeLossParts {
  nn::Var total;  // recon + kl_weight * kl
  nn::Var recon;  // mse(x_hat, x)
  nn::Var kl;
};

inline constexpr double kVaeKlWeight = 1e-6;

class LatentCodec {
 public:
  explicit LatentCodec(const CodecConfig& cfg);

  const CodecConfig& config() const { return cfg_; }
  int f() const { return cfg_.f(); }
  int channels() const { return cfg_.cz(); }
  int latent_h() const { return cfg_.canvas / cfg_.f(); }
  int latent_w() const { return cfg_.canvas / cfg_.f(); }
  std::size_t latent_numel() const {
    return std::size_t(channels()) * latent_h() * latent_w();
  }

  /// Image (canvas x canvas x 3) -> latent (cz, lh, lw). ShapeError on a
  /// mismatched canvas. Deterministic: VAE mode returns the posterior mean.
  nn::Tensor encode(const Image& img) const;
  Image decode(const nn::Tensor& z) const;

  // Graph forms for VAE training; ConfigError in identity mode.
  VaeMoments encode_moments(const nn::Var& x) const;   // x: (N, 3, H, W)
  nn::Var decode_graph(const nn::Var& z) const;        // z: (N, cz, lh, lw)
  /// Reparameterized reconstruction loss; eps shaped like the moments.
  VaeLossParts training_loss(const nn::Var& x, const nn::Tensor& eps) const;

  nn::ParamStore& params() { return ps_; }
  const nn::ParamStore& params() const { return ps_; }

 private:
  CodecConfig cfg_;
  nn::ParamStore ps_;
  nn::Conv2d enc1_, enc2_, enc3_, enc_out_;
  nn::Conv2d dec1_, dec2_, dec3_, dec_out_;
};

/// Layout permutation helpers (exact, value-preserving).
nn::Tensor image_to_chw(const Image& img);
Image chw_to_image(const nn::Tensor& t);

/// Binary loss mask in latent resolution: area-pool f x f blocks, threshold
/// at 0.5 with ties going to 1, replicated across cz channels. Monotone in
/// the input mask.
nn::Tensor mask_to_latent(const Image& mask, int f, int cz);

}  // namespace umt::latent
