#pragma once
#include <cstdint>
#include <vector>

#include "umt/core/config.hpp"
#include "umt/nn/modules.hpp"

namespace umt::flow {

struct BackboneConfig {
  int patch = 2;
  int width = 256;
  int depth = 6;
  int heads = 4;
  int cz = 3;  // channels per latent stream; input is 3*cz (z_t | z_m | z_c)
  std::uint64_t init_seed = 1;

  Config to_config() const;
  static BackboneConfig from_config(const Config& c);
  std::uint64_t hash() const { return to_config().hash(); }
};

/// Diffusion transformer velocity network. Patchified latent tokens with
/// sinusoidal positions; timestep enters through adaLN modulation (zero-init,
/// so every block starts as the identity and the head starts at zero); each
/// block runs self-attention, cross-attention to the condition sequence
/// (invalid tokens carry exactly zero weight), and a GELU feed-forward.
class Backbone {
 public:
  explicit Backbone(const BackboneConfig& cfg);

  const BackboneConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return ps_; }
  const nn::ParamStore& params() const { return ps_; }

  /// z_*: (N, cz, lh, lw). cond: (N*Lc, width) token rows with valid mask
  /// (N, Lc) in {0,1} (null = all valid). t_vec: one timestep per sample.
  /// Returns the velocity estimate shaped like z_t.
  nn::Var forward(const nn::Var& z_t, const nn::Var& z_m, const nn::Var& z_c,
                  const nn::Var& cond, const nn::Tensor* cond_valid,
                  const std::vector<double>& t_vec) const;

 private:
  struct Block {
    nn::Linear ada;                  // width -> 9*width, zero-init
    nn::Linear wq, wk, wv, wo;       // self-attention
    nn::Linear cq, ck, cv, co;       // cross-attention
    nn::Linear ff1, ff2;
  };

  BackboneConfig cfg_;
  nn::ParamStore ps_;
  nn::Linear tok_embed_;
  nn::Linear time1_, time2_;
  std::vector<Block> blocks_;
  nn::Linear ada_final_;  // width -> 2*width, zero-init
  nn::Linear head_;       // width -> patch^2*cz, zero-init
};

nn::Var predict_velocity(const Backbone& bb, const nn::Var& z_t,
                         const nn::Var& z_m, const nn::Var& z_c,
                         const nn::Var& cond, const nn::Tensor* cond_valid,
                         const std::vector<double>& t_vec);

}  // namespace umt::flow
