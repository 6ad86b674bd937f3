#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "umt/core/config.hpp"
#include "umt/nn/modules.hpp"

namespace umt::enc {

struct CharEncoderConfig {
  int d_v = 64;  // glyph feature width; fixed at construction
  std::uint64_t init_seed = 1;

  Config to_config() const;
  static CharEncoderConfig from_config(const Config& c);
  std::uint64_t hash() const { return to_config().hash(); }
};

/// Convolutional glyph encoder over 80x80 single-channel crops. features()
/// yields the d_v-dim vector used both as the char-visual token and as the
/// FID feature; the four classifier heads exist for stage-1 training and for
/// OCR readback. Inference is deterministic: no dropout, no running stats.
class CharEncoder {
 public:
  explicit CharEncoder(const CharEncoderConfig& cfg);

  const CharEncoderConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return ps_; }
  const nn::ParamStore& params() const { return ps_; }

  /// x: (N, 1, 80, 80) in [0,1]. Returns (N, d_v), rectified.
  nn::Var features(const nn::Var& x) const;

  nn::Var char_logits(const nn::Var& feat) const;  // (N, kNumCharClasses)
  nn::Var font_logits(const nn::Var& feat) const;  // (N, kNumFonts)
  nn::Var color_logits(const nn::Var& feat) const; // (N, kPaletteSize)
  nn::Var size_logits(const nn::Var& feat) const;  // (N, kNumSizeBuckets)

  /// Argmax char ids for a crop batch (N,1,80,80); no autodiff graph kept.
  std::vector<int> classify_chars(const nn::Tensor& crops) const;
  /// Feature rows (N, d_v) for a crop batch; no autodiff graph kept.
  nn::Tensor feature_matrix(const nn::Tensor& crops) const;

 private:
  CharEncoderConfig cfg_;
  nn::ParamStore ps_;
  nn::Conv2d conv1_, conv2_, conv3_;
  nn::Linear fc_;
  nn::Linear head_char_, head_font_, head_color_, head_size_;
};

}  // namespace umt::enc
