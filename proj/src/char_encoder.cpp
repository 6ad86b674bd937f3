#include "umt/enc/char_encoder.hpp"

#include "umt/core/error.hpp"
#include "umt/glyph/atlas.hpp"
#include "umt/glyph/render.hpp"
#include "umt/glyph/scene.hpp"
#include "umt/nn/ops.hpp"

namespace umt::enc {

using nn::Var;

Config CharEncoderConfig::to_config() const {
  Config c;
  c.set_int("char_enc.dv", d_v);
  c.set_int("char_enc.init_seed", static_cast<long long>(init_seed));
  return c;
}

CharEncoderConfig CharEncoderConfig::from_config(const Config& c) {
  CharEncoderConfig e;
  e.d_v = static_cast<int>(c.get_int("char_enc.dv", e.d_v));
  e.init_seed = static_cast<std::uint64_t>(c.get_int("char_enc.init_seed", 1));
  return e;
}

CharEncoder::CharEncoder(const CharEncoderConfig& cfg) : cfg_(cfg) {
  if (cfg.d_v < 1) throw ConfigError("char encoder: d_v must be positive");
  Rng rng(cfg.init_seed);
  conv1_ = nn::Conv2d::create(ps_, "ce.conv1", 1, 8, 3, 1, 1, rng);
  conv2_ = nn::Conv2d::create(ps_, "ce.conv2", 8, 16, 3, 1, 1, rng);
  conv3_ = nn::Conv2d::create(ps_, "ce.conv3", 16, 32, 3, 1, 1, rng);
  fc_ = nn::Linear::create(ps_, "ce.fc", 32 * 5 * 5, cfg.d_v, rng);
  head_char_ = nn::Linear::create(ps_, "ce.head_char", cfg.d_v, glyph::kNumCharClasses, rng);
  head_font_ = nn::Linear::create(ps_, "ce.head_font", cfg.d_v, glyph::kNumFonts, rng);
  head_color_ = nn::Linear::create(ps_, "ce.head_color", cfg.d_v, glyph::kPaletteSize, rng);
  head_size_ = nn::Linear::create(ps_, "ce.head_size", cfg.d_v, glyph::kNumSizeBuckets, rng);
}

Var CharEncoder::features(const Var& x) const {
  const nn::Tensor& v = x->value;
  if (v.ndim() != 4 || v.dim(1) != 1 || v.dim(2) != glyph::kEncoderGlyphPx ||
      v.dim(3) != glyph::kEncoderGlyphPx)
    throw ShapeError("char encoder: want (N,1,80,80), got " + v.shape_str());
  const int n = v.dim(0);
  Var h = nn::avg_pool2d(x, 2);                    // 40x40
  h = nn::relu(conv1_(h));
  h = nn::avg_pool2d(h, 2);                        // 20x20
  h = nn::relu(conv2_(h));
  h = nn::avg_pool2d(h, 2);                        // 10x10
  h = nn::relu(conv3_(h));
  h = nn::avg_pool2d(h, 2);                        // 5x5
  h = nn::reshape(h, {n, 32 * 5 * 5});
  return nn::relu(fc_(h));
}

Var CharEncoder::char_logits(const Var& feat) const { return head_char_(feat); }
Var CharEncoder::font_logits(const Var& feat) const { return head_font_(feat); }
Var CharEncoder::color_logits(const Var& feat) const { return head_color_(feat); }
Var CharEncoder::size_logits(const Var& feat) const { return head_size_(feat); }

std::vector<int> CharEncoder::classify_chars(const nn::Tensor& crops) const {
  Var logits = char_logits(features(nn::constant(crops)));
  const nn::Tensor& l = logits->value;
  const int n = l.rows(), k = l.cols();
  std::vector<int> ids(n);
  for (int r = 0; r < n; ++r) {
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (l.data[r * k + j] > l.data[r * k + best]) best = j;
    ids[r] = best;
  }
  return ids;
}

nn::Tensor CharEncoder::feature_matrix(const nn::Tensor& crops) const {
  return features(nn::constant(crops))->value;
}

}  // namespace umt::enc
