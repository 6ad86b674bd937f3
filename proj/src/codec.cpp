#include "umt/latent/codec.hpp"

#include "umt/core/error.hpp"
#include "umt/core/rng.hpp"
#include "umt/nn/ops.hpp"

namespace umt::latent {

using nn::Tensor;
using nn::Var;

const char* codec_mode_name(CodecMode m) {
  return m == CodecMode::identity ? "IDENTITY" : "VAE";
}

CodecMode codec_mode_from_name(const std::string& s) {
  if (s == "IDENTITY") return CodecMode::identity;
  if (s == "VAE") return CodecMode::vae;
  throw ConfigError("unknown codec mode: " + s);
}

Config CodecConfig::to_config() const {
  Config c;
  c.set("codec.mode", codec_mode_name(mode));
  c.set_int("codec.canvas", canvas);
  c.set_int("codec.init_seed", static_cast<std::int64_t>(init_seed));
  return c;
}

CodecConfig CodecConfig::from_config(const Config& c) {
  CodecConfig k;
  k.mode = codec_mode_from_name(c.get_str("codec.mode", "IDENTITY"));
  k.canvas = static_cast<int>(c.get_int("codec.canvas", k.canvas));
  k.init_seed = static_cast<std::uint64_t>(c.get_int("codec.init_seed", 1));
  return k;
}

Tensor image_to_chw(const Image& img) {
  Tensor t({img.c, img.h, img.w});
  std::size_t i = 0;
  for (int c = 0; c < img.c; ++c)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) t.data[i++] = img.at(y, x, c);
  return t;
}

Image chw_to_image(const Tensor& t) {
  if (t.shape.size() != 3) throw ShapeError("chw_to_image: want rank-3 tensor");
  Image img(t.shape[1], t.shape[2], t.shape[0]);
  std::size_t i = 0;
  for (int c = 0; c < img.c; ++c)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) img.at(y, x, c) = t.data[i++];
  return img;
}

Tensor mask_to_latent(const Image& mask, int f, int cz) {
  if (mask.c != 1) throw ShapeError("mask_to_latent: mask must be single-channel");
  if (f < 1 || mask.h % f != 0 || mask.w % f != 0)
    throw ShapeError("mask_to_latent: canvas not divisible by f");
  const int lh = mask.h / f, lw = mask.w / f;
  Tensor m({cz, lh, lw});
  for (int y = 0; y < lh; ++y)
    for (int x = 0; x < lw; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < f; ++dy)
        for (int dx = 0; dx < f; ++dx)
          s += mask.at(y * f + dy, x * f + dx) > 0.5 ? 1.0 : 0.0;
      const double v = (s / double(f * f) >= 0.5) ? 1.0 : 0.0;
      for (int c = 0; c < cz; ++c)
        m.data[(std::size_t(c) * lh + y) * lw + x] = v;
    }
  return m;
}

LatentCodec::LatentCodec(const CodecConfig& cfg) : cfg_(cfg) {
  if (cfg_.canvas < 8 || cfg_.canvas % cfg_.f() != 0)
    throw ConfigError("codec: canvas must be positive and divisible by f");
  if (cfg_.mode == CodecMode::identity) return;
  Rng rng(cfg_.init_seed);
  const int cz = cfg_.cz();
  enc1_ = nn::Conv2d::create(ps_, "codec.enc1", 3, 16, 3, 1, 1, rng);
  enc2_ = nn::Conv2d::create(ps_, "codec.enc2", 16, 32, 4, 2, 1, rng);
  enc3_ = nn::Conv2d::create(ps_, "codec.enc3", 32, 32, 4, 2, 1, rng);
  enc_out_ = nn::Conv2d::create(ps_, "codec.enc_out", 32, 2 * cz, 3, 1, 1, rng);
  dec1_ = nn::Conv2d::create(ps_, "codec.dec1", cz, 32, 3, 1, 1, rng);
  dec2_ = nn::Conv2d::create(ps_, "codec.dec2", 32, 32, 3, 1, 1, rng);
  dec3_ = nn::Conv2d::create(ps_, "codec.dec3", 32, 16, 3, 1, 1, rng);
  dec_out_ = nn::Conv2d::create(ps_, "codec.dec_out", 16, 3, 3, 1, 1, rng);
}

VaeMoments LatentCodec::encode_moments(const Var& x) const {
  if (cfg_.mode != CodecMode::vae)
    throw ConfigError("encode_moments: identity codec has no moments");
  const auto& xs = x->value.shape;
  if (xs.size() != 4 || xs[1] != 3 || xs[2] != cfg_.canvas || xs[3] != cfg_.canvas)
    throw ShapeError("encode_moments: want (N,3,canvas,canvas), got " +
                     x->value.shape_str());
  Var h = nn::silu(nn::conv2d(x, enc1_.w, enc1_.b, enc1_.stride, enc1_.pad));
  h = nn::silu(nn::conv2d(h, enc2_.w, enc2_.b, enc2_.stride, enc2_.pad));
  h = nn::silu(nn::conv2d(h, enc3_.w, enc3_.b, enc3_.stride, enc3_.pad));
  h = nn::conv2d(h, enc_out_.w, enc_out_.b, enc_out_.stride, enc_out_.pad);
  const int n = xs[0], cz = cfg_.cz(), lh = latent_h(), lw = latent_w();
  // Channel-major rows: the first cz channels are the mean block.
  Var flat = nn::reshape(h, {n, 2 * cz * lh * lw});
  VaeMoments m;
  m.mean = nn::reshape(nn::slice_cols(flat, 0, cz * lh * lw), {n, cz, lh, lw});
  m.logvar = nn::reshape(nn::slice_cols(flat, cz * lh * lw, 2 * cz * lh * lw),
                         {n, cz, lh, lw});
  return m;
}

Var LatentCodec::decode_graph(const Var& z) const {
  if (cfg_.mode != CodecMode::vae)
    throw ConfigError("decode_graph: identity codec has no decoder network");
  const auto& zs = z->value.shape;
  if (zs.size() != 4 || zs[1] != cfg_.cz() || zs[2] != latent_h() ||
      zs[3] != latent_w())
    throw ShapeError("decode_graph: want (N,cz,lh,lw), got " + z->value.shape_str());
  Var h = nn::silu(nn::conv2d(z, dec1_.w, dec1_.b, dec1_.stride, dec1_.pad));
  h = nn::upsample_nearest2x(h);
  h = nn::silu(nn::conv2d(h, dec2_.w, dec2_.b, dec2_.stride, dec2_.pad));
  h = nn::upsample_nearest2x(h);
  h = nn::silu(nn::conv2d(h, dec3_.w, dec3_.b, dec3_.stride, dec3_.pad));
  return nn::sigmoid(nn::conv2d(h, dec_out_.w, dec_out_.b, dec_out_.stride,
                                dec_out_.pad));
}

VaeLossParts LatentCodec::training_loss(const Var& x, const Tensor& eps) const {
  VaeMoments m = encode_moments(x);
  if (eps.shape != m.mean->value.shape)
    throw ShapeError("training_loss: eps must match the moment shape");
  Var std = nn::exp_op(nn::scale(m.logvar, 0.5));
  Var z = nn::add(m.mean, nn::mul_const(std, eps));
  Var recon = nn::mse(decode_graph(z), x);
  // KL(q || N(0,1)) per element: -0.5 * (1 + logvar - mean^2 - exp(logvar)).
  Var kl_terms = nn::scale(
      nn::sub(nn::add(nn::add_scalar(m.logvar, 1.0), nn::scale(nn::square(m.mean), -1.0)),
              nn::exp_op(m.logvar)),
      -0.5);
  VaeLossParts parts;
  parts.recon = recon;
  parts.kl = nn::mean_all(kl_terms);
  parts.total = nn::add(parts.recon, nn::scale(parts.kl, kVaeKlWeight));
  return parts;
}

nn::Tensor LatentCodec::encode(const Image& img) const {
  if (img.h != cfg_.canvas || img.w != cfg_.canvas || img.c != 3)
    throw ShapeError("encode: image does not match configured canvas");
  if (cfg_.mode == CodecMode::identity) return image_to_chw(img);
  Tensor x = image_to_chw(img);
  Var xv = nn::constant(x.reshaped({1, 3, cfg_.canvas, cfg_.canvas}));
  VaeMoments m = encode_moments(xv);
  return m.mean->value.reshaped({cfg_.cz(), latent_h(), latent_w()});
}

Image LatentCodec::decode(const Tensor& z) const {
  const std::vector<int> want = {channels(), latent_h(), latent_w()};
  if (z.shape != want) throw ShapeError("decode: latent shape mismatch");
  if (cfg_.mode == CodecMode::identity) return chw_to_image(z);
  Var zv = nn::constant(z.reshaped({1, channels(), latent_h(), latent_w()}));
  Var img = decode_graph(zv);
  return chw_to_image(img->value.reshaped({3, cfg_.canvas, cfg_.canvas}));
}

}  // namespace umt::latent
