#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/grad_check.hpp"
#include "umt/core/error.hpp"
#include "umt/core/rng.hpp"
#include "umt/flow/noise.hpp"
#include "umt/glyph/corpus.hpp"
#include "umt/latent/bundle.hpp"
#include "umt/latent/codec.hpp"
#include "umt/nn/modules.hpp"
#include "umt/nn/ops.hpp"

using namespace umt;
using namespace umt::latent;
using nn::Tensor;
using nn::Var;

namespace {

glyph::SceneSample scene_for(int canvas, std::uint64_t seed) {
  glyph::CorpusConfig cfg;
  cfg.canvas = canvas;
  cfg.seed = seed;
  return glyph::sample_scene(cfg, 0);
}

template <class V>
double max_abs_diff(const V& a, const V& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("forward_noise: endpoints and linear midpoint") {
  Rng rng(3);
  Tensor z0 = Tensor::randn({3, 4, 4}, rng);
  Tensor eps = Tensor::randn({3, 4, 4}, rng);

  flow::NoisePair p0 = flow::forward_noise(z0, 0.0, eps);
  CHECK(p0.z_t.data == z0.data);
  flow::NoisePair p1 = flow::forward_noise(z0, 1.0, eps);
  CHECK(p1.z_t.data == eps.data);
  for (std::size_t i = 0; i < z0.data.size(); ++i) {
    CHECK(p0.v_star.data[i] == eps.data[i] - z0.data[i]);
    CHECK(p1.v_star.data[i] == p0.v_star.data[i]);
  }

  Tensor zero = Tensor::zeros({2, 2});
  Tensor ones = Tensor::full({2, 2}, 1.0);
  flow::NoisePair mid = flow::forward_noise(zero, 0.5, ones);
  for (double v : mid.z_t.data) CHECK(v == 0.5);
  for (double v : mid.v_star.data) CHECK(v == 1.0);

  CHECK_THROWS_AS(flow::forward_noise(z0, 0.5, zero), ShapeError);
}

TEST_CASE("estimate_x0 inverts forward_noise") {
  Rng rng(11);
  for (double t : {0.0, 0.125, 0.37, 0.5, 0.93, 1.0}) {
    Tensor z0 = Tensor::randn({3, 5, 5}, rng);
    Tensor eps = Tensor::randn({3, 5, 5}, rng);
    flow::NoisePair p = flow::forward_noise(z0, t, eps);
    Tensor back = flow::estimate_x0(p.z_t, p.v_star, t);
    CHECK(max_abs_diff(back.data, z0.data) < 1e-12);
  }
  Tensor zt = Tensor::full({1, 1}, 0.5);
  Tensor v = Tensor::full({1, 1}, 1.0);
  CHECK(flow::estimate_x0(zt, v, 0.5).data[0] == 0.0);
  CHECK(flow::estimate_x0(zt, v, 0.0).data[0] == 0.5);
}

TEST_CASE("estimate_x0 graph form matches values and gradients") {
  Rng rng(5);
  Tensor ztv = Tensor::randn({2, 3}, rng);
  Tensor vv = Tensor::randn({2, 3}, rng);
  const double t = 0.4;
  Var zt = nn::leaf(ztv);
  Var v = nn::leaf(vv);
  Var x0 = flow::estimate_x0(zt, v, t);
  CHECK(max_abs_diff(x0->value.data, flow::estimate_x0(ztv, vv, t).data) == 0.0);

  Tensor w = Tensor::randn({2, 3}, rng);
  test::GradReport rep = test::check_gradients(
      {zt, v}, [&] { return test::weighted_scalar(flow::estimate_x0(zt, v, t), w); });
  CHECK(rep.checked == 12);
  CHECK(rep.max_rel < 1e-6);
}

TEST_CASE("identity codec: encode/decode are bitwise inverses") {
  CodecConfig cfg;
  cfg.canvas = 64;
  LatentCodec codec(cfg);
  CHECK(codec.f() == 1);
  CHECK(codec.channels() == 3);
  CHECK(codec.params().size() == 0);

  glyph::SceneSample s = scene_for(64, 9);
  Tensor z = codec.encode(s.image);
  CHECK(z.shape == std::vector<int>{3, 64, 64});
  // CHW layout: channel plane c holds image channel c.
  CHECK(z.data[0] == s.image.at(0, 0, 0));
  CHECK(z.data[std::size_t(64) * 64] == s.image.at(0, 0, 1));
  CHECK(z.data[1] == s.image.at(0, 1, 0));

  Image back = codec.decode(z);
  CHECK(back.data == s.image.data);

  Image wrong(32, 32, 3);
  CHECK_THROWS_AS(codec.encode(wrong), ShapeError);
  CHECK_THROWS_AS(codec.decode(Tensor::zeros({3, 32, 32})), ShapeError);
  CHECK_THROWS_AS(codec.encode(Image(64, 64, 1)), ShapeError);
}

TEST_CASE("mask_to_latent: threshold rule, ties to one, monotone") {
  Image ones(8, 8, 1, 1.0);
  Tensor m1 = mask_to_latent(ones, 4, 4);
  CHECK(m1.shape == std::vector<int>{4, 2, 2});
  for (double v : m1.data) CHECK(v == 1.0);
  Image zeros(8, 8, 1, 0.0);
  for (double v : mask_to_latent(zeros, 4, 4).data) CHECK(v == 0.0);

  // One 4x4 block: 9 of 16 -> 1, 8 of 16 (tie) -> 1, 7 of 16 -> 0.
  auto block_value = [](int n_ones) {
    Image m(4, 4, 1, 0.0);
    int placed = 0;
    for (int y = 0; y < 4 && placed < n_ones; ++y)
      for (int x = 0; x < 4 && placed < n_ones; ++x) {
        m.at(y, x) = 1.0;
        ++placed;
      }
    return mask_to_latent(m, 4, 1).data[0];
  };
  CHECK(block_value(9) == 1.0);
  CHECK(block_value(8) == 1.0);
  CHECK(block_value(7) == 0.0);

  // Monotone: turning pixels on never turns a latent cell off.
  Rng rng(21);
  Image m(16, 16, 1, 0.0);
  Tensor prev = mask_to_latent(m, 4, 2);
  for (int step = 0; step < 40; ++step) {
    int y = int(rng.below(16)), x = int(rng.below(16));
    m.at(y, x) = 1.0;
    Tensor cur = mask_to_latent(m, 4, 2);
    for (std::size_t i = 0; i < cur.data.size(); ++i)
      CHECK(cur.data[i] >= prev.data[i]);
    prev = cur;
  }

  // f=1 replicates the mask across channels.
  glyph::SceneSample s = scene_for(64, 2);
  Tensor lat = mask_to_latent(s.mask, 1, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        CHECK(lat.data[(std::size_t(c) * 64 + y) * 64 + x] == s.mask.at(y, x));

  CHECK_THROWS_AS(mask_to_latent(Image(10, 10, 1), 4, 1), ShapeError);
  CHECK_THROWS_AS(mask_to_latent(Image(8, 8, 3), 4, 1), ShapeError);
}

TEST_CASE("vae codec: shapes, determinism, moment split") {
  CodecConfig cfg;
  cfg.mode = CodecMode::vae;
  cfg.canvas = 32;
  cfg.init_seed = 7;
  LatentCodec codec(cfg);
  CHECK(codec.f() == 4);
  CHECK(codec.channels() == 4);
  CHECK(codec.latent_h() == 8);
  CHECK(codec.params().size() == 16);  // 8 convs, weight + bias each

  glyph::SceneSample s = scene_for(32, 13);
  Tensor z1 = codec.encode(s.image);
  Tensor z2 = codec.encode(s.image);
  CHECK(z1.shape == std::vector<int>{4, 8, 8});
  CHECK(z1.data == z2.data);

  Image out = codec.decode(z1);
  CHECK(out.h == 32);
  CHECK(out.c == 3);
  for (double v : out.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);  // sigmoid output is strictly inside the unit interval
  }

  // The first cz channels of the conv output are the mean block: perturbing a
  // logvar-channel bias must not move the posterior mean.
  Var x = nn::constant(image_to_chw(s.image).reshaped({1, 3, 32, 32}));
  VaeMoments m = codec.encode_moments(x);
  CHECK(m.mean->value.shape == std::vector<int>{1, 4, 8, 8});
  CHECK(m.logvar->value.shape == std::vector<int>{1, 4, 8, 8});
  Var bias = codec.params().get("codec.enc_out.b");
  bias->value.data[7] += 100.0;  // a logvar channel
  Tensor z3 = codec.encode(s.image);
  CHECK(z3.data == z1.data);
  bias->value.data[2] += 1.0;  // a mean channel
  CHECK(codec.encode(s.image).data != z1.data);
}

TEST_CASE("vae codec: identity mode refuses graph entry points") {
  LatentCodec codec(CodecConfig{});
  Var x = nn::constant(Tensor::zeros({1, 3, 64, 64}));
  CHECK_THROWS_AS(codec.encode_moments(x), ConfigError);
  CHECK_THROWS_AS(codec.decode_graph(x), ConfigError);
  CHECK_THROWS_AS(codec.training_loss(x, Tensor::zeros({1, 3, 16, 16})), ConfigError);
}

TEST_CASE("vae codec: loss parts combine and gradients check out") {
  CodecConfig cfg;
  cfg.mode = CodecMode::vae;
  cfg.canvas = 8;
  cfg.init_seed = 3;
  LatentCodec codec(cfg);
  Rng rng(17);
  Tensor ximg = Tensor::uniform({1, 3, 8, 8}, rng, 0.0, 1.0);
  Tensor eps = Tensor::randn({1, 4, 2, 2}, rng);
  Var x = nn::constant(ximg);

  VaeLossParts parts = codec.training_loss(x, eps);
  const double total = parts.total->value.data[0];
  CHECK(total == doctest::Approx(parts.recon->value.data[0] +
                                 kVaeKlWeight * parts.kl->value.data[0])
                     .epsilon(1e-12));
  CHECK(parts.recon->value.data[0] > 0.0);

  std::vector<Var> leaves = {codec.params().get("codec.enc1.b"),
                             codec.params().get("codec.enc_out.b"),
                             codec.params().get("codec.dec_out.b")};
  test::GradReport rep = test::check_gradients(
      leaves, [&] { return codec.training_loss(x, eps).total; }, 1e-5);
  CHECK(rep.checked == 16 + 8 + 3);
  CHECK(rep.max_rel < 1e-3);
}

TEST_CASE("vae codec: short pretraining reaches the reconstruction bound") {
  CodecConfig cfg;
  cfg.mode = CodecMode::vae;
  cfg.canvas = 32;
  cfg.init_seed = 11;
  LatentCodec codec(cfg);

  glyph::CorpusConfig data;
  data.canvas = 32;
  data.seed = 99;
  const int n_train = 96, n_held = 16, batch = 8;
  std::vector<Tensor> train;
  for (int i = 0; i < n_train; ++i)
    train.push_back(image_to_chw(glyph::sample_scene(data, i).image));

  nn::Adam opt;
  opt.lr = 3e-3;
  Rng rng(5);
  double first_loss = 0.0, last_loss = 0.0;
  const int steps = 800;
  for (int step = 0; step < steps; ++step) {
    Tensor xb({batch, 3, 32, 32});
    for (int b = 0; b < batch; ++b) {
      const Tensor& src = train[rng.below(std::uint64_t(n_train))];
      std::copy(src.data.begin(), src.data.end(),
                xb.data.begin() + std::size_t(b) * src.data.size());
    }
    Tensor eps = Tensor::randn({batch, 4, 8, 8}, rng);
    if (step == steps / 2) opt.lr = 1e-3;
    codec.params().zero_grad();
    VaeLossParts parts = codec.training_loss(nn::constant(xb), eps);
    nn::backward(parts.total);
    opt.step(codec.params());
    if (step == 0) first_loss = parts.total->value.data[0];
    if (step == steps - 1) last_loss = parts.total->value.data[0];
  }
  CHECK(last_loss < 0.5 * first_loss);

  double mae = 0.0;
  for (int i = 0; i < n_held; ++i) {
    glyph::SceneSample s = glyph::sample_scene(data, std::uint64_t(1000 + i));
    Image rec = codec.decode(codec.encode(s.image));
    double e = 0.0;
    for (std::size_t k = 0; k < rec.data.size(); ++k)
      e += std::abs(rec.data[k] - s.image.data[k]);
    mae += e / double(rec.data.size());
  }
  mae /= n_held;
  MESSAGE("held-out VAE roundtrip MAE: ", mae);
  CHECK(mae <= 0.08);
}

TEST_CASE("condition_image: masked equals stored condition, hole hides glyphs") {
  glyph::SceneSample s = scene_for(64, 31);
  Image masked = condition_image(s, ConditionSource::masked);
  CHECK(masked.data == s.condition.data);

  Image hole = condition_image(s, ConditionSource::hole);
  int inside = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c) {
        if (s.mask.at(y, x) == 1.0) {
          CHECK(hole.at(y, x, c) == 0.0);
          ++inside;
        } else {
          CHECK(hole.at(y, x, c) == s.image.at(y, x, c));
        }
      }
  CHECK(inside > 0);
  CHECK(condition_source_from_name("hole") == ConditionSource::hole);
  CHECK(condition_source_from_name(condition_source_name(ConditionSource::masked)) ==
        ConditionSource::masked);
  CHECK_THROWS_AS(condition_source_from_name("nope"), ConfigError);
}

TEST_CASE("build_bundle: identity-mode contracts") {
  CodecConfig cfg;
  LatentCodec codec(cfg);
  glyph::SceneSample s = scene_for(64, 77);
  Rng rng(4);
  Tensor eps = Tensor::randn({3, 64, 64}, rng);

  LatentBundle b0 = build_bundle(s, codec, 0.0, eps);
  CHECK(b0.z_t.data == b0.z0.data);
  CHECK(b0.z0.data == codec.encode(s.image).data);
  CHECK(b0.zc.data == codec.encode(s.condition).data);
  CHECK(b0.zm.data == b0.m_lat.data);
  for (std::size_t i = 0; i < eps.data.size(); ++i)
    CHECK(b0.v_star.data[i] == eps.data[i] - b0.z0.data[i]);

  LatentBundle b1 = build_bundle(s, codec, 1.0, eps);
  CHECK(b1.z_t.data == eps.data);

  // Reproducible given identical arguments.
  LatentBundle c0 = build_bundle(s, codec, 0.0, eps);
  CHECK(c0.z_t.data == b0.z_t.data);
  CHECK(c0.zc.data == b0.zc.data);

  // Hole conditioning swaps the condition latent only.
  BundleOptions opt;
  opt.condition_source = ConditionSource::hole;
  LatentBundle bh = build_bundle(s, codec, 0.0, eps, opt);
  CHECK(bh.z0.data == b0.z0.data);
  CHECK(bh.zc.data == codec.encode(condition_image(s, ConditionSource::hole)).data);
  CHECK(bh.zc.data != b0.zc.data);

  CHECK_THROWS_AS(build_bundle(s, codec, 0.5, Tensor::zeros({3, 32, 32})),
                  ShapeError);
}

TEST_CASE("build_bundle: empty mask gives zero condition and zero loss mask") {
  glyph::DesignPlan plan;  // no lines
  glyph::SceneSample s = glyph::compose_scene(plan, glyph::BackgroundSpec{}, 6);
  LatentCodec codec(CodecConfig{});
  Rng rng(8);
  Tensor eps = Tensor::randn({3, 64, 64}, rng);
  LatentBundle b = build_bundle(s, codec, 0.25, eps);
  for (double v : b.zc.data) CHECK(v == 0.0);
  for (double v : b.m_lat.data) CHECK(v == 0.0);
}

TEST_CASE("build_bundle: vae mode encodes the replicated mask") {
  CodecConfig cfg;
  cfg.mode = CodecMode::vae;
  cfg.canvas = 32;
  cfg.init_seed = 2;
  LatentCodec codec(cfg);
  glyph::SceneSample s = scene_for(32, 15);
  Rng rng(10);
  Tensor eps = Tensor::randn({4, 8, 8}, rng);
  LatentBundle b = build_bundle(s, codec, 0.5, eps);
  CHECK(b.z0.shape == std::vector<int>{4, 8, 8});
  CHECK(b.zm.shape == std::vector<int>{4, 8, 8});
  CHECK(b.m_lat.shape == std::vector<int>{4, 8, 8});
  // Encoded mask is a real latent, not the binary loss mask.
  CHECK(b.zm.data != b.m_lat.data);
  for (double v : b.m_lat.data) CHECK((v == 0.0 || v == 1.0));

  Image mask3(32, 32, 3);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) mask3.at(y, x, c) = s.mask.at(y, x);
  CHECK(b.zm.data == codec.encode(mask3).data);
}
