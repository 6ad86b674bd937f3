#include "umt/flow/backbone.hpp"

#include "umt/core/error.hpp"
#include "umt/core/rng.hpp"
#include "umt/nn/ops.hpp"

namespace umt::flow {

using nn::Tensor;
using nn::Var;

Config BackboneConfig::to_config() const {
  Config c;
  c.set_int("backbone.patch", patch);
  c.set_int("backbone.width", width);
  c.set_int("backbone.depth", depth);
  c.set_int("backbone.heads", heads);
  c.set_int("backbone.cz", cz);
  c.set_int("backbone.init_seed", static_cast<std::int64_t>(init_seed));
  return c;
}

BackboneConfig BackboneConfig::from_config(const Config& c) {
  BackboneConfig k;
  k.patch = static_cast<int>(c.get_int("backbone.patch", k.patch));
  k.width = static_cast<int>(c.get_int("backbone.width", k.width));
  k.depth = static_cast<int>(c.get_int("backbone.depth", k.depth));
  k.heads = static_cast<int>(c.get_int("backbone.heads", k.heads));
  k.cz = static_cast<int>(c.get_int("backbone.cz", k.cz));
  k.init_seed = static_cast<std::uint64_t>(c.get_int("backbone.init_seed", 1));
  return k;
}

Backbone::Backbone(const BackboneConfig& cfg) : cfg_(cfg) {
  if (cfg_.patch < 1 || cfg_.width < cfg_.heads || cfg_.depth < 1 ||
      cfg_.heads < 1 || cfg_.width % cfg_.heads != 0 || cfg_.cz < 1)
    throw ConfigError("backbone: invalid configuration");
  Rng rng(cfg_.init_seed);
  const int d = cfg_.width;
  const int in_feat = cfg_.patch * cfg_.patch * 3 * cfg_.cz;
  tok_embed_ = nn::Linear::create(ps_, "bb.tok_embed", in_feat, d, rng);
  time1_ = nn::Linear::create(ps_, "bb.time1", d, d, rng);
  time2_ = nn::Linear::create(ps_, "bb.time2", d, d, rng);
  blocks_.reserve(std::size_t(cfg_.depth));
  for (int i = 0; i < cfg_.depth; ++i) {
    const std::string p = "bb.blk" + std::to_string(i);
    Block b;
    b.ada = nn::Linear::create(ps_, p + ".ada", d, 9 * d, rng, true, 0.0);
    b.wq = nn::Linear::create(ps_, p + ".wq", d, d, rng);
    b.wk = nn::Linear::create(ps_, p + ".wk", d, d, rng);
    b.wv = nn::Linear::create(ps_, p + ".wv", d, d, rng);
    b.wo = nn::Linear::create(ps_, p + ".wo", d, d, rng);
    b.cq = nn::Linear::create(ps_, p + ".cq", d, d, rng);
    b.ck = nn::Linear::create(ps_, p + ".ck", d, d, rng);
    b.cv = nn::Linear::create(ps_, p + ".cv", d, d, rng);
    b.co = nn::Linear::create(ps_, p + ".co", d, d, rng);
    b.ff1 = nn::Linear::create(ps_, p + ".ff1", d, 4 * d, rng);
    b.ff2 = nn::Linear::create(ps_, p + ".ff2", 4 * d, d, rng);
    blocks_.push_back(std::move(b));
  }
  ada_final_ = nn::Linear::create(ps_, "bb.ada_final", d, 2 * d, rng, true, 0.0);
  head_ = nn::Linear::create(ps_, "bb.head", d, cfg_.patch * cfg_.patch * cfg_.cz,
                             rng, true, 0.0);
}

Var Backbone::forward(const Var& z_t, const Var& z_m, const Var& z_c,
                      const Var& cond, const Tensor* cond_valid,
                      const std::vector<double>& t_vec) const {
  const auto& zs = z_t->value.shape;
  if (zs.size() != 4 || zs[1] != cfg_.cz)
    throw ShapeError("backbone: z_t must be (N,cz,lh,lw), got " +
                     z_t->value.shape_str());
  if (z_m->value.shape != zs || z_c->value.shape != zs)
    throw ShapeError("backbone: z_t/z_m/z_c shapes differ");
  const int n = zs[0], lh = zs[2], lw = zs[3];
  if (lh % cfg_.patch != 0 || lw % cfg_.patch != 0)
    throw ShapeError("backbone: latent size not divisible by patch");
  if (static_cast<int>(t_vec.size()) != n)
    throw ShapeError("backbone: t_vec length must equal batch");
  if (cond->value.dim(1) != cfg_.width || cond->value.rows() % n != 0)
    throw ShapeError("backbone: cond tokens must be (N*Lc,width)");
  const int lc = cond->value.rows() / n;
  if (cond_valid && static_cast<int>(cond_valid->numel()) != n * lc)
    throw ShapeError("backbone: cond_valid must be (N,Lc)");

  const int d = cfg_.width, p = cfg_.patch;
  const int flat = cfg_.cz * lh * lw;
  const int tokens = (lh / p) * (lw / p);

  // Channel concat in c-major layout == column concat of flattened rows.
  Var x = nn::concat_cols(
      nn::concat_cols(nn::reshape(z_t, {n, flat}), nn::reshape(z_m, {n, flat})),
      nn::reshape(z_c, {n, flat}));
  x = nn::reshape(x, {n, 3 * cfg_.cz, lh, lw});
  x = tok_embed_(nn::patchify(x, p));
  x = nn::add_periodic(x, nn::constant(nn::sinusoidal_positions(tokens, d)),
                       tokens);

  Var tcond = time2_(
      nn::silu(time1_(nn::constant(nn::sinusoidal_timestep(t_vec, d)))));
  Var ada_in = nn::silu(tcond);

  const nn::LayerNorm ln = nn::LayerNorm::plain();
  for (const Block& b : blocks_) {
    Var mod = b.ada(ada_in);  // (N, 9d)
    auto piece = [&](int i) { return nn::slice_cols(mod, i * d, (i + 1) * d); };

    Var h = nn::modulate(ln(x), piece(0), piece(1), tokens);
    Var att = nn::attention(b.wq(h), b.wk(h), b.wv(h), n,
                            tokens, tokens, cfg_.heads, nullptr);
    x = nn::gate_residual(x, b.wo(att), piece(2), tokens);

    h = nn::modulate(ln(x), piece(3), piece(4), tokens);
    Var cross = nn::attention(b.cq(h), b.ck(cond),
                              b.cv(cond), n, tokens, lc, cfg_.heads,
                              cond_valid);
    x = nn::gate_residual(x, b.co(cross), piece(5), tokens);

    h = nn::modulate(ln(x), piece(6), piece(7), tokens);
    h = b.ff2(nn::gelu(b.ff1(h)));
    x = nn::gate_residual(x, h, piece(8), tokens);
  }

  Var fin = ada_final_(ada_in);  // (N, 2d)
  Var h = nn::modulate(ln(x), nn::slice_cols(fin, 0, d), nn::slice_cols(fin, d, 2 * d),
                       tokens);
  return nn::unpatchify(head_(h), p, n, cfg_.cz, lh, lw);
}

Var predict_velocity(const Backbone& bb, const Var& z_t, const Var& z_m,
                     const Var& z_c, const Var& cond, const Tensor* cond_valid,
                     const std::vector<double>& t_vec) {
  return bb.forward(z_t, z_m, z_c, cond, cond_valid, t_vec);
}

}  // namespace umt::flow
