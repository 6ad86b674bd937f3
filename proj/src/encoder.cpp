#include "umt/enc/encoder.hpp"

#include <json.hpp>

#include "umt/core/error.hpp"
#include "umt/glyph/atlas.hpp"
#include "umt/glyph/render.hpp"
#include "umt/latent/codec.hpp"
#include "umt/nn/ops.hpp"

namespace umt::enc {

using nn::Tensor;
using nn::Var;

Config EncoderConfig::to_config() const {
  Config c;
  c.set_int("enc.dt", d_t);
  c.set_int("enc.dc", d_c);
  c.set_int("enc.dv", d_v);
  c.set_int("enc.d", d);
  c.set_int("enc.max_context", max_context);
  c.set_int("enc.init_seed", static_cast<long long>(init_seed));
  return c;
}

EncoderConfig EncoderConfig::from_config(const Config& c) {
  EncoderConfig e;
  e.d_t = static_cast<int>(c.get_int("enc.dt", e.d_t));
  e.d_c = static_cast<int>(c.get_int("enc.dc", e.d_c));
  e.d_v = static_cast<int>(c.get_int("enc.dv", e.d_v));
  e.d = static_cast<int>(c.get_int("enc.d", e.d));
  e.max_context = static_cast<int>(c.get_int("enc.max_context", e.max_context));
  e.init_seed = static_cast<std::uint64_t>(c.get_int("enc.init_seed", 1));
  return e;
}

UMEncoder::UMEncoder(const EncoderConfig& cfg) : cfg_(cfg) {
  if (cfg.d_t < 1 || cfg.d_c < 1 || cfg.d_v < 1 || cfg.d < 1)
    throw ConfigError("encoder: stream widths must be positive");
  if (cfg.d_t % kInstrHeads != 0)
    throw ConfigError("encoder: d_t must be divisible by attention heads");
  if (cfg.d_v % 2 != 0)
    throw ConfigError("encoder: d_v must be even for positional encodings");
  if (cfg.max_context < 1) throw ConfigError("encoder: max_context must be positive");

  Rng rng(cfg.init_seed);
  instr_embed_ = nn::Embedding::create(ps_, "enc.instr.embed", design::vocab_size(), cfg.d_t, rng);
  instr_blocks_.resize(2);
  for (int i = 0; i < 2; ++i) {
    Block& b = instr_blocks_[i];
    const std::string p = "enc.instr.blk" + std::to_string(i) + ".";
    b.ln1 = nn::LayerNorm::create(ps_, p + "ln1", cfg.d_t);
    b.ln2 = nn::LayerNorm::create(ps_, p + "ln2", cfg.d_t);
    b.wq = nn::Linear::create(ps_, p + "wq", cfg.d_t, cfg.d_t, rng);
    b.wk = nn::Linear::create(ps_, p + "wk", cfg.d_t, cfg.d_t, rng);
    b.wv = nn::Linear::create(ps_, p + "wv", cfg.d_t, cfg.d_t, rng);
    b.wo = nn::Linear::create(ps_, p + "wo", cfg.d_t, cfg.d_t, rng);
    b.ff1 = nn::Linear::create(ps_, p + "ff1", cfg.d_t, 4 * cfg.d_t, rng);
    b.ff2 = nn::Linear::create(ps_, p + "ff2", 4 * cfg.d_t, cfg.d_t, rng);
  }

  font_embed_ = nn::Embedding::create(ps_, "enc.ctx.font", glyph::kNumFonts, cfg.d_c, rng);
  color_embed_ = nn::Embedding::create(ps_, "enc.ctx.color", glyph::kPaletteSize, cfg.d_c, rng);
  size_embed_ = nn::Embedding::create(ps_, "enc.ctx.size", glyph::kNumSizeBuckets, cfg.d_c, rng);
  bbox_proj_ = nn::Linear::create(ps_, "enc.ctx.bbox", 4 * 2 * 8, cfg.d_c, rng);
  ref_conv_ = nn::Conv2d::create(ps_, "enc.ctx.ref_conv", 3, 16, 3, 1, 1, rng);
  ref_fc_ = nn::Linear::create(ps_, "enc.ctx.ref_fc", 16, cfg.d_c, rng);

  conn_instr_ = nn::Linear::create(ps_, "enc.fuse.instr", cfg.d_t, cfg.d, rng);
  conn_ctx_ = nn::Linear::create(ps_, "enc.fuse.ctx", cfg.d_c, cfg.d, rng);
  conn_char_ = nn::Linear::create(ps_, "enc.fuse.char", cfg.d_v, cfg.d, rng);
  segment_embed_ = nn::Embedding::create(ps_, "enc.fuse.segment", 3, cfg.d, rng);
}

Var UMEncoder::empty_stream(int width) { return nn::constant(Tensor({0, width})); }

Var UMEncoder::encode_instruction_tokens(const std::vector<int>& ids) const {
  const int n = static_cast<int>(ids.size());
  if (n == 0) return empty_stream(cfg_.d_t);
  if (n > kInstrMaxTokens)
    throw ContextOverflowError("instruction stream longer than " +
                               std::to_string(kInstrMaxTokens) + " tokens");
  const int vocab = design::vocab_size();
  for (int id : ids)
    if (id < 0 || id >= vocab)
      throw VocabError("instruction token id " + std::to_string(id) +
                       " outside vocabulary of " + std::to_string(vocab));
  Var x = instr_embed_(ids);
  x = nn::add(x, nn::constant(nn::sinusoidal_positions(n, cfg_.d_t)));
  for (const Block& b : instr_blocks_) {
    Var h = b.ln1(x);
    Var attn = nn::attention(b.wq(h), b.wk(h), b.wv(h), 1, n, n, kInstrHeads, nullptr);
    x = nn::add(x, b.wo(attn));
    h = b.ln2(x);
    x = nn::add(x, b.ff2(nn::gelu(b.ff1(h))));
  }
  return x;
}

Var UMEncoder::encode_context(const glyph::DesignPlan& plan, const Image& reference) const {
  std::vector<Var> toks;
  toks.reserve(plan.lines.size() + 1);
  const double cw = plan.canvas_w, ch = plan.canvas_h;
  for (const glyph::TextLine& l : plan.lines) {
    Var t = font_embed_({l.font_id});
    t = nn::add(t, color_embed_({l.color_id}));
    t = nn::add(t, size_embed_({l.size_bucket}));
    Tensor ff = nn::fourier_features({l.x / cw, l.y / ch, l.w / cw, l.h / ch}, 8);
    t = nn::add(t, bbox_proj_(nn::constant(ff.reshaped({1, 4 * 2 * 8}))));
    toks.push_back(t);
  }
  Tensor chw = latent::image_to_chw(reference);
  Var ref = nn::constant(chw.reshaped({1, reference.c, reference.h, reference.w}));
  ref = nn::avg_pool2d(ref, 4);
  ref = nn::relu(ref_conv_(ref));
  toks.push_back(ref_fc_(nn::global_avg_pool(ref)));

  std::vector<std::pair<int, int>> picks;
  picks.reserve(toks.size());
  for (int i = 0; i < static_cast<int>(toks.size()); ++i) picks.emplace_back(i, 0);
  return nn::assemble_rows(toks, picks, cfg_.d_c);
}

Var UMEncoder::encode_chars(const glyph::DesignPlan& plan, const CharEncoder& ce) const {
  if (ce.config().d_v != cfg_.d_v)
    throw ConfigError("encoder: CharEncoder width disagrees with d_v");
  int n_char = 0;
  for (const glyph::TextLine& l : plan.lines) n_char += static_cast<int>(l.text.size());
  if (n_char == 0) return empty_stream(cfg_.d_v);

  const int px = glyph::kEncoderGlyphPx;
  Tensor crops({n_char, 1, px, px});
  const Tensor pe = nn::sinusoidal_positions(kLinePeSlots + kCharPeSlots, cfg_.d_v);
  Tensor pos({n_char, cfg_.d_v});
  int row = 0;
  for (int li = 0; li < static_cast<int>(plan.lines.size()); ++li) {
    const glyph::TextLine& l = plan.lines[li];
    if (li >= kLinePeSlots) throw LayoutError("too many lines for char positional table");
    for (int ci = 0; ci < static_cast<int>(l.text.size()); ++ci) {
      if (ci >= kCharPeSlots) throw LayoutError("line too long for char positional table");
      const int id = glyph::char_to_id(l.text[ci]);  // AlphabetError propagates
      glyph::GlyphImage g = glyph::render_glyph(id, l.font_id, px);
      std::copy(g.pixels.data.begin(), g.pixels.data.end(),
                crops.data.begin() + static_cast<std::size_t>(row) * px * px);
      for (int j = 0; j < cfg_.d_v; ++j)
        pos.data[static_cast<std::size_t>(row) * cfg_.d_v + j] =
            pe.data[static_cast<std::size_t>(li) * cfg_.d_v + j] +
            pe.data[static_cast<std::size_t>(kLinePeSlots + ci) * cfg_.d_v + j];
      ++row;
    }
  }
  return nn::add(ce.features(nn::constant(crops)), nn::constant(pos));
}

UMEmbedding UMEncoder::fuse(const Var& instr, const Var& ctx, const Var& chars,
                            int pad_to) const {
  const auto check = [](const Var& v, int width, const char* name) {
    if (v->value.ndim() != 2 || v->value.cols() != width)
      throw ShapeError(std::string("fuse: ") + name + " stream width mismatch, got " +
                       v->value.shape_str());
  };
  check(instr, cfg_.d_t, "instruction");
  check(ctx, cfg_.d_c, "context");
  check(chars, cfg_.d_v, "char");

  UMEmbedding em;
  em.n_instr = instr->value.rows();
  em.n_ctx = ctx->value.rows();
  em.n_char = chars->value.rows();
  const int l_valid = em.valid_len();
  const int l = pad_to < 0 ? l_valid : pad_to;
  if (l_valid > cfg_.max_context || l > cfg_.max_context)
    throw ContextOverflowError("fused context of " + std::to_string(std::max(l, l_valid)) +
                               " tokens exceeds " + std::to_string(cfg_.max_context));
  if (l < l_valid) throw ShapeError("fuse: pad_to below the valid length");

  const auto seg_row = [&](int s) {
    return nn::reshape(nn::slice_rows(segment_embed_.table, s, s + 1), {cfg_.d});
  };
  std::vector<Var> srcs;
  std::vector<std::pair<int, int>> picks;
  picks.reserve(l);
  const auto add_stream = [&](const Var& raw, const nn::Linear& conn, int seg) {
    const int rows = raw->value.rows();
    if (rows == 0) return;
    Var proj = nn::add_rowvec(conn(raw), seg_row(seg));
    const int si = static_cast<int>(srcs.size());
    srcs.push_back(proj);
    for (int r = 0; r < rows; ++r) picks.emplace_back(si, r);
  };
  add_stream(instr, conn_instr_, 0);
  add_stream(ctx, conn_ctx_, 1);
  add_stream(chars, conn_char_, 2);
  for (int r = l_valid; r < l; ++r) picks.emplace_back(-1, -1);

  em.tokens = nn::assemble_rows(srcs, picks, cfg_.d);
  em.segment_ids.assign(static_cast<std::size_t>(l), 0);
  int at = em.n_instr;
  std::fill(em.segment_ids.begin() + at, em.segment_ids.begin() + at + em.n_ctx, 1);
  at += em.n_ctx;
  std::fill(em.segment_ids.begin() + at, em.segment_ids.begin() + at + em.n_char, 2);
  em.valid = Tensor({1, l});
  std::fill(em.valid.data.begin(), em.valid.data.begin() + l_valid, 1.0);
  return em;
}

std::pair<Var, Tensor> batch_cond(const std::vector<UMEmbedding>& ems) {
  if (ems.empty()) throw ShapeError("batch_cond: empty batch");
  const int l = ems[0].length();
  const int d = ems[0].tokens->value.cols();
  std::vector<Var> srcs;
  std::vector<std::pair<int, int>> picks;
  srcs.reserve(ems.size());
  picks.reserve(static_cast<std::size_t>(l) * ems.size());
  Tensor valid({static_cast<int>(ems.size()), l});
  for (int s = 0; s < static_cast<int>(ems.size()); ++s) {
    const UMEmbedding& em = ems[s];
    if (em.length() != l || em.tokens->value.cols() != d)
      throw ShapeError("batch_cond: embeddings must share one padded length");
    srcs.push_back(em.tokens);
    for (int r = 0; r < l; ++r) picks.emplace_back(s, r);
    std::copy(em.valid.data.begin(), em.valid.data.end(),
              valid.data.begin() + static_cast<std::size_t>(s) * l);
  }
  return {nn::assemble_rows(srcs, picks, d), std::move(valid)};
}

std::string UMEmbedding::to_json() const {
  nlohmann::ordered_json j;
  j["d"] = tokens->value.cols();
  j["layout"] = {{"n_instr", n_instr}, {"n_ctx", n_ctx}, {"n_char", n_char}};
  j["segment_ids"] = segment_ids;
  j["valid"] = valid.data;
  j["tokens"] = std::vector<double>(tokens->value.data.begin(), tokens->value.data.end());
  return j.dump(2);
}

UMEmbedding UMEmbedding::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  UMEmbedding em;
  const int d = j.at("d").get<int>();
  em.n_instr = j.at("layout").at("n_instr").get<int>();
  em.n_ctx = j.at("layout").at("n_ctx").get<int>();
  em.n_char = j.at("layout").at("n_char").get<int>();
  em.segment_ids = j.at("segment_ids").get<std::vector<int>>();
  const auto vals = j.at("valid").get<std::vector<double>>();
  const auto toks = j.at("tokens").get<std::vector<double>>();
  const int l = static_cast<int>(em.segment_ids.size());
  if (static_cast<int>(vals.size()) != l || static_cast<int>(toks.size()) != l * d)
    throw ShapeError("UMEmbedding: serialized sizes disagree with layout");
  em.valid = Tensor({1, l});
  std::copy(vals.begin(), vals.end(), em.valid.data.begin());
  Tensor t({l, d});
  std::copy(toks.begin(), toks.end(), t.data.begin());
  em.tokens = nn::constant(t);
  return em;
}

}  // namespace umt::enc
