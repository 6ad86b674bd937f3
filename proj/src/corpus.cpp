#include "umt/glyph/corpus.hpp"

#include <filesystem>
#include <json.hpp>

#include "umt/core/error.hpp"
#include "umt/core/hash.hpp"
#include "umt/core/rng.hpp"
#include "umt/design/planner.hpp"

namespace umt::glyph {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

Config CorpusConfig::to_config() const {
  Config c;
  c.set_int("corpus.canvas", canvas);
  c.set_int("corpus.seed", static_cast<std::int64_t>(seed));
  c.set_int("corpus.mix.full_spec", pattern_mix[0]);
  c.set_int("corpus.mix.auto_layout", pattern_mix[1]);
  c.set_int("corpus.mix.auto_text", pattern_mix[2]);
  c.set_int("corpus.mix.auto_all", pattern_mix[3]);
  c.set_num("corpus.two_line_prob", two_line_prob);
  return c;
}

CorpusConfig CorpusConfig::from_config(const Config& c) {
  CorpusConfig k;
  k.canvas = static_cast<int>(c.get_int("corpus.canvas", k.canvas));
  k.seed = static_cast<std::uint64_t>(c.get_int("corpus.seed", 0));
  k.pattern_mix[0] = static_cast<int>(c.get_int("corpus.mix.full_spec", 25));
  k.pattern_mix[1] = static_cast<int>(c.get_int("corpus.mix.auto_layout", 25));
  k.pattern_mix[2] = static_cast<int>(c.get_int("corpus.mix.auto_text", 25));
  k.pattern_mix[3] = static_cast<int>(c.get_int("corpus.mix.auto_all", 25));
  k.two_line_prob = c.get_num("corpus.two_line_prob", k.two_line_prob);
  return k;
}

namespace {

const std::vector<std::string>& word_pool() {
  // every word spells inside the committed alphabet
  static const std::vector<std::string> kWords = {
      "SALE", "OPEN", "STOP", "MENU", "HOT",  "SUN",  "ICE",  "TEA",
      "NOTE", "HOME", "AUTO", "DEMO", "EAST", "LOTS", "MINT", "PLUS",
      "NEON", "MOON", "CLUB", "TOOL", "CODE", "DATA", "LIME", "CHAT"};
  return kWords;
}

Pattern draw_pattern(Rng& rng, const std::array<int, 4>& mix) {
  int total = 0;
  for (int m : mix) total += m;
  if (total <= 0) throw CorpusError("pattern mix sums to zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    acc += mix[std::size_t(i)];
    if (u < acc) return static_cast<Pattern>(i);
  }
  return Pattern::auto_all;
}

std::string draw_word(Rng& rng) {
  return word_pool()[std::size_t(rng.below(word_pool().size()))];
}

std::string draw_text(Rng& rng) {
  std::string t = draw_word(rng);
  if (rng.uniform() < 0.3) t += static_cast<char>('0' + int(rng.below(4)));
  if (static_cast<int>(t.size()) > kMaxSceneTextChars) t.resize(kMaxSceneTextChars);
  return t;
}

design::Verb draw_verb(Rng& rng) {
  return static_cast<design::Verb>(rng.below(3));
}

}  // namespace

SceneSample sample_scene(const CorpusConfig& cfg, std::uint64_t index) {
  const std::uint64_t sample_seed = derive_seed(cfg.seed, index);
  Rng rng(sample_seed);
  const int W = cfg.canvas, H = cfg.canvas;

  const Pattern pattern = draw_pattern(rng, cfg.pattern_mix);
  const int n_lines = rng.uniform() < cfg.two_line_prob ? 2 : 1;
  const bool has_text =
      pattern == Pattern::full_spec || pattern == Pattern::auto_layout;
  const bool has_box = pattern == Pattern::full_spec || pattern == Pattern::auto_text;
  const std::string theme = draw_word(rng);

  design::Instruction instr;
  std::vector<int> buckets(static_cast<std::size_t>(n_lines), 0);
  for (auto& b : buckets) b = int(rng.below(kNumSizeBuckets));

  // Boxes stack strictly top-to-bottom, so instruction order is y order and
  // the planner's post-sort keeps lines aligned with their requests.
  std::vector<std::array<int, 4>> boxes;
  if (has_box) {
    std::vector<std::string> planned_text(static_cast<std::size_t>(n_lines), std::string());
    for (int i = 0; i < n_lines; ++i)
      planned_text[std::size_t(i)] =
          has_text ? "" : design::auto_text(theme, i);  // filled later if given
    // heights first, then vertical placement with room guaranteed
    std::vector<int> hs(static_cast<std::size_t>(n_lines), 0);
    std::vector<int> gaps;
    int total = 0;
    for (int i = 0; i < n_lines; ++i) {
      hs[std::size_t(i)] =
          std::max(kMinCellH, design::bucket_height(buckets[std::size_t(i)], H));
      total += hs[std::size_t(i)];
    }
    for (int i = 0; i + 1 < n_lines; ++i) {
      gaps.push_back(2 + int(rng.below(5)));
      total += gaps.back();
    }
    const int max_y0 = H - 1 - total;
    int y = 1 + int(rng.below(std::uint64_t(std::max(1, max_y0))));
    for (int i = 0; i < n_lines; ++i) {
      const std::string text_for_width =
          has_text ? std::string() : planned_text[std::size_t(i)];
      // width sized after the final text; for FULL_SPEC the text is drawn now
      std::string t = text_for_width.empty() ? draw_text(rng) : text_for_width;
      planned_text[std::size_t(i)] = t;
      const int h = hs[std::size_t(i)];
      const int cell_w = std::max(kMinCellW, (h * 3) / 4);
      const int w = std::min(static_cast<int>(t.size()) * cell_w, W - 2);
      const int x = 1 + int(rng.below(std::uint64_t(W - 1 - w)));
      boxes.push_back({x, y, w, h});
      y += h + (i + 1 < n_lines ? gaps[std::size_t(i)] : 0);
    }
    for (int i = 0; i < n_lines; ++i) {
      design::LineRequest req;
      req.verb = draw_verb(rng);
      if (has_text) req.text = planned_text[std::size_t(i)];
      req.bbox = boxes[std::size_t(i)];
      if (rng.uniform() < 0.5) req.font_id = int(rng.below(kNumFonts));
      if (rng.uniform() < 0.5) req.color_id = int(rng.below(kPaletteSize));
      req.size_bucket = buckets[std::size_t(i)];  // keeps label and box height consistent
      if (!has_text && i == 0) req.theme = theme;
      instr.lines.push_back(req);
    }
  } else {
    for (int i = 0; i < n_lines; ++i) {
      design::LineRequest req;
      req.verb = draw_verb(rng);
      if (has_text) req.text = draw_text(rng);
      if (rng.uniform() < 0.5) req.font_id = int(rng.below(kNumFonts));
      if (rng.uniform() < 0.5) req.color_id = int(rng.below(kPaletteSize));
      if (rng.uniform() < 0.5) req.size_bucket = buckets[std::size_t(i)];
      if (!has_text && i == 0) req.theme = theme;
      instr.lines.push_back(req);
    }
  }

  const std::string raw = design::unparse(instr);
  const design::Instruction parsed = design::parse_instruction(raw);
  if (parsed.pattern != pattern)
    throw CorpusError("sampled instruction does not infer its own pattern");
  const glyph::DesignPlan plan = design::plan_layout(parsed, {H, W, {}});

  BackgroundSpec bg;
  bg.kind = static_cast<BgKind>(rng.below(3));
  SceneSample s = compose_scene(plan, bg, derive_seed(sample_seed, 1000));
  s.instruction = raw;
  s.pattern = pattern;
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(index));
  s.sample_id = buf;
  return s;
}

namespace {

ordered_json record_json(const SceneSample& s, const std::string& img,
                         const std::string& erased, const std::string& mask) {
  ordered_json lines = ordered_json::array();
  for (const auto& l : s.lines) {
    lines.push_back(ordered_json{{"bbox", {l.x, l.y, l.w, l.h}},
                                 {"text", l.text},
                                 {"font_id", l.font_id},
                                 {"color_id", l.color_id},
                                 {"size_bucket", l.size_bucket}});
  }
  return ordered_json{{"id", s.sample_id},     {"image", img},
                      {"erased_image", erased}, {"mask", mask},
                      {"pattern", pattern_name(s.pattern)},
                      {"instruction", s.instruction},
                      {"lines", lines}};
}

}  // namespace

CorpusManifest write_corpus(int n, const CorpusConfig& cfg, const std::string& out_dir) {
  if (n < 0) throw CorpusError("negative sample count");
  std::vector<std::string> written;
  try {
    fs::create_directories(fs::path(out_dir) / "images");
    CorpusManifest m;
    m.n = n;
    m.seed = cfg.seed;
    m.config_hash = hex64(cfg.hash());

    std::string ann;
    for (int i = 0; i < n; ++i) {
      const SceneSample s = sample_scene(cfg, std::uint64_t(i));
      const std::string img = "images/" + s.sample_id + ".ppm";
      const std::string ers = "images/" + s.sample_id + "_erased.ppm";
      const std::string msk = "images/" + s.sample_id + "_mask.pgm";
      write_raster(out_dir + "/" + img, s.image);
      written.push_back(out_dir + "/" + img);
      write_raster(out_dir + "/" + ers, s.erased);
      written.push_back(out_dir + "/" + ers);
      write_raster(out_dir + "/" + msk, s.mask);
      written.push_back(out_dir + "/" + msk);
      ann += record_json(s, img, ers, msk).dump();
      ann += '\n';
      ++m.pattern_counts[std::size_t(static_cast<int>(s.pattern))];
    }
    write_text_atomic(out_dir + "/" + m.annotations, ann);
    written.push_back(out_dir + "/" + m.annotations);

    ordered_json mj{{"n", m.n},
                    {"seed", m.seed},
                    {"config_hash", m.config_hash},
                    {"counts",
                     {{"FULL_SPEC", m.pattern_counts[0]},
                      {"AUTO_LAYOUT", m.pattern_counts[1]},
                      {"AUTO_TEXT", m.pattern_counts[2]},
                      {"AUTO_ALL", m.pattern_counts[3]}}},
                    {"annotations", m.annotations}};
    write_text_atomic(out_dir + "/manifest.json", mj.dump(2) + "\n");
    return m;
  } catch (const CorpusWriteError&) {
    throw;
  } catch (const std::exception& e) {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    throw CorpusWriteError(std::string("corpus generation failed: ") + e.what());
  }
}

Corpus read_corpus(const std::string& dir) {
  Corpus c;
  c.dir = dir;
  ordered_json mj;
  try {
    mj = ordered_json::parse(read_text(dir + "/manifest.json"));
  } catch (const std::exception& e) {
    throw CorpusError(std::string("manifest unreadable: ") + e.what());
  }
  c.manifest.n = mj.at("n").get<int>();
  c.manifest.seed = mj.at("seed").get<std::uint64_t>();
  c.manifest.config_hash = mj.at("config_hash").get<std::string>();
  c.manifest.annotations = mj.at("annotations").get<std::string>();
  const auto& counts = mj.at("counts");
  c.manifest.pattern_counts = {counts.at("FULL_SPEC").get<int>(),
                               counts.at("AUTO_LAYOUT").get<int>(),
                               counts.at("AUTO_TEXT").get<int>(),
                               counts.at("AUTO_ALL").get<int>()};

  const std::string ann = read_text(dir + "/" + c.manifest.annotations);
  std::size_t pos = 0;
  while (pos < ann.size()) {
    std::size_t nl = ann.find('\n', pos);
    if (nl == std::string::npos) nl = ann.size();
    const std::string line = ann.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    ordered_json r;
    try {
      r = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw CorpusError(std::string("bad annotation line: ") + e.what());
    }
    CorpusRecord rec;
    rec.id = r.at("id").get<std::string>();
    rec.image = r.at("image").get<std::string>();
    rec.erased_image = r.at("erased_image").get<std::string>();
    rec.mask = r.at("mask").get<std::string>();
    rec.pattern = pattern_from_name(r.at("pattern").get<std::string>());
    rec.instruction = r.at("instruction").get<std::string>();
    for (const auto& lj : r.at("lines")) {
      TextLine l;
      const auto& b = lj.at("bbox");
      l.x = b.at(0).get<int>();
      l.y = b.at(1).get<int>();
      l.w = b.at(2).get<int>();
      l.h = b.at(3).get<int>();
      l.text = lj.at("text").get<std::string>();
      l.font_id = lj.at("font_id").get<int>();
      l.color_id = lj.at("color_id").get<int>();
      l.size_bucket = lj.at("size_bucket").get<int>();
      rec.lines.push_back(l);
    }
    c.records.push_back(std::move(rec));
  }
  if (static_cast<int>(c.records.size()) != c.manifest.n)
    throw CorpusError("annotation count does not match manifest");
  return c;
}

Image corpus_image(const Corpus& c, std::size_t idx) {
  return read_raster(c.dir + "/" + c.records.at(idx).image);
}
Image corpus_erased(const Corpus& c, std::size_t idx) {
  return read_raster(c.dir + "/" + c.records.at(idx).erased_image);
}
Image corpus_mask(const Corpus& c, std::size_t idx) {
  return read_raster(c.dir + "/" + c.records.at(idx).mask);
}

}  // namespace umt::glyph
