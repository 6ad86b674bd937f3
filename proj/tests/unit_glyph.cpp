#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "umt/core/error.hpp"
#include "umt/core/hash.hpp"
#include "umt/design/parser.hpp"
#include "umt/design/records.hpp"
#include "umt/glyph/atlas.hpp"
#include "umt/glyph/corpus.hpp"
#include "umt/glyph/render.hpp"
#include "umt/glyph/scene.hpp"

namespace fs = std::filesystem;
using namespace umt;
using namespace umt::glyph;

namespace {

double ink_fraction(const Image& img) {
  double s = 0.0;
  for (double v : img.data) s += (v > 0.5) ? 1.0 : 0.0;
  return s / double(img.data.size());
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("alphabet is the committed 20-character set plus space") {
  CHECK(alphabet() == "ABCDEHILMNOPRSTU0123");
  CHECK(int(alphabet().size()) == kNumInkChars);
  for (int id = 0; id < kNumInkChars; ++id) {
    CHECK(char_to_id(id_to_char(id)) == id);
  }
  CHECK(char_to_id(' ') == kSpaceId);
  CHECK(id_to_char(kSpaceId) == ' ');
  CHECK_THROWS_AS(char_to_id('z'), AlphabetError);
  CHECK_THROWS_AS(char_to_id('Q'), AlphabetError);
  CHECK_THROWS_AS(id_to_char(kNumCharClasses), AlphabetError);
  CHECK(text_in_alphabet("SALE 01"));
  CHECK_FALSE(text_in_alphabet("SALE!"));
}

TEST_CASE("atlas bitmaps: space blank, ink chars non-empty and distinct") {
  for (int y = 0; y < kAtlasH; ++y)
    for (int x = 0; x < kAtlasW; ++x) CHECK_FALSE(atlas_bit(kSpaceId, y, x));
  CHECK_FALSE(atlas_bit(0, -1, 0));
  CHECK_FALSE(atlas_bit(0, kAtlasH, 0));
  CHECK_FALSE(atlas_bit(0, 0, kAtlasW));

  std::set<std::string> signatures;
  for (int id = 0; id < kNumInkChars; ++id) {
    std::string sig;
    int ink = 0;
    for (int y = 0; y < kAtlasH; ++y)
      for (int x = 0; x < kAtlasW; ++x) {
        bool b = atlas_bit(id, y, x);
        sig.push_back(b ? '1' : '0');
        ink += b;
      }
    CHECK(ink > 0);
    CHECK(ink < kAtlasH * kAtlasW);
    signatures.insert(sig);
  }
  CHECK(signatures.size() == std::size_t(kNumInkChars));
}

TEST_CASE("render_glyph: space blank, determinism, ink fraction bound") {
  GlyphImage sp = render_glyph(kSpaceId, 0, kEncoderGlyphPx);
  CHECK(sp.pixels.h == 80);
  CHECK(sp.pixels.w == 80);
  CHECK(sp.pixels.c == 1);
  CHECK(ink_fraction(sp.pixels) == 0.0);

  GlyphImage a1 = render_glyph(char_to_id('A'), 0, kEncoderGlyphPx);
  GlyphImage a2 = render_glyph(char_to_id('A'), 0, kEncoderGlyphPx);
  CHECK(a1.pixels.data == a2.pixels.data);

  // Measured once from the committed atlas and frozen: regular 'A' at 80px.
  double fa = ink_fraction(a1.pixels);
  CHECK(fa > 0.03);
  CHECK(fa < 0.5);

  for (int id = 0; id < kNumInkChars; ++id) {
    for (int font = 0; font < kNumFonts; ++font) {
      double f = ink_fraction(render_glyph(id, font, kEncoderGlyphPx).pixels);
      CHECK(f > 0.0);
      CHECK(f < 0.6);
      for (double v : render_glyph(id, font, kEncoderGlyphPx).pixels.data) {
        CHECK((v == 0.0 || v == 1.0));
      }
    }
  }
}

TEST_CASE("render_glyph: bold dilates, borders stay blank, renders distinct") {
  int a = char_to_id('A');
  GlyphImage reg = render_glyph(a, 0, 80);
  GlyphImage bold = render_glyph(a, 1, 80);
  // Bold is a superset with strictly more ink.
  for (std::size_t i = 0; i < reg.pixels.data.size(); ++i) {
    if (reg.pixels.data[i] > 0.5) CHECK(bold.pixels.data[i] > 0.5);
  }
  CHECK(ink_fraction(bold.pixels) > ink_fraction(reg.pixels));

  // 1-cell grid border means edge rows/cols never carry ink (regular font).
  for (int x = 0; x < 80; ++x) {
    CHECK(reg.pixels.at(0, x) == 0.0);
    CHECK(reg.pixels.at(79, x) == 0.0);
  }
  for (int y = 0; y < 80; ++y) {
    CHECK(reg.pixels.at(y, 0) == 0.0);
    CHECK(reg.pixels.at(y, 79) == 0.0);
  }

  std::set<std::string> seen;
  for (int id = 0; id < kNumInkChars; ++id) {
    GlyphImage g = render_glyph(id, 0, 80);
    std::string sig;
    for (double v : g.pixels.data) sig.push_back(v > 0.5 ? '1' : '0');
    seen.insert(sig);
  }
  CHECK(seen.size() == std::size_t(kNumInkChars));
}

TEST_CASE("render_glyph: argument validation") {
  CHECK_THROWS_AS(render_glyph(0, 2, 80), AlphabetError);
  CHECK_THROWS_AS(render_glyph(-1, 0, 80), AlphabetError);
  CHECK_THROWS_AS(render_glyph(kNumCharClasses, 0, 80), AlphabetError);
  CHECK_THROWS_AS(render_glyph(0, 0, 7), AlphabetError);
  Image r = render_glyph_rect(char_to_id('B'), 0, 14, 5);
  CHECK(r.h == 14);
  CHECK(r.w == 5);
  CHECK_THROWS_AS(render_glyph_rect(0, 0, 14, 3), AlphabetError);
}

TEST_CASE("cell_left partitions a row exactly") {
  for (int w : {20, 33, 48}) {
    for (int n : {1, 2, 5, 8}) {
      CHECK(cell_left(w, n, 0) == 0);
      CHECK(cell_left(w, n, n) == w);
      for (int i = 0; i < n; ++i) CHECK(cell_left(w, n, i) < cell_left(w, n, i + 1));
    }
  }
}

TEST_CASE("compose_scene: empty plan gives zero mask and zero condition") {
  DesignPlan plan;
  SceneSample s = compose_scene(plan, BackgroundSpec{BgKind::gradient}, 11);
  CHECK(s.image.h == 64);
  CHECK(s.mask.c == 1);
  for (double v : s.mask.data) CHECK(v == 0.0);
  for (double v : s.condition.data) CHECK(v == 0.0);
  CHECK(s.image.data == s.erased.data);
}

TEST_CASE("compose_scene: mask is dilated box union, condition is masked image") {
  DesignPlan plan;
  plan.lines.push_back({8, 8, 32, 16, "AB", 0, 2, 1});
  SceneSample s = compose_scene(plan, BackgroundSpec{BgKind::solid}, 3);

  for (double v : s.mask.data) CHECK((v == 0.0 || v == 1.0));
  // Inside the box.
  CHECK(s.mask.at(10, 10) == 1.0);
  // Inside the 2 px dilation ring.
  CHECK(s.mask.at(6, 8) == 1.0);
  CHECK(s.mask.at(23, 41) == 1.0);
  // Outside the dilated box.
  CHECK(s.mask.at(5, 8) == 0.0);
  CHECK(s.mask.at(40, 40) == 0.0);
  CHECK(s.mask.at(8, 5) == 0.0);

  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int ch = 0; ch < 3; ++ch)
        CHECK(s.condition.at(y, x, ch) == s.image.at(y, x, ch) * s.mask.at(y, x));
}

TEST_CASE("compose_scene: determinism and pixel grid") {
  DesignPlan plan;
  plan.lines.push_back({4, 6, 40, 12, "SALE", 1, 0, 0});
  plan.lines.push_back({4, 30, 40, 14, "OPEN", 0, 3, 1});
  for (BgKind k : {BgKind::solid, BgKind::gradient, BgKind::noise}) {
    SceneSample a = compose_scene(plan, BackgroundSpec{k}, 77);
    SceneSample b = compose_scene(plan, BackgroundSpec{k}, 77);
    CHECK(a.image.data == b.image.data);
    CHECK(a.erased.data == b.erased.data);
    CHECK(a.mask.data == b.mask.data);
    SceneSample c = compose_scene(plan, BackgroundSpec{k}, 78);
    CHECK(a.image.data != c.image.data);
    for (double v : a.image.data) CHECK(v == quantize8(v));
    for (double v : a.erased.data) CHECK(v == quantize8(v));
  }
}

TEST_CASE("compose_scene: erased equals image off-mask, ink stays inside boxes") {
  DesignPlan plan;
  plan.lines.push_back({6, 4, 48, 14, "HELLO", 0, 1, 1});
  plan.lines.push_back({6, 34, 30, 18, "AB 0", 1, 4, 2});
  SceneSample s = compose_scene(plan, BackgroundSpec{BgKind::noise}, 5);

  auto inside_a_box = [&](int y, int x) {
    for (const auto& l : plan.lines)
      if (y >= l.y && y < l.y + l.h && x >= l.x && x < l.x + l.w) return true;
    return false;
  };
  int changed = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        double d = s.image.at(y, x, ch) - s.erased.at(y, x, ch);
        if (s.mask.at(y, x) == 0.0) CHECK(d == 0.0);
        if (d != 0.0) {
          ++changed;
          CHECK(inside_a_box(y, x));
        }
      }
  CHECK(changed > 0);
}

TEST_CASE("compose_scene: line validation and overlap rejection") {
  auto one = [](TextLine l) {
    DesignPlan p;
    p.lines.push_back(l);
    return p;
  };
  BackgroundSpec bg;
  CHECK_THROWS_AS(compose_scene(one({8, 8, 32, 16, "", 0, 0, 1}), bg, 1), LayoutError);
  CHECK_THROWS_AS(compose_scene(one({8, 8, 32, 16, "ABCDEHILM", 0, 0, 1}), bg, 1),
                  LayoutError);
  CHECK_THROWS_AS(compose_scene(one({8, 8, 32, 16, "xy", 0, 0, 1}), bg, 1),
                  AlphabetError);
  CHECK_THROWS_AS(compose_scene(one({40, 8, 32, 16, "AB", 0, 0, 1}), bg, 1),
                  LayoutError);  // spills right edge
  CHECK_THROWS_AS(compose_scene(one({8, 8, 8, 16, "ABC", 0, 0, 1}), bg, 1),
                  LayoutError);  // w < 4 * len
  CHECK_THROWS_AS(compose_scene(one({8, 8, 32, 16, "AB", 0, 9, 1}), bg, 1),
                  LayoutError);  // color out of palette
  DesignPlan two;
  two.lines.push_back({8, 8, 32, 16, "AB", 0, 0, 1});
  two.lines.push_back({30, 10, 20, 10, "CD", 0, 0, 1});
  CHECK_THROWS_AS(compose_scene(two, bg, 1), LayoutError);
}

TEST_CASE("sample_scene: deterministic and internally consistent") {
  CorpusConfig cfg;
  cfg.seed = 42;
  for (std::uint64_t i = 0; i < 12; ++i) {
    SceneSample a = sample_scene(cfg, i);
    SceneSample b = sample_scene(cfg, i);
    CHECK(a.image.data == b.image.data);
    CHECK(a.instruction == b.instruction);
    CHECK(a.sample_id == b.sample_id);

    design::Instruction instr = design::parse_instruction(a.instruction);
    CHECK(instr.pattern == a.pattern);
    CHECK(!a.lines.empty());
    for (const auto& l : a.lines) validate_line(l, a.image.h, a.image.w);
    for (std::size_t p = 0; p < a.lines.size(); ++p)
      for (std::size_t q = p + 1; q < a.lines.size(); ++q)
        CHECK_FALSE(boxes_overlap(a.lines[p], a.lines[q]));
    // FULL_SPEC instructions carry the ground-truth boxes verbatim.
    if (a.pattern == Pattern::full_spec) {
      REQUIRE(instr.lines.size() == a.lines.size());
      for (std::size_t k = 0; k < a.lines.size(); ++k) {
        REQUIRE(instr.lines[k].bbox.has_value());
        CHECK((*instr.lines[k].bbox)[0] == a.lines[k].x);
        CHECK((*instr.lines[k].bbox)[1] == a.lines[k].y);
        CHECK((*instr.lines[k].bbox)[2] == a.lines[k].w);
        CHECK((*instr.lines[k].bbox)[3] == a.lines[k].h);
        REQUIRE(instr.lines[k].text.has_value());
        CHECK(*instr.lines[k].text == a.lines[k].text);
      }
    }
  }
  SceneSample other = sample_scene(cfg, 500);
  CHECK(other.sample_id == "s000500");
}

TEST_CASE("sample_scene: distinct seeds give distinct corpora") {
  CorpusConfig a, b;
  a.seed = 1;
  b.seed = 2;
  int differ = 0;
  for (std::uint64_t i = 0; i < 8; ++i) {
    if (sample_scene(a, i).image.data != sample_scene(b, i).image.data) ++differ;
  }
  CHECK(differ >= 6);
}

TEST_CASE("corpus config round-trips through Config") {
  CorpusConfig cfg;
  cfg.canvas = 96;
  cfg.seed = 1234;
  cfg.pattern_mix = {40, 30, 20, 10};
  cfg.two_line_prob = 0.25;
  CorpusConfig back = CorpusConfig::from_config(cfg.to_config());
  CHECK(back.canvas == cfg.canvas);
  CHECK(back.seed == cfg.seed);
  CHECK(back.pattern_mix == cfg.pattern_mix);
  CHECK(back.two_line_prob == cfg.two_line_prob);
  CHECK(cfg.hash() == back.hash());
  CHECK(cfg.hash() != CorpusConfig{}.hash());
}

TEST_CASE("write_corpus / read_corpus round-trip, regeneration byte-identical") {
  CorpusConfig cfg;
  cfg.seed = 7;
  fs::path d1 = fresh_dir("umt_corpus_a");
  fs::path d2 = fresh_dir("umt_corpus_b");
  CorpusManifest m1 = write_corpus(10, cfg, d1.string());
  CorpusManifest m2 = write_corpus(10, cfg, d2.string());
  CHECK(m1.n == 10);
  CHECK(m1.pattern_counts == m2.pattern_counts);
  CHECK(m1.pattern_counts[0] + m1.pattern_counts[1] + m1.pattern_counts[2] +
            m1.pattern_counts[3] ==
        10);

  CHECK(slurp((d1 / "annotations.jsonl").string()) ==
        slurp((d2 / "annotations.jsonl").string()));
  CHECK(slurp((d1 / "manifest.json").string()) ==
        slurp((d2 / "manifest.json").string()));

  Corpus c = read_corpus(d1.string());
  CHECK(c.manifest.n == 10);
  CHECK(c.records.size() == 10);
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const CorpusRecord& r = c.records[i];
    CHECK(slurp((d1 / r.image).string()) == slurp((d2 / r.image).string()));
    CHECK(slurp((d1 / r.mask).string()) == slurp((d2 / r.mask).string()));

    // Disk pixels match the in-memory sampler output exactly.
    SceneSample s = sample_scene(cfg, i);
    CHECK(r.instruction == s.instruction);
    Image img = corpus_image(c, i);
    Image msk = corpus_mask(c, i);
    Image ers = corpus_erased(c, i);
    CHECK(img.data == s.image.data);
    CHECK(msk.data == s.mask.data);
    CHECK(ers.data == s.erased.data);
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("write_corpus: n=0 is a valid empty corpus") {
  fs::path d = fresh_dir("umt_corpus_empty");
  CorpusManifest m = write_corpus(0, CorpusConfig{}, d.string());
  CHECK(m.n == 0);
  CHECK(slurp((d / "annotations.jsonl").string()).empty());
  Corpus c = read_corpus(d.string());
  CHECK(c.records.empty());
  fs::remove_all(d);
}

TEST_CASE("pattern mix: every pattern appears and roughly follows the mix") {
  CorpusConfig cfg;
  cfg.seed = 9;
  std::array<int, 4> counts = {0, 0, 0, 0};
  const int n = 400;
  for (std::uint64_t i = 0; i < n; ++i) counts[int(sample_scene(cfg, i).pattern)]++;
  for (int k = 0; k < 4; ++k) {
    CHECK(counts[k] > 0);
    // 25% target; allow a wide band at n=400 (acceptance pins ±2% at n=5000).
    CHECK(double(counts[k]) / n > 0.15);
    CHECK(double(counts[k]) / n < 0.35);
  }
}

TEST_CASE("emit_stage1_records: counts follow the per-type formulas") {
  CorpusConfig cfg;
  cfg.seed = 21;
  fs::path d = fresh_dir("umt_corpus_rec");
  write_corpus(8, cfg, d.string());
  Corpus c = read_corpus(d.string());

  fs::path rd = fresh_dir("umt_stage1_rec");
  design::Stage1Counts counts = design::emit_stage1_records(c, rd.string());

  std::int64_t want_rec = 0;
  for (const auto& r : c.records)
    for (const auto& l : r.lines) want_rec += std::int64_t(l.text.size());
  CHECK(counts.recognition == want_rec);
  CHECK(counts.layout == 8);
  CHECK(counts.detection == 8);

  auto count_lines = [&](const char* name) {
    std::string body = slurp((rd / name).string());
    return std::count(body.begin(), body.end(), '\n');
  };
  CHECK(count_lines("recognition.jsonl") == want_rec);
  CHECK(count_lines("layout.jsonl") == 8);
  CHECK(count_lines("detection.jsonl") == 8);
  fs::remove_all(d);
  fs::remove_all(rd);
}
