#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "umt/core/error.hpp"
#include "umt/core/hash.hpp"
#include "umt/design/parser.hpp"
#include "umt/design/planner.hpp"
#include "umt/glyph/scene.hpp"

using namespace umt;
using namespace umt::design;
using glyph::Pattern;

TEST_CASE("parse: fully specified statement") {
  Instruction in = parse_instruction("add line \"SALE\" at (8,8,48,16) color=2");
  CHECK(in.pattern == Pattern::full_spec);
  REQUIRE(in.lines.size() == 1);
  const LineRequest& l = in.lines[0];
  CHECK(l.verb == Verb::add);
  REQUIRE(l.text.has_value());
  CHECK(*l.text == "SALE");
  REQUIRE(l.bbox.has_value());
  CHECK(*l.bbox == std::array<int, 4>{8, 8, 48, 16});
  CHECK_FALSE(l.font_id.has_value());
  REQUIRE(l.color_id.has_value());
  CHECK(*l.color_id == 2);
  CHECK_FALSE(l.size_bucket.has_value());
  CHECK_FALSE(l.theme.has_value());
}

TEST_CASE("parse: pattern inference from present fields") {
  CHECK(parse_instruction("add line \"HI\"").pattern == Pattern::auto_layout);
  CHECK(parse_instruction("add at (8,8,48,16)").pattern == Pattern::auto_text);
  CHECK(parse_instruction("add theme=SALE").pattern == Pattern::auto_all);
  CHECK(parse_instruction("edit").pattern == Pattern::auto_all);
  CHECK(parse_instruction("translate line \"TEA\" at (2,2,20,10)").pattern ==
        Pattern::full_spec);

  Instruction multi = parse_instruction(
      "add line \"HOT\" at (2,2,20,10) ; add line \"ICE\" at (2,20,20,10)");
  CHECK(multi.pattern == Pattern::full_spec);
  CHECK(multi.lines.size() == 2);
  CHECK(multi.lines[1].verb == Verb::add);

  // Text-present and text-absent statements cannot mix.
  CHECK_THROWS_AS(
      parse_instruction("add line \"HI\" ; add at (2,20,20,10)"), ParseError);
}

TEST_CASE("parse: theme word is captured once, first statement wins") {
  Instruction in =
      parse_instruction("add theme=SALE ; add size=2 theme=MENU");
  REQUIRE(in.theme_word.has_value());
  CHECK(*in.theme_word == "SALE");
  REQUIRE(in.lines[1].theme.has_value());
  CHECK(*in.lines[1].theme == "MENU");
  REQUIRE(in.lines[1].size_bucket.has_value());
  CHECK(*in.lines[1].size_bucket == 2);
}

TEST_CASE("parse: errors carry byte offsets") {
  auto offset_of = [](const std::string& raw) -> std::size_t {
    try {
      parse_instruction(raw);
    } catch (const ParseError& e) {
      return e.byte_offset;
    }
    FAIL("expected ParseError for: ", raw);
    return std::size_t(-1);
  };
  CHECK(offset_of("paint line \"HI\"") == 0);           // unknown verb
  CHECK(offset_of("add lime \"HI\"") == 4);             // unknown field
  CHECK(offset_of("add line \"HI") == 9);               // unterminated string
  CHECK(offset_of("add color=2 line \"HI\"") == 12);    // out of order
  CHECK(offset_of("add font=1 font=0") == 11);          // repeated field
  CHECK(offset_of("add at (8,8,48)") == 14);            // bbox needs 4 numbers
  CHECK(offset_of("add line \"HI\" ? ") == 14);         // stray character
  CHECK_THROWS_AS(parse_instruction(""), ParseError);
  CHECK_THROWS_AS(parse_instruction("add line \"HI\" ;"), ParseError);
  CHECK_THROWS_AS(parse_instruction(std::string(600, 'a')), ParseError);
}

TEST_CASE("parse: alphabet enforcement on text and theme") {
  CHECK_THROWS_AS(parse_instruction("add line \"hi\""), AlphabetError);
  CHECK_THROWS_AS(parse_instruction("add line \"SALE!\""), AlphabetError);
  CHECK_THROWS_AS(parse_instruction("add theme=QUIZ"), AlphabetError);
  CHECK_NOTHROW(parse_instruction("add line \"SALE 01\""));
}

TEST_CASE("parse: token stream stays inside the fixed vocabulary") {
  CHECK(vocab_size() == 53);
  CHECK(int(vocab().size()) == vocab_size());
  Instruction in = parse_instruction("add line \"SALE\" at (8,8,48,16) color=2");
  CHECK(!in.tokens.empty());
  CHECK(int(in.tokens.size()) <= kMaxTokens);
  for (int t : in.tokens) {
    CHECK(t >= 0);
    CHECK(t < vocab_size());
  }
  // Same raw text, same tokens.
  CHECK(parse_instruction(in.raw).tokens == in.tokens);
  // Token budget enforced.
  std::string big = "add line \"ABCDEHIL\" at (1,1,62,10)";
  for (int i = 0; i < 3; ++i) big += " ; add line \"ABCDEHIL\" at (1,1,62,10)";
  CHECK_THROWS_AS(parse_instruction(big), ParseError);
}

TEST_CASE("unparse: canonical form is a parse fixed point") {
  std::vector<std::string> raws = {
      "add line \"SALE\" at (8,8,48,16) color=2",
      "edit line \"HI\"",
      "translate at (4,4,40,12) font=1 size=0",
      "add theme=SALE",
      "add line \"HOT\" at (2,2,20,10) ; add line \"ICE\" at (2,20,20,10)",
      "  add   line \"HI\"   font=0  ",
  };
  for (const auto& raw : raws) {
    Instruction a = parse_instruction(raw);
    std::string canon = unparse(a);
    Instruction b = parse_instruction(canon);
    CHECK(unparse(b) == canon);
    CHECK(b.pattern == a.pattern);
    REQUIRE(b.lines.size() == a.lines.size());
    for (std::size_t i = 0; i < a.lines.size(); ++i) {
      CHECK(b.lines[i].verb == a.lines[i].verb);
      CHECK(b.lines[i].text == a.lines[i].text);
      CHECK(b.lines[i].bbox == a.lines[i].bbox);
      CHECK(b.lines[i].font_id == a.lines[i].font_id);
      CHECK(b.lines[i].color_id == a.lines[i].color_id);
      CHECK(b.lines[i].size_bucket == a.lines[i].size_bucket);
      CHECK(b.lines[i].theme == a.lines[i].theme);
    }
    CHECK(b.tokens == a.tokens);
  }
}

TEST_CASE("planner: pinned placement for one auto-laid line") {
  Instruction in = parse_instruction("add line \"HI\" size=1");
  glyph::DesignPlan plan = plan_layout(in, SceneMeta{});
  REQUIRE(plan.lines.size() == 1);
  const glyph::TextLine& l = plan.lines[0];
  // 64-canvas rule: y = 0.125*64 = 8, h = 0.22*64 -> 14, w = 2*10 = 20, centered.
  CHECK(l.y == 8);
  CHECK(l.h == 14);
  CHECK(l.w == 20);
  CHECK(l.x == 22);
  CHECK(l.text == "HI");
  CHECK(l.font_id == 0);
  CHECK(l.size_bucket == 1);
  CHECK(l.color_id == int(fnv1a64("HI") % 8));
}

TEST_CASE("planner: FULL_SPEC is the identity on lines") {
  Instruction in = parse_instruction(
      "add line \"HOT\" at (2,2,20,10) font=1 color=3 size=0 ; "
      "add line \"ICE\" at (30,40,20,10)");
  glyph::DesignPlan plan = plan_layout(in, SceneMeta{});
  REQUIRE(plan.lines.size() == 2);
  CHECK(plan.lines[0].x == 2);
  CHECK(plan.lines[0].y == 2);
  CHECK(plan.lines[0].w == 20);
  CHECK(plan.lines[0].h == 10);
  CHECK(plan.lines[0].text == "HOT");
  CHECK(plan.lines[0].font_id == 1);
  CHECK(plan.lines[0].color_id == 3);
  CHECK(plan.lines[0].size_bucket == 0);
  CHECK(plan.lines[1].x == 30);
  CHECK(plan.lines[1].y == 40);
  CHECK(plan.lines[1].text == "ICE");
  // Defaults still fill the unspecified attributes.
  CHECK(plan.lines[1].font_id == 0);
  CHECK(plan.lines[1].color_id == auto_color("ICE"));
  CHECK(plan.lines[1].size_bucket == 1);
}

TEST_CASE("planner: determinism and multi-line stacking without overlap") {
  Instruction in = parse_instruction("add line \"SALE\" ; add line \"OPEN\" size=0");
  glyph::DesignPlan a = plan_layout(in, SceneMeta{});
  glyph::DesignPlan b = plan_layout(in, SceneMeta{});
  REQUIRE(a.lines.size() == 2);
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    CHECK(a.lines[i].x == b.lines[i].x);
    CHECK(a.lines[i].y == b.lines[i].y);
  }
  CHECK_FALSE(glyph::boxes_overlap(a.lines[0], a.lines[1]));
  CHECK(a.lines[0].y < a.lines[1].y);
  for (const auto& l : a.lines) glyph::validate_line(l, 64, 64);
}

TEST_CASE("planner: occupied boxes push auto placement down") {
  Instruction in = parse_instruction("add line \"HI\" size=1");
  SceneMeta meta;
  glyph::TextLine base = plan_layout(in, meta).lines[0];

  meta.occupied.push_back({10, 6, 44, 20, "AB", 0, 0, 1});
  glyph::TextLine shifted = plan_layout(in, meta).lines[0];
  CHECK(shifted.y >= 26);
  CHECK(shifted.y > base.y);
  CHECK_FALSE(glyph::boxes_overlap(shifted, meta.occupied[0]));
}

TEST_CASE("planner: overflow and unplannable requests throw") {
  // Three size-2 lines (h=18, gap=3, start y=8) exceed a 64-px canvas.
  Instruction in = parse_instruction(
      "add line \"AA\" size=2 ; add line \"BB\" size=2 ; add line \"CC\" size=2");
  CHECK_THROWS_AS(plan_layout(in, SceneMeta{}), LayoutOverflowError);

  // Eight chars need 32 px of width; a 32-px canvas offers only 30 usable.
  Instruction wide = parse_instruction("add line \"ABCDEHIL\"");
  SceneMeta narrow;
  narrow.canvas_h = 32;
  narrow.canvas_w = 32;
  CHECK_THROWS_AS(plan_layout(wide, narrow), LayoutOverflowError);
  // The same line on the default canvas clamps to the usable width and fits.
  CHECK(plan_layout(wide, SceneMeta{}).lines[0].w == 62);

  Instruction bad_attr = parse_instruction("add line \"HI\" color=8");
  CHECK_THROWS_AS(plan_layout(bad_attr, SceneMeta{}), LayoutError);

  SceneMeta tiny;
  tiny.canvas_h = 16;
  tiny.canvas_w = 16;
  CHECK_THROWS_AS(plan_layout(parse_instruction("add line \"HI\""), tiny),
                  LayoutError);
}

TEST_CASE("planner: auto text derives from theme and line index") {
  CHECK(auto_text("SALE", 0) == "SALE");
  CHECK(auto_text("SALE", 1) == "SAL1");  // digit fits inside the budget
  CHECK(auto_text("sale", 0) == "SALE");
  CHECK(auto_text("", 0) == "NOTE");
  CHECK(auto_text("ABCDEHIL", 0) == "ABCD");
  CHECK(auto_text("ABCDEHIL", 1) == "ABC1");

  Instruction themed = parse_instruction("add theme=MENU ; add");
  glyph::DesignPlan plan = plan_layout(themed, SceneMeta{});
  REQUIRE(plan.lines.size() == 2);
  CHECK(plan.lines[0].text == "MENU");
  CHECK(plan.lines[1].text == "MEN1");

  Instruction bare = parse_instruction("add");
  CHECK(plan_layout(bare, SceneMeta{}).lines[0].text == kDefaultTheme);
}

TEST_CASE("planner: bucket heights follow the size table") {
  CHECK(bucket_height(0, 64) == 12);
  CHECK(bucket_height(1, 64) == 14);
  CHECK(bucket_height(2, 64) == 18);
  CHECK(bucket_height(1, 100) == 22);
}
