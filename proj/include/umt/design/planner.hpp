#pragma once
#include <string>
#include <vector>

#include "umt/design/parser.hpp"
#include "umt/glyph/scene.hpp"

namespace umt::design {

struct SceneMeta {
  int canvas_h = glyph::kDefaultCanvas;
  int canvas_w = glyph::kDefaultCanvas;
  std::vector<glyph::TextLine> occupied;  // boxes auto-placement must avoid
};

/// Deterministic completion of every field the instruction leaves out.
/// Given boxes are kept verbatim; missing boxes stack top-to-bottom starting
/// at 0.125*H, centered, heights {0.18, 0.22, 0.28}*H by size bucket, gap
/// 0.05*H, shifting later lines down on collision.
glyph::DesignPlan plan_layout(const Instruction& instr, const SceneMeta& meta);

/// Default attribute rules (exposed for tests and the corpus sampler).
int auto_color(const std::string& text);                       // fnv1a(text) % palette
std::string auto_text(const std::string& theme, int line_index);
inline constexpr const char* kDefaultTheme = "NOTE";

int bucket_height(int size_bucket, int canvas_h);

}  // namespace umt::design
