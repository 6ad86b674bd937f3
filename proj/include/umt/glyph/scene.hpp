#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "umt/core/image.hpp"
#include "umt/glyph/atlas.hpp"

namespace umt::glyph {

inline constexpr int kDefaultCanvas = 64;
inline constexpr int kMaxCharsPerLine = 8;
inline constexpr int kMaxSceneTextChars = 4;  // text budget per generated line
inline constexpr int kMinCellW = 4;
inline constexpr int kMinCellH = 8;  // glyph renderer minimum
inline constexpr int kPaletteSize = 8;
inline constexpr int kMaskDilationPx = 2;
inline constexpr int kNumSizeBuckets = 3;

enum class Pattern { full_spec, auto_layout, auto_text, auto_all };
const char* pattern_name(Pattern p);
Pattern pattern_from_name(const std::string& name);

struct TextLine {
  int x = 0, y = 0, w = 0, h = 0;
  std::string text;
  int font_id = 0;
  int color_id = 0;
  int size_bucket = 1;
};

/// Completed design: what the scene compositor consumes. Produced either by
/// the planner or drawn directly by the corpus sampler.
struct DesignPlan {
  std::vector<TextLine> lines;
  int canvas_h = kDefaultCanvas;
  int canvas_w = kDefaultCanvas;
};

enum class BgKind { solid, gradient, noise };

struct BackgroundSpec {
  BgKind kind = BgKind::solid;
};

struct SceneSample {
  Image image;      // I_s, HxWx3
  Image mask;       // I_m, HxWx1 in {0,1}
  Image condition;  // I_c = I_s (.) I_m
  Image erased;     // text-free background (ground truth for region keep)
  std::vector<TextLine> lines;
  std::string instruction;
  Pattern pattern = Pattern::full_spec;
  std::string sample_id;
};

const std::array<std::array<double, 3>, kPaletteSize>& text_palette();

/// Deterministic per (plan, spec, seed). Throws LayoutError on invalid or
/// overlapping boxes.
SceneSample compose_scene(const DesignPlan& plan, const BackgroundSpec& bg,
                          std::uint64_t seed);

void validate_line(const TextLine& line, int canvas_h, int canvas_w);
bool boxes_overlap(const TextLine& a, const TextLine& b);

/// Equal-width cell split: cell i spans [round(i*w/n), round((i+1)*w/n)).
int cell_left(int w, int n, int i);

}  // namespace umt::glyph
