#include "umt/design/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "umt/core/error.hpp"
#include "umt/core/hash.hpp"

namespace umt::design {

namespace {

constexpr double kBucketFrac[glyph::kNumSizeBuckets] = {0.18, 0.22, 0.28};

bool hits_any(const glyph::TextLine& box, const std::vector<glyph::TextLine>& others) {
  for (const auto& o : others)
    if (glyph::boxes_overlap(box, o)) return true;
  return false;
}

}  // namespace

int auto_color(const std::string& text) {
  return static_cast<int>(fnv1a64(text) % glyph::kPaletteSize);
}

std::string auto_text(const std::string& theme, int line_index) {
  std::string t;
  for (char c : theme) {
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (glyph::alphabet().find(u) != std::string::npos) t += u;
  }
  if (t.empty()) t = kDefaultTheme;
  if (line_index > 0) {
    // keep room for the line digit so every derived line stays in budget
    if (static_cast<int>(t.size()) > glyph::kMaxSceneTextChars - 1)
      t.resize(std::size_t(glyph::kMaxSceneTextChars - 1));
    t += static_cast<char>('0' + line_index % 4);
  }
  if (static_cast<int>(t.size()) > glyph::kMaxSceneTextChars)
    t.resize(std::size_t(glyph::kMaxSceneTextChars));
  return t;
}

int bucket_height(int size_bucket, int canvas_h) {
  if (size_bucket < 0 || size_bucket >= glyph::kNumSizeBuckets)
    throw LayoutError("size bucket out of range");
  return static_cast<int>(std::llround(kBucketFrac[size_bucket] * canvas_h));
}

glyph::DesignPlan plan_layout(const Instruction& instr, const SceneMeta& meta) {
  const int H = meta.canvas_h, W = meta.canvas_w;
  if (H < 32 || W < 32) throw LayoutError("canvas smaller than 32x32");

  glyph::DesignPlan plan;
  plan.canvas_h = H;
  plan.canvas_w = W;

  const std::string theme =
      instr.theme_word ? *instr.theme_word : std::string(kDefaultTheme);

  // Resolve text and attributes first; box completion needs final text length.
  std::vector<glyph::TextLine> lines;
  std::vector<bool> box_given;
  for (std::size_t i = 0; i < instr.lines.size(); ++i) {
    const auto& req = instr.lines[i];
    glyph::TextLine l;
    l.text = req.text ? *req.text
                      : auto_text(req.theme ? *req.theme : theme, static_cast<int>(i));
    if (l.text.empty()) throw LayoutError("empty line text");
    if (!glyph::text_in_alphabet(l.text))
      throw AlphabetError("line text outside alphabet: " + l.text);
    l.font_id = req.font_id.value_or(0);
    l.color_id = req.color_id.value_or(auto_color(l.text));
    l.size_bucket = req.size_bucket.value_or(1);
    if (l.font_id < 0 || l.font_id >= glyph::kNumFonts)
      throw LayoutError("font id out of range");
    if (l.color_id < 0 || l.color_id >= glyph::kPaletteSize)
      throw LayoutError("color id out of range");
    if (l.size_bucket < 0 || l.size_bucket >= glyph::kNumSizeBuckets)
      throw LayoutError("size bucket out of range");
    if (req.bbox) {
      l.x = (*req.bbox)[0];
      l.y = (*req.bbox)[1];
      l.w = (*req.bbox)[2];
      l.h = (*req.bbox)[3];
    }
    lines.push_back(l);
    box_given.push_back(req.bbox.has_value());
  }

  // Fixed boxes are obstacles for the stacked ones, along with occupied.
  std::vector<glyph::TextLine> obstacles = meta.occupied;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!box_given[i]) continue;
    glyph::validate_line(lines[i], H, W);
    if (hits_any(lines[i], obstacles)) throw LayoutError("given boxes overlap");
    obstacles.push_back(lines[i]);
  }

  int y_cursor = static_cast<int>(std::llround(0.125 * H));
  const int gap = static_cast<int>(std::llround(0.05 * H));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (box_given[i]) continue;
    glyph::TextLine& l = lines[i];
    const int n = static_cast<int>(l.text.size());
    l.h = std::max(glyph::kMinCellH, bucket_height(l.size_bucket, H));
    const int cell_w = std::max(glyph::kMinCellW, (l.h * 3) / 4);
    l.w = std::min(n * cell_w, W - 2);
    if (l.w < n * glyph::kMinCellW)
      throw LayoutOverflowError("text too long for canvas width");
    l.x = (W - l.w) / 2;
    l.y = y_cursor;
    while (l.y + l.h <= H && hits_any(l, obstacles)) ++l.y;  // shift down
    if (l.y + l.h > H) throw LayoutOverflowError("cannot fit line inside canvas");
    glyph::validate_line(l, H, W);
    obstacles.push_back(l);
    y_cursor = l.y + l.h + gap;
  }

  std::stable_sort(lines.begin(), lines.end(),
                   [](const glyph::TextLine& a, const glyph::TextLine& b) {
                     return a.y != b.y ? a.y < b.y : a.x < b.x;
                   });
  plan.lines = std::move(lines);
  return plan;
}

}  // namespace umt::design
