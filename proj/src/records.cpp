#include "umt/design/records.hpp"

#include <filesystem>
#include <json.hpp>

#include "umt/core/image.hpp"
#include "umt/glyph/atlas.hpp"

namespace umt::design {

using nlohmann::ordered_json;

namespace {

ordered_json lines_json(const std::vector<glyph::TextLine>& lines) {
  ordered_json out = ordered_json::array();
  for (const auto& l : lines)
    out.push_back(ordered_json{{"bbox", {l.x, l.y, l.w, l.h}},
                               {"text", l.text},
                               {"font_id", l.font_id},
                               {"color_id", l.color_id},
                               {"size_bucket", l.size_bucket}});
  return out;
}

}  // namespace

Stage1Counts emit_stage1_records(const glyph::Corpus& corpus,
                                 const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  Stage1Counts counts;
  std::string rec, lay, det;
  for (const auto& r : corpus.records) {
    for (const auto& l : r.lines) {
      const int n = static_cast<int>(l.text.size());
      for (int i = 0; i < n; ++i) {
        const int x0 = l.x + glyph::cell_left(l.w, n, i);
        const int x1 = l.x + glyph::cell_left(l.w, n, i + 1);
        rec += ordered_json{{"id", r.id},
                            {"image", r.image},
                            {"cell", {x0, l.y, x1 - x0, l.h}},
                            {"char", std::string(1, l.text[std::size_t(i)])},
                            {"char_id", glyph::char_to_id(l.text[std::size_t(i)])},
                            {"font_id", l.font_id},
                            {"color_id", l.color_id},
                            {"size_bucket", l.size_bucket}}
                   .dump();
        rec += '\n';
        ++counts.recognition;
      }
    }
    lay += ordered_json{{"id", r.id},
                        {"instruction", r.instruction},
                        {"lines", lines_json(r.lines)}}
               .dump();
    lay += '\n';
    ++counts.layout;
    det += ordered_json{{"id", r.id}, {"image", r.image}, {"lines", lines_json(r.lines)}}
               .dump();
    det += '\n';
    ++counts.detection;
  }
  write_text_atomic(out_dir + "/recognition.jsonl", rec);
  write_text_atomic(out_dir + "/layout.jsonl", lay);
  write_text_atomic(out_dir + "/detection.jsonl", det);
  return counts;
}

}  // namespace umt::design
