#pragma once
#include <cstdint>
#include <string>

#include "umt/glyph/corpus.hpp"

namespace umt::design {

struct Stage1Counts {
  std::int64_t recognition = 0;  // one per rendered character
  std::int64_t layout = 0;       // one instruction->plan pair per sample
  std::int64_t detection = 0;    // one image->lines pair per sample
};

/// Emits recognition.jsonl / layout.jsonl / detection.jsonl under out_dir.
Stage1Counts emit_stage1_records(const glyph::Corpus& corpus,
                                 const std::string& out_dir);

}  // namespace umt::design
