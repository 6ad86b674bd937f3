#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "umt/core/config.hpp"
#include "umt/glyph/scene.hpp"

namespace umt::glyph {

struct CorpusConfig {
  int canvas = kDefaultCanvas;
  std::uint64_t seed = 0;
  std::array<int, 4> pattern_mix = {25, 25, 25, 25};  // percent, sums to 100
  double two_line_prob = 0.45;

  Config to_config() const;
  static CorpusConfig from_config(const Config& c);
  std::uint64_t hash() const { return to_config().hash(); }
};

struct CorpusManifest {
  int n = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::array<int, 4> pattern_counts = {0, 0, 0, 0};  // FULL, A_LAYOUT, A_TEXT, A_ALL
  std::string annotations = "annotations.jsonl";
};

struct CorpusRecord {
  std::string id;
  std::string image, erased_image, mask;  // paths relative to the corpus dir
  Pattern pattern = Pattern::full_spec;
  std::string instruction;
  std::vector<TextLine> lines;
};

struct Corpus {
  std::string dir;
  CorpusManifest manifest;
  std::vector<CorpusRecord> records;
};

/// Draws the sample for one corpus index. Exposed so tests and the evaluation
/// harness can materialize held-out samples without touching the filesystem.
SceneSample sample_scene(const CorpusConfig& cfg, std::uint64_t index);

CorpusManifest write_corpus(int n, const CorpusConfig& cfg, const std::string& out_dir);
Corpus read_corpus(const std::string& dir);

Image corpus_image(const Corpus& c, std::size_t idx);
Image corpus_erased(const Corpus& c, std::size_t idx);
Image corpus_mask(const Corpus& c, std::size_t idx);

}  // namespace umt::glyph
