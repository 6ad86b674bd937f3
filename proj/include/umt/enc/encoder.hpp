#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "umt/core/config.hpp"
#include "umt/core/image.hpp"
#include "umt/design/parser.hpp"
#include "umt/enc/char_encoder.hpp"
#include "umt/glyph/scene.hpp"
#include "umt/nn/modules.hpp"

namespace umt::enc {

struct EncoderConfig {
  int d_t = 128;        // instruction stream width; divisible by kInstrHeads
  int d_c = 128;        // context/attribute stream width
  int d_v = 64;         // char-visual stream width (must match CharEncoder)
  int d = 256;          // fused token width (must match backbone width)
  int max_context = 160;
  std::uint64_t init_seed = 1;

  Config to_config() const;
  static EncoderConfig from_config(const Config& c);
  std::uint64_t hash() const { return to_config().hash(); }
};

inline constexpr int kInstrHeads = 4;      // instruction self-attention heads
inline constexpr int kInstrMaxTokens = 64; // instruction stream length cap
inline constexpr int kLinePeSlots = 16;    // char-token line-index PE rows
inline constexpr int kCharPeSlots = 16;    // char-token char-index PE rows

/// Fused condition sequence for one sample. Rows are ordered exactly
/// [instruction | context | char-visual] followed by zero padding; `valid`
/// is (1, L) in {0,1} and is the attention key mask. Padded rows keep
/// segment id 0; `valid` alone marks them dead.
struct UMEmbedding {
  nn::Var tokens;                // (L, d)
  std::vector<int> segment_ids;  // length L, values in {0,1,2}
  nn::Tensor valid;              // (1, L)
  int n_instr = 0, n_ctx = 0, n_char = 0;

  int valid_len() const { return n_instr + n_ctx + n_char; }
  int length() const { return tokens->value.rows(); }

  std::string to_json() const;
  static UMEmbedding from_json(const std::string& text);
};

/// Stack per-sample embeddings of equal length L into backbone inputs:
/// cond rows (B*L, d) and valid mask (B, L).
std::pair<nn::Var, nn::Tensor> batch_cond(const std::vector<UMEmbedding>& ems);

/// Three-stream condition encoder. Streams are encoded at their native
/// widths; fuse() projects each through its connector, adds a segment
/// embedding, concatenates in fixed order, and pads.
class UMEncoder {
 public:
  explicit UMEncoder(const EncoderConfig& cfg);

  const EncoderConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return ps_; }
  const nn::ParamStore& params() const { return ps_; }

  /// DSL token ids -> (n, d_t). Empty list -> 0 rows. Ids outside the
  /// designer vocabulary -> VocabError; length > 64 -> ContextOverflowError.
  nn::Var encode_instruction_tokens(const std::vector<int>& ids) const;
  nn::Var encode_instruction(const design::Instruction& instr) const {
    return encode_instruction_tokens(instr.tokens);
  }

  /// Plan + reference image -> (n_lines + 1, d_c). One token per line
  /// (font/color/size embeddings plus a projection of the Fourier-featurized
  /// bbox normalized by the canvas); the final row is one global token from
  /// a tiny conv net mean-pooled over the reference image. The reference
  /// height and width must be divisible by 4.
  nn::Var encode_context(const glyph::DesignPlan& plan, const Image& reference) const;

  /// Render every character of every line at 80x80 with the line's font and
  /// embed with `ce`; rows are line-major, left to right, with additive
  /// sinusoidal line-index and char-index encodings. -> (n_char, d_v).
  nn::Var encode_chars(const glyph::DesignPlan& plan, const CharEncoder& ce) const;

  /// Connectors + segment embeddings + fixed-order concat. pad_to < 0 pads
  /// to the valid length only. Overflow past max_context (or pad_to beyond
  /// it) -> ContextOverflowError; pad_to below the valid length or a stream
  /// of the wrong width -> ShapeError.
  UMEmbedding fuse(const nn::Var& instr, const nn::Var& ctx, const nn::Var& chars,
                   int pad_to = -1) const;

  /// Zero-row stream placeholder of the given width.
  static nn::Var empty_stream(int width);

 private:
  struct Block {
    nn::LayerNorm ln1, ln2;
    nn::Linear wq, wk, wv, wo, ff1, ff2;
  };

  EncoderConfig cfg_;
  nn::ParamStore ps_;
  // instruction stream
  nn::Embedding instr_embed_;
  std::vector<Block> instr_blocks_;
  // context stream
  nn::Embedding font_embed_, color_embed_, size_embed_;
  nn::Linear bbox_proj_;
  nn::Conv2d ref_conv_;
  nn::Linear ref_fc_;
  // fuse
  nn::Linear conn_instr_, conn_ctx_, conn_char_;
  nn::Embedding segment_embed_;
};

}  // namespace umt::enc
