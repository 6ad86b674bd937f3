#pragma once
#include <stdexcept>
#include <string>

namespace umt {

struct AlphabetError : std::runtime_error {
  explicit AlphabetError(const std::string& m) : std::runtime_error(m) {}
};
struct LayoutError : std::runtime_error {
  explicit LayoutError(const std::string& m) : std::runtime_error(m) {}
};
struct LayoutOverflowError : std::runtime_error {
  explicit LayoutOverflowError(const std::string& m) : std::runtime_error(m) {}
};
struct ParseError : std::runtime_error {
  ParseError(const std::string& m, std::size_t offset)
      : std::runtime_error(m + " (at byte " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
  std::size_t byte_offset;
};
struct VocabError : std::runtime_error {
  explicit VocabError(const std::string& m) : std::runtime_error(m) {}
};
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& m) : std::runtime_error(m) {}
};
struct ContextOverflowError : std::runtime_error {
  explicit ContextOverflowError(const std::string& m) : std::runtime_error(m) {}
};
struct SamplerError : std::runtime_error {
  explicit SamplerError(const std::string& m) : std::runtime_error(m) {}
};
struct CorpusError : std::runtime_error {
  explicit CorpusError(const std::string& m) : std::runtime_error(m) {}
};
struct CorpusWriteError : std::runtime_error {
  explicit CorpusWriteError(const std::string& m) : std::runtime_error(m) {}
};
struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& m) : std::runtime_error(m) {}
};
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace umt
