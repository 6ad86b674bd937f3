#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace umt {

/// Plain-text nested key-value document. One `section.sub.key = value` pair
/// per line, `#` comments, blank lines ignored. Keys are validated against a
/// schema; unknown keys are rejected rather than silently dropped.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_num(const std::string& key, double dflt) const;
  std::int64_t get_int(const std::string& key, std::int64_t dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  void set_num(const std::string& key, double value);
  void set_int(const std::string& key, std::int64_t value);
  void set_bool(const std::string& key, bool value);

  /// Canonical serialization: sorted keys, one per line. The config hash is
  /// FNV-1a of this form.
  std::string canonical() const;
  std::uint64_t hash() const;

  /// Throws ConfigError naming the first key not present in `known`.
  void validate_keys(const std::vector<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace umt
