#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "econsim/errors.hpp"

namespace econsim {

// Parsed node of a key-value configuration tree. The on-disk format is a
// TOML subset: `[section.sub]` headers, `key = value` pairs, strings,
// numbers, booleans, arrays and inline tables `{k = v, ...}`. Comments start
// with `#`. This covers every config the tools read; the accepted grammar is
// documented in the README.
class ConfigValue {
 public:
  enum class Kind { None, Bool, Int, Float, String, Array, Table };

  ConfigValue() = default;

  Kind kind() const { return kind_; }
  bool is_table() const { return kind_ == Kind::Table; }
  bool is_array() const { return kind_ == Kind::Array; }
  bool defined() const { return kind_ != Kind::None; }

  // Typed access; throws ConfigError with the node's path on mismatch.
  bool as_bool() const;
  std::int64_t as_int() const;
  double as_double() const;  // accepts ints
  const std::string& as_string() const;
  const std::vector<ConfigValue>& as_array() const;
  const std::map<std::string, ConfigValue>& as_table() const;

  // Path lookup, e.g. at("solver.tolerance"). Returns an undefined node when
  // absent; at_required throws.
  const ConfigValue& at(std::string_view dotted_path) const;
  const ConfigValue& at_required(std::string_view dotted_path) const;
  bool has(std::string_view dotted_path) const { return at(dotted_path).defined(); }

  double get_double(std::string_view path, double fallback) const;
  std::int64_t get_int(std::string_view path, std::int64_t fallback) const;
  bool get_bool(std::string_view path, bool fallback) const;
  std::string get_string(std::string_view path, const std::string& fallback) const;

  std::vector<double> as_double_array() const;

  const std::string& path() const { return path_; }

  static ConfigValue make_table(std::string path);

 private:
  friend class ConfigParser;

  Kind kind_ = Kind::None;
  bool bool_ = false;
  std::int64_t int_ = 0;
  double float_ = 0.0;
  std::string string_;
  std::vector<ConfigValue> array_;
  std::map<std::string, ConfigValue> table_;
  std::string path_;  // dotted location, for error messages

  [[noreturn]] void type_error(const char* wanted) const;
};

ConfigValue parse_config_text(std::string_view text, const std::string& origin);
ConfigValue parse_config_file(const std::string& path);

}  // namespace econsim
