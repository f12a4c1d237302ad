#include "econsim/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace econsim {

namespace {

std::string join_path(const std::string& base, std::string_view key) {
  if (base.empty()) return std::string(key);
  return base + "." + std::string(key);
}

}  // namespace

void ConfigValue::type_error(const char* wanted) const {
  throw ConfigError("config: '" + (path_.empty() ? std::string("<root>") : path_) +
                    "' is not a " + wanted);
}

bool ConfigValue::as_bool() const {
  if (kind_ != Kind::Bool) type_error("boolean");
  return bool_;
}

std::int64_t ConfigValue::as_int() const {
  if (kind_ != Kind::Int) type_error("integer");
  return int_;
}

double ConfigValue::as_double() const {
  if (kind_ == Kind::Int) return static_cast<double>(int_);
  if (kind_ != Kind::Float) type_error("number");
  return float_;
}

const std::string& ConfigValue::as_string() const {
  if (kind_ != Kind::String) type_error("string");
  return string_;
}

const std::vector<ConfigValue>& ConfigValue::as_array() const {
  if (kind_ != Kind::Array) type_error("array");
  return array_;
}

const std::map<std::string, ConfigValue>& ConfigValue::as_table() const {
  if (kind_ != Kind::Table) type_error("table");
  return table_;
}

const ConfigValue& ConfigValue::at(std::string_view dotted_path) const {
  static const ConfigValue undefined;
  const ConfigValue* node = this;
  std::size_t pos = 0;
  while (pos <= dotted_path.size()) {
    const std::size_t dot = dotted_path.find('.', pos);
    const std::string_view key = dotted_path.substr(
        pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
    if (node->kind_ != Kind::Table) return undefined;
    auto it = node->table_.find(std::string(key));
    if (it == node->table_.end()) return undefined;
    node = &it->second;
    if (dot == std::string_view::npos) return *node;
    pos = dot + 1;
  }
  return undefined;
}

const ConfigValue& ConfigValue::at_required(std::string_view dotted_path) const {
  const ConfigValue& v = at(dotted_path);
  if (!v.defined()) {
    throw ConfigError("config: missing required key '" +
                      join_path(path_, dotted_path) + "'");
  }
  return v;
}

double ConfigValue::get_double(std::string_view path, double fallback) const {
  const ConfigValue& v = at(path);
  return v.defined() ? v.as_double() : fallback;
}

std::int64_t ConfigValue::get_int(std::string_view path, std::int64_t fallback) const {
  const ConfigValue& v = at(path);
  return v.defined() ? v.as_int() : fallback;
}

bool ConfigValue::get_bool(std::string_view path, bool fallback) const {
  const ConfigValue& v = at(path);
  return v.defined() ? v.as_bool() : fallback;
}

std::string ConfigValue::get_string(std::string_view path,
                                    const std::string& fallback) const {
  const ConfigValue& v = at(path);
  return v.defined() ? v.as_string() : fallback;
}

std::vector<double> ConfigValue::as_double_array() const {
  std::vector<double> out;
  out.reserve(as_array().size());
  for (const ConfigValue& v : array_) out.push_back(v.as_double());
  return out;
}

ConfigValue ConfigValue::make_table(std::string path) {
  ConfigValue v;
  v.kind_ = Kind::Table;
  v.path_ = std::move(path);
  return v;
}

// ---------------------------------------------------------------------------

class ConfigParser {
 public:
  ConfigParser(std::string_view text, std::string origin)
      : text_(text), origin_(std::move(origin)) {}

  ConfigValue parse() {
    ConfigValue root = ConfigValue::make_table("");
    ConfigValue* section = &root;
    while (!at_end()) {
      skip_ws_and_comments(true);
      if (at_end()) break;
      if (peek() == '[') {
        section = parse_section_header(root);
      } else {
        parse_key_value(*section);
      }
    }
    return root;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char get() {
    char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << origin_ << ":" << line_ << ": " << msg;
    throw ConfigError(os.str());
  }

  void skip_ws_and_comments(bool cross_lines) {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '\n' && cross_lines) {
        get();
      } else {
        break;
      }
    }
  }

  static bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_bare_key() {
    std::size_t start = pos_;
    while (!at_end() && is_bare_key_char(peek())) ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  ConfigValue* parse_section_header(ConfigValue& root) {
    get();  // '['
    ConfigValue* node = &root;
    for (;;) {
      skip_ws_and_comments(false);
      std::string key = parse_bare_key();
      auto& table = node->table_;
      auto [it, inserted] =
          table.emplace(key, ConfigValue::make_table(join_path(node->path_, key)));
      if (!inserted && it->second.kind_ != ConfigValue::Kind::Table) {
        fail("section '" + it->second.path_ + "' conflicts with an existing value");
      }
      node = &it->second;
      skip_ws_and_comments(false);
      if (at_end()) fail("unterminated section header");
      char c = get();
      if (c == ']') break;
      if (c != '.') fail("expected '.' or ']' in section header");
    }
    return node;
  }

  void parse_key_value(ConfigValue& section) {
    std::string key = parse_bare_key();
    skip_ws_and_comments(false);
    if (at_end() || get() != '=') fail("expected '=' after key '" + key + "'");
    skip_ws_and_comments(false);
    ConfigValue value = parse_value(join_path(section.path_, key));
    auto [it, inserted] = section.table_.emplace(key, std::move(value));
    if (!inserted) fail("duplicate key '" + it->second.path_ + "'");
    skip_ws_and_comments(false);
    if (!at_end() && peek() != '\n') fail("unexpected text after value of '" + key + "'");
  }

  ConfigValue parse_value(std::string path) {
    if (at_end()) fail("expected a value");
    char c = peek();
    if (c == '"') return parse_string(std::move(path));
    if (c == '[') return parse_array(std::move(path));
    if (c == '{') return parse_inline_table(std::move(path));
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_keyword(std::move(path));
    return parse_number(std::move(path));
  }

  ConfigValue parse_string(std::string path) {
    get();  // opening quote
    std::string out;
    while (!at_end()) {
      char c = get();
      if (c == '"') {
        ConfigValue v;
        v.kind_ = ConfigValue::Kind::String;
        v.string_ = std::move(out);
        v.path_ = std::move(path);
        return v;
      }
      if (c == '\\') {
        if (at_end()) break;
        char e = get();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
      } else if (c == '\n') {
        fail("unterminated string");
      } else {
        out.push_back(c);
      }
    }
    fail("unterminated string");
  }

  ConfigValue parse_keyword(std::string path) {
    std::size_t start = pos_;
    while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
    std::string_view word = text_.substr(start, pos_ - start);
    ConfigValue v;
    v.path_ = std::move(path);
    if (word == "true" || word == "false") {
      v.kind_ = ConfigValue::Kind::Bool;
      v.bool_ = (word == "true");
      return v;
    }
    if (word == "inf" || word == "nan") {
      v.kind_ = ConfigValue::Kind::Float;
      v.float_ = word == "inf" ? std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::quiet_NaN();
      return v;
    }
    fail("unknown keyword '" + std::string(word) + "'");
  }

  ConfigValue parse_number(std::string path) {
    std::size_t start = pos_;
    bool is_float = false;
    if (!at_end() && (peek() == '+' || peek() == '-')) ++pos_;
    while (!at_end()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        ++pos_;
        if (!at_end() && (peek() == '+' || peek() == '-')) ++pos_;
      } else if (c == '_') {
        ++pos_;
      } else {
        break;
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    std::erase(token, '_');
    if (token.empty() || token == "+" || token == "-") fail("expected a number");
    ConfigValue v;
    v.path_ = std::move(path);
    if (is_float) {
      v.kind_ = ConfigValue::Kind::Float;
      v.float_ = std::strtod(token.c_str(), nullptr);
    } else {
      v.kind_ = ConfigValue::Kind::Int;
      v.int_ = 0;
      auto res = std::from_chars(token.data(), token.data() + token.size(), v.int_);
      if (res.ec != std::errc()) fail("invalid integer '" + token + "'");
    }
    return v;
  }

  ConfigValue parse_array(std::string path) {
    get();  // '['
    ConfigValue v;
    v.kind_ = ConfigValue::Kind::Array;
    v.path_ = path;
    for (;;) {
      skip_ws_and_comments(true);
      if (at_end()) fail("unterminated array");
      if (peek() == ']') {
        get();
        return v;
      }
      v.array_.push_back(
          parse_value(path + "[" + std::to_string(v.array_.size()) + "]"));
      skip_ws_and_comments(true);
      if (at_end()) fail("unterminated array");
      if (peek() == ',') {
        get();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  ConfigValue parse_inline_table(std::string path) {
    get();  // '{'
    ConfigValue v = ConfigValue::make_table(path);
    skip_ws_and_comments(false);
    if (!at_end() && peek() == '}') {
      get();
      return v;
    }
    for (;;) {
      skip_ws_and_comments(false);
      std::string key = parse_bare_key();
      skip_ws_and_comments(false);
      if (at_end() || get() != '=') fail("expected '=' in inline table");
      skip_ws_and_comments(false);
      ConfigValue val = parse_value(join_path(path, key));
      if (!v.table_.emplace(key, std::move(val)).second) {
        fail("duplicate key '" + key + "' in inline table");
      }
      skip_ws_and_comments(false);
      if (at_end()) fail("unterminated inline table");
      char c = get();
      if (c == '}') return v;
      if (c != ',') fail("expected ',' or '}' in inline table");
    }
  }

  std::string_view text_;
  std::string origin_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

ConfigValue parse_config_text(std::string_view text, const std::string& origin) {
  return ConfigParser(text, origin).parse();
}

ConfigValue parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace econsim
