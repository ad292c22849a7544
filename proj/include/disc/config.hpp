#pragma once

// Reader for the TOML subset used by run configs: [section] headers, key = value,
// '#' comments, numbers, booleans, double-quoted strings and (nested) arrays.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace disc::config {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Value {
  enum class Kind { Number, String, Bool, Array };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string text;
  bool flag = false;
  std::vector<Value> items;
  int line = 0;

  double as_number(const std::string& key) const;
  int as_int(const std::string& key) const;
  const std::string& as_string(const std::string& key) const;
  bool as_bool(const std::string& key) const;
  std::vector<double> as_numbers(const std::string& key) const;
  std::vector<std::vector<int>> as_int_lists(const std::string& key) const;
};

using Section = std::map<std::string, Value>;
using Document = std::map<std::string, Section>;

Document parse(const std::string& text);
Document parse_file(const std::string& path);

/// Renders a value back in config syntax (used for sweep overrides and echoing).
std::string to_text(const Value& value);

/// Parses a single right-hand side, e.g. "0.3" or "[1, 2]".
Value parse_value(const std::string& text);

}  // namespace disc::config
