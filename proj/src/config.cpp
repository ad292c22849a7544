#include "disc/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace disc::config {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

class Cursor {
 public:
  Cursor(std::string text, int line) : text_(std::move(text)), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Value value() {
    skip_space();
    if (pos_ >= text_.size()) fail(line_, "missing value");
    const char c = text_[pos_];
    if (c == '[') return array();
    if (c == '"') return string();
    return scalar();
  }

 private:
  Value array() {
    Value v;
    v.kind = Value::Kind::Array;
    v.line = line_;
    ++pos_;  // '['
    if (peek() == ']') {
      ++pos_;
      return v;
    }
    for (;;) {
      v.items.push_back(value());
      const char c = peek();
      if (c == ',') {
        ++pos_;
        if (peek() == ']') {  // trailing comma
          ++pos_;
          return v;
        }
        continue;
      }
      if (c == ']') {
        ++pos_;
        return v;
      }
      fail(line_, "expected ',' or ']' in array");
    }
  }

  Value string() {
    Value v;
    v.kind = Value::Kind::String;
    v.line = line_;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      v.text.push_back(text_[pos_++]);
    }
    if (pos_ >= text_.size()) fail(line_, "unterminated string");
    ++pos_;
    return v;
  }

  Value scalar() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    const std::string token = text_.substr(start, pos_ - start);
    Value v;
    v.line = line_;
    if (token == "true" || token == "false") {
      v.kind = Value::Kind::Bool;
      v.flag = token == "true";
      return v;
    }
    if (token == "inf" || token == "+inf") {
      v.number = HUGE_VAL;
      return v;
    }
    std::size_t used = 0;
    try {
      v.number = std::stod(token, &used);
    } catch (const std::exception&) {
      fail(line_, "cannot parse value '" + token + "'");
    }
    if (used != token.size()) fail(line_, "cannot parse value '" + token + "'");
    return v;
  }

  std::string text_;
  int line_;
  std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void type_error(const Value& v, const std::string& key, const char* expected) {
  fail(v.line, "'" + key + "' must be " + expected);
}

}  // namespace

double Value::as_number(const std::string& key) const {
  if (kind != Kind::Number) type_error(*this, key, "a number");
  return number;
}

int Value::as_int(const std::string& key) const {
  const double x = as_number(key);
  if (x != std::floor(x) || std::abs(x) > 2e9) type_error(*this, key, "an integer");
  return static_cast<int>(x);
}

const std::string& Value::as_string(const std::string& key) const {
  if (kind != Kind::String) type_error(*this, key, "a string");
  return text;
}

bool Value::as_bool(const std::string& key) const {
  if (kind != Kind::Bool) type_error(*this, key, "true or false");
  return flag;
}

std::vector<double> Value::as_numbers(const std::string& key) const {
  if (kind != Kind::Array) type_error(*this, key, "an array of numbers");
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.as_number(key));
  return out;
}

std::vector<std::vector<int>> Value::as_int_lists(const std::string& key) const {
  if (kind != Kind::Array) type_error(*this, key, "an array of integer arrays");
  std::vector<std::vector<int>> out;
  for (const auto& item : items) {
    if (item.kind != Kind::Array) type_error(item, key, "an array of integer arrays");
    std::vector<int> row;
    for (const auto& x : item.items) row.push_back(x.as_int(key));
    out.push_back(std::move(row));
  }
  return out;
}

Value parse_value(const std::string& text) {
  Cursor cur(text, 0);
  Value v = cur.value();
  if (!cur.done()) fail(0, "trailing characters after value '" + text + "'");
  return v;
}

Document parse(const std::string& text) {
  Document doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  // multi-line arrays are joined until brackets balance
  std::string pending;
  int pending_line = 0;
  int depth = 0;

  auto commit = [&](const std::string& entry, int line) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(entry.substr(0, eq));
    if (key.empty()) fail(line, "empty key");
    if (section.empty()) fail(line, "key '" + key + "' appears before any [section]");
    Cursor cur(entry.substr(eq + 1), line);
    Value v = cur.value();
    if (!cur.done()) fail(line, "trailing characters after value of '" + key + "'");
    auto& sec = doc[section];
    if (sec.count(key)) fail(line, "duplicate key '" + key + "' in [" + section + "]");
    sec.emplace(key, std::move(v));
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (depth > 0) {
      pending += ' ' + line;
    } else {
      if (line.empty()) continue;
      if (line.front() == '[' && line.find('=') == std::string::npos) {
        if (line.back() != ']') fail(line_no, "malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(line_no, "empty section name");
        if (doc.count(section)) fail(line_no, "duplicate section [" + section + "]");
        doc[section];
        continue;
      }
      pending = line;
      pending_line = line_no;
    }
    bool in_string = false;
    depth = 0;
    for (char c : pending) {
      if (c == '"') in_string = !in_string;
      if (in_string) continue;
      if (c == '[') ++depth;
      if (c == ']') --depth;
    }
    if (depth > 0) continue;
    commit(pending, pending_line);
    pending.clear();
    depth = 0;
  }
  if (depth > 0) fail(pending_line, "unterminated array");
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string to_text(const Value& value) {
  switch (value.kind) {
    case Value::Kind::Bool: return value.flag ? "true" : "false";
    case Value::Kind::String: return '"' + value.text + '"';
    case Value::Kind::Number: {
      if (std::isinf(value.number)) return "inf";
      std::ostringstream out;
      out.precision(17);
      out << value.number;
      return out.str();
    }
    case Value::Kind::Array: {
      std::string out = "[";
      for (std::size_t i = 0; i < value.items.size(); ++i) {
        if (i) out += ", ";
        out += to_text(value.items[i]);
      }
      return out + "]";
    }
  }
  return "";
}

}  // namespace disc::config
