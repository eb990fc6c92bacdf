#include "torus/toml_lite.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "torus/errors.hpp"

namespace torus::toml {

namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Removes a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

double parse_number(const std::string& tok, int lineno) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigError("toml: bad number '" + tok + "' on line " +
                      std::to_string(lineno));
  return v;
}

Value parse_value(const std::string& raw, int lineno) {
  Value v;
  std::string s = strip(raw);
  if (s.empty()) throw ConfigError("toml: missing value on line " + std::to_string(lineno));
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw ConfigError("toml: unterminated string on line " + std::to_string(lineno));
    v.kind = Value::Kind::String;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']')
      throw ConfigError("toml: unterminated array on line " + std::to_string(lineno));
    v.kind = Value::Kind::Array;
    std::string body = s.substr(1, s.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = strip(item);
      if (item.empty()) continue;
      v.arr.push_back(parse_number(item, lineno));
    }
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::Number;
    v.num = (s == "true") ? 1 : 0;
    return v;
  }
  v.kind = Value::Kind::Number;
  v.num = parse_number(s, lineno);
  return v;
}

}  // namespace

double Table::number(const std::string& k) const {
  auto it = kv.find(k);
  if (it == kv.end() || it->second.kind != Value::Kind::Number)
    throw ConfigError("toml: missing numeric key '" + k + "'");
  return it->second.num;
}

double Table::number_or(const std::string& k, double fallback) const {
  auto it = kv.find(k);
  if (it == kv.end()) return fallback;
  if (it->second.kind != Value::Kind::Number)
    throw ConfigError("toml: key '" + k + "' is not a number");
  return it->second.num;
}

const std::string& Table::string(const std::string& k) const {
  auto it = kv.find(k);
  if (it == kv.end() || it->second.kind != Value::Kind::String)
    throw ConfigError("toml: missing string key '" + k + "'");
  return it->second.str;
}

std::vector<double> Table::array(const std::string& k) const {
  auto it = kv.find(k);
  if (it == kv.end() || it->second.kind != Value::Kind::Array)
    throw ConfigError("toml: missing array key '" + k + "'");
  return it->second.arr;
}

std::vector<int> Table::int_array(const std::string& k) const {
  std::vector<int> out;
  for (double v : array(k)) out.push_back(int(v));
  return out;
}

Document parse(const std::string& text) {
  Document doc;
  Table* current = &doc.root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(strip_comment(line));
    if (line.empty()) continue;
    if (line.rfind("[[", 0) == 0) {
      size_t close = line.find("]]");
      if (close == std::string::npos)
        throw ConfigError("toml: bad table header on line " + std::to_string(lineno));
      std::string name = strip(line.substr(2, close - 2));
      if (name.empty())
        throw ConfigError("toml: empty table name on line " + std::to_string(lineno));
      doc.table_arrays[name].emplace_back();
      current = &doc.table_arrays[name].back();
      continue;
    }
    if (line.front() == '[')
      throw ConfigError("toml: plain [table] sections unsupported, line " +
                        std::to_string(lineno));
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("toml: expected key = value on line " + std::to_string(lineno));
    std::string key = strip(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("toml: empty key on line " + std::to_string(lineno));
    current->kv[key] = parse_value(line.substr(eq + 1), lineno);
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("toml: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace torus::toml
