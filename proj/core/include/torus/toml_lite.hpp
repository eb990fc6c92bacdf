#ifndef TORUS_TOML_LITE_HPP
#define TORUS_TOML_LITE_HPP

#include <map>
#include <string>
#include <vector>

namespace torus::toml {

// Minimal TOML subset: top-level key/value pairs and arrays of tables
// ([[name]] sections). Values are doubles, strings, or arrays of doubles.
// Enough for Hamiltonian spec files; malformed input throws ConfigError.
struct Value {
  enum class Kind { Number, String, Array } kind = Kind::Number;
  double num = 0;
  std::string str;
  std::vector<double> arr;
};

struct Table {
  std::map<std::string, Value> kv;

  bool has(const std::string& k) const { return kv.count(k) > 0; }
  double number(const std::string& k) const;
  double number_or(const std::string& k, double fallback) const;
  const std::string& string(const std::string& k) const;
  std::vector<double> array(const std::string& k) const;
  std::vector<int> int_array(const std::string& k) const;
};

struct Document {
  Table root;
  std::map<std::string, std::vector<Table>> table_arrays;
};

Document parse(const std::string& text);
Document parse_file(const std::string& path);

}  // namespace torus::toml

#endif
