#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace diffspace {

/// A JSON value for command reports. Objects keep keys in insertion order so
/// a report prints byte-identically run after run. Integers and doubles are
/// kept apart: integers always print as integers, doubles print with 10
/// significant digits, or as quoted hexadecimal float literals when the
/// printer runs in hex mode (bit-exact regression form).
class Json {
 public:
  enum class Kind { Null, Bool, Int, Double, String, Array, Object };

  Json() = default;
  static Json boolean(bool v);
  static Json integer(long long v);
  static Json number(double v);
  static Json str(std::string v);
  static Json array();
  static Json object();

  Kind kind() const { return kind_; }
  bool as_bool() const { return bool_; }
  long long as_int() const { return int_; }
  double as_double() const { return double_; }
  const std::string& as_string() const { return string_; }
  const std::vector<Json>& items() const { return items_; }
  const std::vector<std::pair<std::string, Json>>& fields() const { return fields_; }

  /// Appends to an array value.
  Json& push(Json v);
  /// Appends a key to an object value (keys are not deduplicated; callers
  /// set each key once).
  Json& set(std::string key, Json v);

  /// Single-line canonical rendering.
  std::string print(bool hex_floats = false) const;

 private:
  Kind kind_ = Kind::Null;
  bool bool_ = false;
  long long int_ = 0;
  double double_ = 0.0;
  std::string string_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> fields_;
};

}  // namespace diffspace
