#include "diffspace/report.hpp"

#include <cstdio>

#include "diffspace/format.hpp"

namespace diffspace {

Json Json::boolean(bool v) {
  Json j;
  j.kind_ = Kind::Bool;
  j.bool_ = v;
  return j;
}

Json Json::integer(long long v) {
  Json j;
  j.kind_ = Kind::Int;
  j.int_ = v;
  return j;
}

Json Json::number(double v) {
  Json j;
  j.kind_ = Kind::Double;
  j.double_ = v;
  return j;
}

Json Json::str(std::string v) {
  Json j;
  j.kind_ = Kind::String;
  j.string_ = std::move(v);
  return j;
}

Json Json::array() {
  Json j;
  j.kind_ = Kind::Array;
  return j;
}

Json Json::object() {
  Json j;
  j.kind_ = Kind::Object;
  return j;
}

Json& Json::push(Json v) {
  items_.push_back(std::move(v));
  return *this;
}

Json& Json::set(std::string key, Json v) {
  fields_.emplace_back(std::move(key), std::move(v));
  return *this;
}

namespace {

void escape_into(const std::string& s, std::string& out) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void print_into(const Json& j, bool hex, std::string& out) {
  switch (j.kind()) {
    case Json::Kind::Null:
      out += "null";
      return;
    case Json::Kind::Bool:
      out += j.as_bool() ? "true" : "false";
      return;
    case Json::Kind::Int:
      out += std::to_string(j.as_int());
      return;
    case Json::Kind::Double:
      if (hex) {
        escape_into(fmt_hex(j.as_double()), out);
      } else {
        out += fmt_g(j.as_double(), 10);
      }
      return;
    case Json::Kind::String:
      escape_into(j.as_string(), out);
      return;
    case Json::Kind::Array: {
      out += '[';
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) out += ',';
        first = false;
        print_into(item, hex, out);
      }
      out += ']';
      return;
    }
    case Json::Kind::Object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.fields()) {
        if (!first) out += ',';
        first = false;
        escape_into(key, out);
        out += ':';
        print_into(value, hex, out);
      }
      out += '}';
      return;
    }
  }
}

}  // namespace

std::string Json::print(bool hex_floats) const {
  std::string out;
  print_into(*this, hex_floats, out);
  return out;
}

}  // namespace diffspace
