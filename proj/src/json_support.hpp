#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "foi/error.hpp"
#include "foi/vectorspace.hpp"

namespace foi::detail {

// Parses numbers with strtof so 32-bit payloads come back bit-exact.
using FloatJson = nlohmann::basic_json<std::map, std::vector, std::string, bool, std::int64_t,
                                       std::uint64_t, float>;
using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline std::string where(std::size_t line) { return "line " + std::to_string(line); }

template <class J>
const J& require_field(const J& obj, const char* field, std::size_t line) {
  if (!obj.is_object()) throw InputError(where(line) + ": expected a JSON object");
  auto it = obj.find(field);
  if (it == obj.end()) throw InputError(where(line) + ": missing field \"" + field + "\"");
  return *it;
}

template <class J>
std::uint64_t require_uint(const J& obj, const char* field, std::size_t line) {
  const J& v = require_field(obj, field, line);
  if (!v.is_number_unsigned()) {
    throw InputError(where(line) + ": field \"" + field + "\" must be a non-negative integer");
  }
  return v.template get<std::uint64_t>();
}

template <class J>
std::string require_string(const J& obj, const char* field, std::size_t line) {
  const J& v = require_field(obj, field, line);
  if (!v.is_string()) throw InputError(where(line) + ": field \"" + field + "\" must be a string");
  return v.template get<std::string>();
}

template <class J>
double require_number(const J& obj, const char* field, std::size_t line) {
  const J& v = require_field(obj, field, line);
  if (!v.is_number()) throw InputError(where(line) + ": field \"" + field + "\" must be a number");
  return v.template get<double>();
}

template <class J>
Embedding parse_embedding(const J& value, std::size_t expected_dim, std::size_t line,
                          const char* field = "embedding") {
  if (!value.is_array()) throw InputError(where(line) + ": field \"" + field + "\" must be an array");
  std::vector<float> values;
  values.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) {
      throw InputError(where(line) + ": field \"" + field + "\" must contain only numbers");
    }
    values.push_back(v.template get<float>());
  }
  if (values.size() != expected_dim) {
    throw InputError(where(line) + ": field \"" + field + "\" has dimension " +
                     std::to_string(values.size()) + ", expected " + std::to_string(expected_dim));
  }
  try {
    Embedding e(std::move(values));
    validate_embedding(e, expected_dim);
    return e;
  } catch (const InputError& err) {
    throw InputError(where(line) + ": field \"" + field + "\": " + err.what());
  }
}

template <class J>
J parse_line(const std::string& text, std::size_t line) {
  try {
    return J::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw InputError(where(line) + ": malformed JSON: " + err.what());
  }
}

}  // namespace foi::detail
