#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "uavirl/errors.hpp"

namespace uavirl::detail {

using ojson = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Accepts a decimal string or a JSON number.
inline double parse_double(const ojson& j, const char* field) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw CorruptRecordError(std::string("field '") + field + "' is not a number: " + s);
    }
    if (used != s.size()) throw CorruptRecordError(std::string("field '") + field + "' has trailing characters");
    return v;
  }
  if (j.is_number()) return j.get<double>();
  throw CorruptRecordError(std::string("field '") + field + "' must be a number");
}

inline const ojson& require(const ojson& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) throw CorruptRecordError(std::string("missing field '") + field + "'");
  return j.at(field);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
  if (!out) throw ConfigError("write failed for " + path);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace uavirl::detail
