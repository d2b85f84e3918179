#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "pinchlab/errors.hpp"

namespace pinchlab::detail {

// 1-based line and column of a byte offset.
inline void locate(std::string_view text, std::size_t offset, int& line, int& column) {
  line = 1;
  column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
}

inline nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    int line = 0, column = 0;
    // byte is the 1-based position of the offending character
    locate(text, e.byte == 0 ? 0 : e.byte - 1, line, column);
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + e.what(),
                     line, column);
  }
}

template <class T>
T field(const nlohmann::json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string(where) + ": missing field \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string(where) + ": field \"" + key + "\" has the wrong type");
  }
}

}  // namespace pinchlab::detail
