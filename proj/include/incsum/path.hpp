#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "incsum/json.hpp"

namespace incsum {

// Dotted key paths rooted at `$`. Segments are object field names or map
// keys; indices, wildcards and recursive descent are deliberately not part
// of the language.
struct JsonPath {
  std::vector<std::string> segments;

  bool operator==(const JsonPath&) const = default;
};

struct PathParseError : std::runtime_error {
  std::size_t position;
  PathParseError(std::size_t pos, const std::string& what)
      : std::runtime_error("path parse error at " + std::to_string(pos) + ": " + what),
        position(pos) {}
};

namespace detail {

inline bool is_bare_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '&';
}

}  // namespace detail

// Accepts `$` followed by dot-separated segments, each either bare
// (letters, digits, `_`, `&`) or single-quoted with backslash escapes.
inline JsonPath parse_path(std::string_view text) {
  if (text.empty() || text[0] != '$') {
    throw PathParseError(0, "expected '$' root");
  }
  JsonPath path;
  std::size_t i = 1;
  while (i < text.size()) {
    if (text[i] != '.') {
      throw PathParseError(i, "expected '.' before segment");
    }
    ++i;
    if (i >= text.size()) {
      throw PathParseError(i, "trailing dot");
    }
    std::string segment;
    if (text[i] == '\'') {
      ++i;
      bool closed = false;
      while (i < text.size()) {
        char c = text[i];
        if (c == '\\') {
          if (i + 1 >= text.size()) {
            throw PathParseError(i, "dangling escape");
          }
          segment.push_back(text[i + 1]);
          i += 2;
        } else if (c == '\'') {
          ++i;
          closed = true;
          break;
        } else {
          segment.push_back(c);
          ++i;
        }
      }
      if (!closed) {
        throw PathParseError(text.size(), "unterminated quote");
      }
    } else {
      std::size_t start = i;
      while (i < text.size() && detail::is_bare_char(text[i])) {
        segment.push_back(text[i]);
        ++i;
      }
      if (segment.empty()) {
        if (text[i] == '[' || text[i] == '*') {
          throw PathParseError(i, "indices and wildcards are not supported");
        }
        throw PathParseError(start, "empty segment");
      }
      if (i < text.size() && text[i] == '[') {
        throw PathParseError(i, "indices and wildcards are not supported");
      }
      if (i < text.size() && text[i] != '.') {
        throw PathParseError(i, "unexpected character in segment");
      }
    }
    if (segment.empty()) {
      throw PathParseError(i, "empty segment");
    }
    path.segments.push_back(std::move(segment));
  }
  if (path.segments.empty()) {
    throw PathParseError(text.size(), "path has no segments");
  }
  return path;
}

// Canonical form: every segment single-quoted, quotes and backslashes escaped.
inline std::string render_path(const JsonPath& path) {
  std::string out = "$";
  for (const auto& segment : path.segments) {
    out += ".'";
    for (char c : segment) {
      if (c == '\'' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('\'');
  }
  return out;
}

inline std::string render_path(const std::vector<std::string>& segments) {
  return render_path(JsonPath{segments});
}

// Walks object fields / map keys by segment name. Returns nullptr when a
// segment is absent or the value at hand is not an object.
inline const Json* resolve(const Json& doc, const JsonPath& path) {
  const Json* cur = &doc;
  for (const auto& segment : path.segments) {
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(segment);
    if (it == cur->end()) return nullptr;
    cur = &*it;
  }
  return cur;
}

}  // namespace incsum
