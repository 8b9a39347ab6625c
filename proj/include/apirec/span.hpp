// Source spans shared by the parser, program graph and extraction records.
#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace apirec {

// Lines are 1-based, columns 0-based (editor convention). Byte offsets are
// into the UTF-8 buffer and are what downstream analyses index with.
struct Span {
  int start_line = 0;
  int start_col = 0;
  int end_line = 0;
  int end_col = 0;
  uint32_t start_byte = 0;
  uint32_t end_byte = 0;

  auto operator<=>(const Span&) const = default;
};

inline std::string to_string(const Span& s) {
  return std::to_string(s.start_line) + ":" + std::to_string(s.start_col) +
         "-" + std::to_string(s.end_line) + ":" + std::to_string(s.end_col);
}

}  // namespace apirec
