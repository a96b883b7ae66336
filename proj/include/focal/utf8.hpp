#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace focal::utf8 {

// Returns true iff `bytes` is well-formed UTF-8 (no overlongs, no surrogates).
bool is_valid(std::string_view bytes);

// Number of code points. Precondition: is_valid(bytes).
std::size_t length(std::string_view bytes);

// Code-point indexed view over a UTF-8 string. Offsets passed in and
// returned are code-point offsets; the view keeps a byte-offset table.
class Text {
 public:
  explicit Text(std::string_view bytes);

  std::size_t size() const { return starts_.size() - 1; }
  std::size_t byte_offset(std::size_t cp) const { return starts_.at(cp); }

  // Bytes of the half-open code-point range [begin, end), clamped to size().
  std::string_view slice(std::size_t begin, std::size_t end) const;

  // Code-point offset of the first occurrence of `needle` at or after `begin`
  // and ending at or before `end`. Empty needles never match.
  std::optional<std::size_t> find(std::string_view needle, std::size_t begin,
                                  std::size_t end) const;

 private:
  std::string_view bytes_;
  std::vector<std::size_t> starts_;
};

}  // namespace focal::utf8
