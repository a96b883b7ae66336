#include "focal/utf8.hpp"

#include <algorithm>
#include <stdexcept>

namespace focal::utf8 {
namespace {

// Length in bytes of the sequence starting at bytes[i], or 0 if malformed.
std::size_t sequence_length(std::string_view bytes, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(bytes[i]);
  std::size_t n;
  char32_t cp;
  if (b0 < 0x80) return 1;
  if ((b0 & 0xE0) == 0xC0) {
    n = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    n = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    n = 4;
    cp = b0 & 0x07;
  } else {
    return 0;
  }
  if (i + n > bytes.size()) return 0;
  for (std::size_t k = 1; k < n; ++k) {
    const auto b = static_cast<unsigned char>(bytes[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[n] || cp > 0x10FFFF) return 0;
  if (cp >= 0xD800 && cp <= 0xDFFF) return 0;
  return n;
}

}  // namespace

bool is_valid(std::string_view bytes) {
  for (std::size_t i = 0; i < bytes.size();) {
    const std::size_t n = sequence_length(bytes, i);
    if (n == 0) return false;
    i += n;
  }
  return true;
}

std::size_t length(std::string_view bytes) {
  // Count non-continuation bytes.
  return static_cast<std::size_t>(std::count_if(bytes.begin(), bytes.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

Text::Text(std::string_view bytes) : bytes_(bytes) {
  starts_.reserve(bytes.size() + 1);
  for (std::size_t i = 0; i < bytes.size();) {
    const std::size_t n = sequence_length(bytes, i);
    if (n == 0) throw std::invalid_argument("invalid UTF-8 at byte " + std::to_string(i));
    starts_.push_back(i);
    i += n;
  }
  starts_.push_back(bytes.size());
}

std::string_view Text::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, size());
  begin = std::min(begin, end);
  return bytes_.substr(starts_[begin], starts_[end] - starts_[begin]);
}

std::optional<std::size_t> Text::find(std::string_view needle, std::size_t begin,
                                      std::size_t end) const {
  if (needle.empty()) return std::nullopt;
  const std::string_view haystack = slice(begin, end);
  const std::size_t pos = haystack.find(needle);
  if (pos == std::string_view::npos) return std::nullopt;
  const std::size_t byte = starts_[std::min(begin, size())] + pos;
  // A valid needle only matches at a sequence boundary.
  const auto it = std::lower_bound(starts_.begin(), starts_.end(), byte);
  return static_cast<std::size_t>(it - starts_.begin());
}

}  // namespace focal::utf8
