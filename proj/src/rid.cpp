#include "deriva/rid.hpp"

#include <algorithm>
#include <cstring>

namespace deriva {

const char kBase32Alphabet[33] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

static bool is_base32_char(char c) {
  return std::strchr(kBase32Alphabet, c) != nullptr && c != '\0';
}

std::string format_rid(const std::string& prefix, std::uint64_t counter) {
  std::string digits;
  do {
    digits.push_back(kBase32Alphabet[counter % 32]);
    counter /= 32;
  } while (counter != 0);
  while (digits.size() % 4 != 0) digits.push_back('0');
  std::reverse(digits.begin(), digits.end());

  std::string rid = prefix;
  for (std::size_t i = 0; i < digits.size(); i += 4) {
    rid.push_back('-');
    rid.append(digits, i, 4);
  }
  return rid;
}

bool looks_like_rid(const std::string& s) {
  std::size_t dash = s.find('-');
  if (dash == std::string::npos || dash == 0) return false;
  for (std::size_t i = 0; i < dash; ++i)
    if (!is_base32_char(s[i])) return false;
  std::size_t pos = dash;
  while (pos < s.size()) {
    if (s[pos] != '-') return false;
    if (s.size() - pos - 1 < 4) return false;
    for (std::size_t i = pos + 1; i < pos + 5; ++i)
      if (!is_base32_char(s[i])) return false;
    pos += 5;
  }
  return true;
}

bool rid_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::string base32_bytes(const unsigned char* data, std::size_t len,
                         std::size_t out_chars) {
  std::string out;
  out.reserve(out_chars);
  std::size_t bitpos = 0;
  while (out.size() < out_chars) {
    std::size_t byte = bitpos / 8;
    unsigned value = 0;
    if (byte < len) {
      unsigned hi = data[byte];
      unsigned lo = byte + 1 < len ? data[byte + 1] : 0;
      unsigned concat = (hi << 8) | lo;
      unsigned shift = 16 - 5 - (bitpos % 8);
      value = (concat >> shift) & 0x1f;
    }
    out.push_back(kBase32Alphabet[value]);
    bitpos += 5;
  }
  return out;
}

} // namespace deriva
