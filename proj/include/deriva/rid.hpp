#pragma once

#include <cstdint>
#include <string>

namespace deriva {

// RIDs are catalog-assigned identifiers in Crockford-style base-32 (no
// I, L, O, U): `<prefix>-XXXX[-XXXX...]`. The numeric payload is the value
// of a persistent per-catalog counter, so creation order is total.
extern const char kBase32Alphabet[33];

// Encode `counter` as dash-separated groups of four base-32 digits.
std::string format_rid(const std::string& prefix, std::uint64_t counter);

// True when `s` matches `[0-9A-Z]+(-[0-9A-Z]{4})+` over the base-32 alphabet.
bool looks_like_rid(const std::string& s);

// Creation-order comparator: shorter RIDs were assigned earlier; equal-length
// RIDs compare lexicographically (the alphabet is ASCII-ordered).
bool rid_less(const std::string& a, const std::string& b);

// Raw base-32 rendering of arbitrary bytes (used for minid tokens).
std::string base32_bytes(const unsigned char* data, std::size_t len,
                         std::size_t out_chars);

} // namespace deriva
