#pragma once

#include <string>
#include <vector>

namespace deriva {

// RFC 4180 with fixed choices so exports are byte-deterministic: UTF-8,
// comma separators, "\n" record ends, fields quoted only when they contain
// a comma, quote, CR or LF.

std::string csv_escape(const std::string& field);
std::string csv_line(const std::vector<std::string>& fields);

// Parses a whole CSV document (quoted fields, embedded newlines). The final
// record may omit the trailing newline.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

} // namespace deriva
