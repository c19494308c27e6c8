#pragma once

#include <functional>
#include <string>

namespace deriva {

// Timestamps are canonical ISO-8601 UTC strings with microsecond precision,
// e.g. "2026-08-10T12:34:56.123456Z". Storing the rendered form keeps log
// replay and CSV export byte-stable.
using ClockFn = std::function<std::string()>;

// Wall clock, unless DERIVA_FIXED_TIME is set, in which case every reading
// returns that value (deterministic replays across processes).
std::string now_timestamp();

bool looks_like_timestamp(const std::string& s);

// Microseconds since epoch for a canonical timestamp (duration arithmetic).
std::int64_t timestamp_to_micros(const std::string& ts);

std::string micros_to_timestamp(std::int64_t micros);

} // namespace deriva
