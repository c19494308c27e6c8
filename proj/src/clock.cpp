#include "deriva/clock.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "deriva/errors.hpp"

namespace deriva {

std::string now_timestamp() {
  if (const char* fixed = std::getenv("DERIVA_FIXED_TIME")) {
    std::string ts = fixed;
    if (!looks_like_timestamp(ts))
      fail(ErrorKind::Validation, "bad_fixed_time",
           "DERIVA_FIXED_TIME is not a canonical timestamp: " + ts);
    return ts;
  }
  auto now = std::chrono::system_clock::now();
  auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                    now.time_since_epoch())
                    .count();
  return micros_to_timestamp(micros);
}

bool looks_like_timestamp(const std::string& s) {
  // YYYY-MM-DDTHH:MM:SS.ssssssZ
  if (s.size() != 27) return false;
  static const char* pattern = "dddd-dd-ddTdd:dd:dd.ddddddZ";
  for (std::size_t i = 0; i < s.size(); ++i) {
    char p = pattern[i];
    char c = s[i];
    if (p == 'd') {
      if (c < '0' || c > '9') return false;
    } else if (c != p) {
      return false;
    }
  }
  return true;
}

std::int64_t timestamp_to_micros(const std::string& ts) {
  if (!looks_like_timestamp(ts))
    fail(ErrorKind::Validation, "bad_timestamp", "not a timestamp: " + ts);
  std::tm tm{};
  tm.tm_year = std::atoi(ts.substr(0, 4).c_str()) - 1900;
  tm.tm_mon = std::atoi(ts.substr(5, 2).c_str()) - 1;
  tm.tm_mday = std::atoi(ts.substr(8, 2).c_str());
  tm.tm_hour = std::atoi(ts.substr(11, 2).c_str());
  tm.tm_min = std::atoi(ts.substr(14, 2).c_str());
  tm.tm_sec = std::atoi(ts.substr(17, 2).c_str());
  std::int64_t secs = timegm(&tm);
  std::int64_t micros = std::atoll(ts.substr(20, 6).c_str());
  return secs * 1000000 + micros;
}

std::string micros_to_timestamp(std::int64_t micros) {
  std::time_t secs = static_cast<std::time_t>(micros / 1000000);
  int frac = static_cast<int>(micros % 1000000);
  if (frac < 0) {
    frac += 1000000;
    secs -= 1;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, frac);
  return buf;
}

} // namespace deriva
