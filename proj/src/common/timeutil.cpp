#include "common/timeutil.hpp"

#include <cstdio>

namespace lotwatch {

using namespace std::chrono;

std::string format_iso8601(Timestamp t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  auto digits = [&](std::size_t pos, std::size_t n) -> std::optional<int> {
    if (pos + n > text.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  const auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2);
  if (!y || !mo || !d) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp t = sys_days{ymd};
  if (text.size() == 10) return t;

  if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
  const auto h = digits(11, 2), mi = digits(14, 2), s = digits(17, 2);
  if (!h || !mi || !s || text.size() < 19 || text[13] != ':' || text[16] != ':')
    return std::nullopt;
  if (*h > 23 || *mi > 59 || *s > 60) return std::nullopt;
  const std::string_view rest = text.substr(19);
  if (!rest.empty() && rest != "Z") return std::nullopt;
  return t + hours{*h} + minutes{*mi} + seconds{*s};
}

Timestamp now_utc() { return floor<seconds>(system_clock::now()); }

}  // namespace lotwatch
