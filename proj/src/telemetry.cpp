#include "pvprof/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int value = 0;
  if (pos + len > text.size()) throw DataError("malformed timestamp '" + std::string(whole) + "'");
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
  if (ec != std::errc() || ptr != text.data() + pos + len)
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  return value;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) throw DataError("malformed timestamp '" + std::string(whole) + "'");
}

}  // namespace

Day parse_day(std::string_view text) {
  using namespace std::chrono;
  const int y = parse_int(text, 0, 4, text);
  expect(text, 4, '-', text);
  const int m = parse_int(text, 5, 2, text);
  expect(text, 7, '-', text);
  const int d = parse_int(text, 8, 2, text);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
  return sys_days{ymd};
}

Instant parse_instant(std::string_view text) {
  using namespace std::chrono;
  const Day d = parse_day(text.substr(0, std::min<std::size_t>(10, text.size())));
  if (text.size() == 10) return Instant{d};
  if (text.size() < 19 || (text[10] != 'T' && text[10] != ' '))
    throw DataError("malformed timestamp '" + std::string(text) + "'");
  const int hh = parse_int(text, 11, 2, text);
  expect(text, 13, ':', text);
  const int mm = parse_int(text, 14, 2, text);
  expect(text, 16, ':', text);
  const int ss = parse_int(text, 17, 2, text);
  if (hh > 23 || mm > 59 || ss > 59) throw DataError("time of day out of range in '" + std::string(text) + "'");
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  std::string_view zone = text.substr(pos);
  if (!(zone.empty() || zone == "Z" || zone == "+00:00" || zone == "+0000"))
    throw DataError("only UTC timestamps are supported: '" + std::string(text) + "'");
  return Instant{d} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_day(Day d) {
  using namespace std::chrono;
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_instant(Instant t) {
  using namespace std::chrono;
  const Day d = floor<days>(t);
  const auto tod = t - Instant{d};
  const long long secs = tod.count();
  char buf[40];
  std::snprintf(buf, sizeof buf, "T%02lld:%02lld:%02lldZ", secs / 3600, (secs / 60) % 60, secs % 60);
  return format_day(d) + buf;
}

Day day_of(Instant t) { return std::chrono::floor<std::chrono::days>(t); }

double hour_of_day(Instant t) {
  return static_cast<double>((t - Instant{day_of(t)}).count()) / 3600.0;
}

std::string record_problem(const TelemetryRecord& r) {
  if (!std::isfinite(r.g_poa) || !std::isfinite(r.t_module) || !std::isfinite(r.v_dc) || !std::isfinite(r.i_dc))
    return "non-finite field";
  if (r.g_poa < 0.0) return "negative g_poa";
  if (r.v_dc < 0.0) return "negative v_dc";
  return {};
}

void validate_series(std::span<const TelemetryRecord> series) {
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (auto why = record_problem(series[k]); !why.empty())
      throw DataError("record " + std::to_string(k) + " (" + format_instant(series[k].timestamp) + "): " + why);
    if (k > 0 && series[k].timestamp <= series[k - 1].timestamp)
      throw DataError("timestamps not strictly increasing at " + format_instant(series[k].timestamp));
  }
}

std::span<const TelemetryRecord> slice(std::span<const TelemetryRecord> series, Instant begin, Instant end) {
  auto lo = std::lower_bound(series.begin(), series.end(), begin,
                             [](const TelemetryRecord& r, Instant t) { return r.timestamp < t; });
  auto hi = std::lower_bound(lo, series.end(), end,
                             [](const TelemetryRecord& r, Instant t) { return r.timestamp < t; });
  return {lo, hi};
}

std::vector<Day> days_in(std::span<const TelemetryRecord> series) {
  std::vector<Day> out;
  for (const auto& r : series) {
    const Day d = day_of(r.timestamp);
    if (out.empty() || out.back() != d) out.push_back(d);
  }
  return out;
}

}  // namespace pvprof
