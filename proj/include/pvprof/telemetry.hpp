#pragma once

#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pvprof {

using Instant = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;

// One timestamped sample of weather and DC measurements (array level).
struct TelemetryRecord {
  Instant timestamp{};
  double g_poa = 0.0;     // W/m^2
  double t_module = 0.0;  // C
  double v_dc = 0.0;      // V
  double i_dc = 0.0;      // A

  double power() const { return v_dc * i_dc; }
  bool operator==(const TelemetryRecord&) const = default;
};

using TelemetrySeries = std::vector<TelemetryRecord>;

// Accepts "YYYY-MM-DDTHH:MM:SS" with optional fractional seconds and an
// optional "Z" or "+00:00" suffix; a space may replace the 'T'.
Instant parse_instant(std::string_view text);
std::string format_instant(Instant t);  // YYYY-MM-DDTHH:MM:SSZ
std::string format_day(Day d);          // YYYY-MM-DD
Day parse_day(std::string_view text);

Day day_of(Instant t);
double hour_of_day(Instant t);  // [0, 24)

// Throws DataError unless timestamps strictly increase and all fields are
// finite with g_poa >= 0 and v_dc >= 0.
void validate_series(std::span<const TelemetryRecord> series);
// Message for the first violated invariant of a single record, empty if valid.
std::string record_problem(const TelemetryRecord& r);

// Records whose timestamp lies in [begin, end).
std::span<const TelemetryRecord> slice(std::span<const TelemetryRecord> series, Instant begin, Instant end);

// Distinct calendar days present in the series, ascending.
std::vector<Day> days_in(std::span<const TelemetryRecord> series);

}  // namespace pvprof
