#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace blechannel {

// All time values are integer nanoseconds. The smartphone (app) clock and the
// Bluetooth controller (radio) clock are distinct std::chrono clocks, so
// subtracting an AppTime from a RadioTime does not compile; conversions go
// through simkit::ClockModel.
using Duration = std::chrono::nanoseconds;

struct AppClock {
  using rep = std::int64_t;
  using period = std::nano;
  using duration = Duration;
  using time_point = std::chrono::time_point<AppClock, Duration>;
  static constexpr bool is_steady = true;
};

struct RadioClock {
  using rep = std::int64_t;
  using period = std::nano;
  using duration = Duration;
  using time_point = std::chrono::time_point<RadioClock, Duration>;
  static constexpr bool is_steady = true;
};

using AppTime = AppClock::time_point;
using RadioTime = RadioClock::time_point;

// Rounds to the nearest nanosecond.
inline Duration from_seconds(double s) {
  return Duration{static_cast<std::int64_t>(std::llround(s * 1e9))};
}

inline double to_seconds(Duration d) {
  return static_cast<double>(d.count()) / 1e9;
}

template <typename Clock>
constexpr typename Clock::time_point at_ns(std::int64_t ns) {
  return typename Clock::time_point{Duration{ns}};
}

inline AppTime app_at(Duration since_origin) { return AppTime{since_origin}; }
inline RadioTime radio_at(Duration since_origin) {
  return RadioTime{since_origin};
}

template <typename Clock>
double seconds_since_origin(std::chrono::time_point<Clock, Duration> t) {
  return to_seconds(t.time_since_epoch());
}

}  // namespace blechannel
