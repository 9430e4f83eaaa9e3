#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "blechannel/core.h"

namespace blechannel::detector {

// Android stops unfiltered scans after 30 minutes.
inline constexpr Duration kMaxScanTimeCap = std::chrono::minutes(30);

struct DetectorConfig {
  ScanSettings scan_settings{std::chrono::milliseconds(4096),
                             std::chrono::milliseconds(4096)};
  Duration guard_time = std::chrono::milliseconds(200);
  Duration max_scan_time = std::chrono::minutes(10);
  // Unset: three scan intervals.
  std::optional<Duration> idle_timeout;

  Duration effective_idle_timeout() const {
    return idle_timeout.value_or(3 * scan_settings.interval());
  }

  // Throws ConfigError unless 0 <= guard < T_s and 0 < max_scan_time <= 30 min.
  void validate() const;
};

// Maps the time elapsed since the scan (re)start onto a channel. Slot
// s = floor(delta / T_s) is scanned on channel 37 + (s mod 3); packets within
// guard/2 of either slot border, or before the start, are unclassified. Slots
// are half-open, so with zero guard a packet exactly on a border belongs to
// the later slot. Throws ConfigError for T_s <= 0, guard < 0 or guard >= T_s.
Classification classify_time(Duration delta, Duration scan_interval,
                             Duration guard_time);

enum class Mode { kLowPower, kLowLatency };

struct Counters {
  std::size_t classified = 0;
  std::size_t unclassified = 0;
  std::size_t restarts = 0;
};

struct StateChange {
  enum class Kind {
    // Presence detected in low-power mode; restarted in low-latency mode.
    kEnterLowLatency,
    // Max scan time exceeded; restarted to bound clock drift.
    kRestart,
    // No signal for the idle timeout; back to low-power presence detection.
    kEnterLowPower,
  };
  Kind kind;
  AppTime at;
};

struct ClassifiedPacket {
  Classification classification;
  Duration since_restart;
};

using PacketOutcome = std::variant<ClassifiedPacket, StateChange>;

// Single-owner state machine for one scanning device: low-power presence
// detection, then low-latency scanning with the restart instant as the
// classification origin.
class DetectorSession {
 public:
  // Starts in low-power mode. Throws ConfigError for an invalid config.
  explicit DetectorSession(DetectorConfig config);

  // Restart in low-latency mode at `now` from any state (an external restart
  // whose app timestamp is known).
  StateChange restart(AppTime now);

  // Throws TraceOrderError if recv_time precedes the previous packet.
  PacketOutcome on_packet(const PacketRecord& record);
  std::optional<StateChange> on_tick(AppTime now);

  Mode mode() const { return mode_; }
  std::optional<AppTime> restart_time() const { return restart_time_; }
  const Counters& counters() const { return counters_; }
  const DetectorConfig& config() const { return config_; }

 private:
  DetectorConfig config_;
  Mode mode_ = Mode::kLowPower;
  std::optional<AppTime> restart_time_;
  std::optional<AppTime> last_packet_;
  std::optional<AppTime> last_signal_;
  Counters counters_;
};

struct ClassifiedTrace {
  // Each packet carries its estimate; presence-detection packets have none.
  Trace packets;
  // App timestamps of every restart used as a classification origin.
  std::vector<AppTime> restarts;
  Counters counters;
};

// Runs a session over a time-ordered trace. With restart times, the session
// restarts at each one (applied before the first packet at or after it) and
// never falls back to low-power mode. Without, the session follows the
// low-power / low-latency cycle and restarts itself after max_scan_time.
// Throws TraceOrderError for an unordered trace or restart list.
ClassifiedTrace classify_trace(const Trace& trace, const DetectorConfig& config,
                               std::span<const AppTime> restart_times = {});

}  // namespace blechannel::detector
