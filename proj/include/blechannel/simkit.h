#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "blechannel/core.h"
#include "blechannel/ranging.h"

namespace blechannel::simkit {

// One burst of three beacons, sent on 37, 38 and 39 in that order.
struct AdvertisingEvent {
  std::int64_t event_index = 0;
  std::array<RadioTime, 3> packet_times{};
  std::string transmitter_id;
  // Bit i set: the beacon on channel 37 + i is actually transmitted.
  std::uint8_t channel_map = 0b111;

  bool transmits_on(Channel c) const {
    return (channel_map >> c.index()) & 1U;
  }
};

struct AdvertiserOptions {
  std::string transmitter_id = "adv0";
  Duration intra_event_gap = std::chrono::milliseconds(1);
  // Time of the first event.
  Duration start_offset = Duration::zero();
  std::uint8_t channel_map = 0b111;
};

// Events at start_offset, then gaps of base_interval + U[0, rho_max], covering
// [0, duration).
std::vector<AdvertisingEvent> gen_advertising(
    const AdvSettings& settings, Duration duration, std::uint64_t seed,
    const AdvertiserOptions& options = {});

struct ScanWindow {
  RadioTime start;
  Duration duration;
  Channel channel;
  std::int64_t window_index = 0;
  // Index of the (re)start this window belongs to.
  std::size_t segment = 0;

  RadioTime end() const { return start + duration; }
  // Half-open: [start, start + duration).
  bool contains(RadioTime t) const { return t >= start && t < end(); }
};

namespace behavior {

// Starts on 37 after every (re)start and toggles 37 -> 38 -> 39 per window.
struct Compliant {};

// Irregular scanning for an offset t_o after each start, then the compliant
// pattern anchored at start + t_o. t_o is drawn uniformly from
// [offset_min, offset_max]; an unset offset_max means 2 * scan interval.
struct BalancedOffset {
  Duration offset_min = Duration::zero();
  std::optional<Duration> offset_max;
};

// Compliant pattern with a device-specific scan interval. An unset window
// means continuous scanning (window == interval).
struct AltInterval {
  Duration interval = std::chrono::seconds(5);
  std::optional<Duration> window;
};

// Back-to-back short windows of random length on uniformly random channels.
struct RapidToggle {
  Duration min_window = std::chrono::milliseconds(100);
  Duration max_window = std::chrono::milliseconds(200);
};

// Toggles after every window but not in 37/38/39 order, and does not reset to
// 37 on restart. With an empty sequence each next channel is drawn uniformly
// from the two channels other than the current one; otherwise the sequence is
// cycled with its position carried across restarts.
struct NonStandardOrder {
  std::vector<Channel> sequence;
};

// Round-robin order, but a restart resumes on the channel that was being
// scanned when scanning stopped.
struct ContinueChannel {
  Channel initial = Channel(37);
};

}  // namespace behavior

using ScannerBehavior =
    std::variant<behavior::Compliant, behavior::BalancedOffset,
                 behavior::AltInterval, behavior::RapidToggle,
                 behavior::NonStandardOrder, behavior::ContinueChannel>;

// Short tag used in trace headers and on the command line, e.g. "compliant".
std::string_view behavior_tag(const ScannerBehavior& b);
// Behavior with default parameters for a tag. Throws ConfigError.
ScannerBehavior behavior_from_tag(std::string_view tag);

// Windows from each restart until the next restart (or duration). A window
// that would run into the next restart is truncated there, so windows never
// overlap. An empty restart list means a single start at radio time 0.
std::vector<ScanWindow> gen_scan_windows(const ScanSettings& settings,
                                         const ScannerBehavior& behavior,
                                         std::span<const RadioTime> restarts,
                                         Duration duration, std::uint64_t seed);

// Affine mapping between radio and app clocks:
//   app = initial_offset + radio / (1 + drift_rate)
// At every restart the app stamps the restart slightly before the radio
// resumes scanning; the delay is drawn from U[0, restart_jitter] per restart.
struct ClockModel {
  double drift_rate = 0.0;
  Duration restart_jitter = Duration::zero();
  Duration initial_offset = Duration::zero();

  AppTime to_app(RadioTime t) const;
  RadioTime to_radio(AppTime t) const;
};

struct RestartStamp {
  RadioTime radio_start;
  // What the app records as the restart instant.
  AppTime app_stamp;
};

std::vector<RestartStamp> stamp_restarts(const ClockModel& clock,
                                         std::span<const RadioTime> restarts,
                                         std::uint64_t seed);

struct LossModel {
  double drop_probability = 0.0;
  // Radio-clock intervals [first, second) during which nothing is received.
  std::vector<std::pair<RadioTime, RadioTime>> blackouts;
};

struct Reception {
  PacketRecord packet;
  RadioTime radio_time;
  std::size_t window = 0;
};

struct SimTrace {
  std::vector<Reception> receptions;
  std::vector<RestartStamp> restarts;

  Trace packets() const;
  std::vector<AppTime> restart_times() const;
};

// A beacon is received iff it is sent inside a window on its channel, outside
// the gap between a restart's app stamp and the radio resuming, and survives
// the loss model. Receptions are ordered by app time.
SimTrace simulate_reception(std::span<const AdvertisingEvent> events,
                            std::span<const ScanWindow> windows,
                            const ClockModel& clock,
                            std::span<const RestartStamp> restarts,
                            const LossModel& loss, std::uint64_t seed);

struct FadingModel {
  std::array<double, 3> channel_offset_db{0.0, 0.0, 0.0};
  // Constant bias on every packet, e.g. body shadowing or RSSI calibration
  // error.
  double bias_db = 0.0;
  double shadowing_sigma_db = 0.0;
  bool quantize = true;
};

// Throws DomainError for a non-positive distance.
SimTrace attach_rssi(SimTrace trace, const ranging::RadioLink& link,
                     const FadingModel& fading, std::uint64_t seed);

}  // namespace blechannel::simkit
