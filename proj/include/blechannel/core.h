#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blechannel/errors.h"
#include "blechannel/time.h"

namespace blechannel {

// One of the three BLE advertising channels.
class Channel {
 public:
  // Throws ConfigError unless id is 37, 38 or 39.
  explicit Channel(int id);

  static Channel from_index(int index) { return Channel(37 + index); }
  static constexpr std::array<int, 3> kIds = {37, 38, 39};

  int id() const { return id_; }
  // 0, 1, 2 for 37, 38, 39.
  int index() const { return id_ - 37; }

  friend bool operator==(Channel a, Channel b) = default;

 private:
  int id_;
};

inline const std::array<Channel, 3>& all_channels() {
  static const std::array<Channel, 3> kAll = {Channel(37), Channel(38),
                                              Channel(39)};
  return kAll;
}

double channel_frequency(Channel c);
Channel next_channel(Channel c);

inline constexpr double kSpeedOfLight = 299792458.0;

class ScanSettings {
 public:
  // Throws ConfigError unless 0 < window <= interval.
  ScanSettings(Duration interval, Duration window);

  Duration interval() const { return interval_; }
  Duration window() const { return window_; }

  friend bool operator==(const ScanSettings&, const ScanSettings&) = default;

 private:
  Duration interval_;
  Duration window_;
};

class AdvSettings {
 public:
  static constexpr Duration kDefaultRhoMax = std::chrono::milliseconds(10);

  // Throws ConfigError unless base_interval > 0 and rho_max >= 0.
  explicit AdvSettings(Duration base_interval,
                       Duration rho_max = kDefaultRhoMax);

  Duration base_interval() const { return base_interval_; }
  Duration rho_max() const { return rho_max_; }

  friend bool operator==(const AdvSettings&, const AdvSettings&) = default;

 private:
  Duration base_interval_;
  Duration rho_max_;
};

// Android scan/advertise settings. kScanLegacyLowLatency is the older
// Android release that scans continuously with a 5 s interval.
enum class AndroidMode {
  kScanLowPower,
  kScanBalanced,
  kScanLowLatency,
  kAdvertiseLowPower,
  kAdvertiseBalanced,
  kAdvertiseLowLatency,
  kScanLegacyLowLatency,
};

using PresetSettings = std::variant<ScanSettings, AdvSettings>;

PresetSettings preset_settings(AndroidMode mode);
// Accepts the Android constant names, e.g. "SCAN_MODE_LOW_LATENCY", plus
// "SCAN_MODE_LEGACY_LOW_LATENCY". Throws ConfigError on unknown names.
PresetSettings preset_settings(std::string_view name);
AndroidMode parse_android_mode(std::string_view name);
std::string_view android_mode_name(AndroidMode mode);

ScanSettings scan_preset(AndroidMode mode);
AdvSettings adv_preset(AndroidMode mode);

enum class UnclassifiedReason { kGuardZone, kPreStart };

// Outcome of mapping a reception time onto a scan slot.
class Classification {
 public:
  static Classification channel(Channel c) { return Classification(c); }
  static Classification unclassified(UnclassifiedReason r) {
    return Classification(r);
  }

  bool has_channel() const { return channel_.has_value(); }
  // Throws std::bad_optional_access when unclassified.
  Channel channel() const { return channel_.value(); }
  std::optional<Channel> channel_or_none() const { return channel_; }
  UnclassifiedReason reason() const { return reason_; }

  friend bool operator==(const Classification&,
                         const Classification&) = default;

 private:
  explicit Classification(Channel c) : channel_(c) {}
  explicit Classification(UnclassifiedReason r) : reason_(r) {}

  std::optional<Channel> channel_;
  UnclassifiedReason reason_ = UnclassifiedReason::kGuardZone;
};

// One received beacon as seen by the app.
struct PacketRecord {
  AppTime recv_time;
  std::string device_id;
  std::optional<Channel> true_channel;
  std::optional<double> rssi_dbm;
  // Set by the detector; absent for packets that were only used to detect
  // presence (low-power phase) or were never classified.
  std::optional<Classification> estimate;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

using Trace = std::vector<PacketRecord>;

}  // namespace blechannel
