#include "blechannel/core.h"

#include <chrono>
#include <string>

namespace blechannel {

using std::chrono::milliseconds;

Channel::Channel(int id) : id_(id) {
  if (id < 37 || id > 39) {
    throw ConfigError("advertising channel must be 37, 38 or 39, got " +
                      std::to_string(id));
  }
}

double channel_frequency(Channel c) {
  switch (c.id()) {
    case 37:
      return 2.402e9;
    case 38:
      return 2.426e9;
    default:
      return 2.480e9;
  }
}

Channel next_channel(Channel c) { return Channel(c.id() == 39 ? 37 : c.id() + 1); }

ScanSettings::ScanSettings(Duration interval, Duration window)
    : interval_(interval), window_(window) {
  if (window <= Duration::zero() || window > interval) {
    throw ConfigError("scan settings require 0 < window <= interval");
  }
}

AdvSettings::AdvSettings(Duration base_interval, Duration rho_max)
    : base_interval_(base_interval), rho_max_(rho_max) {
  if (base_interval <= Duration::zero()) {
    throw ConfigError("advertising base interval must be positive");
  }
  if (rho_max < Duration::zero()) {
    throw ConfigError("advertising random delay bound must be non-negative");
  }
}

namespace {

struct ModeName {
  AndroidMode mode;
  std::string_view name;
};

constexpr ModeName kModeNames[] = {
    {AndroidMode::kScanLowPower, "SCAN_MODE_LOW_POWER"},
    {AndroidMode::kScanBalanced, "SCAN_MODE_BALANCED"},
    {AndroidMode::kScanLowLatency, "SCAN_MODE_LOW_LATENCY"},
    {AndroidMode::kAdvertiseLowPower, "ADVERTISE_MODE_LOW_POWER"},
    {AndroidMode::kAdvertiseBalanced, "ADVERTISE_MODE_BALANCED"},
    {AndroidMode::kAdvertiseLowLatency, "ADVERTISE_MODE_LOW_LATENCY"},
    {AndroidMode::kScanLegacyLowLatency, "SCAN_MODE_LEGACY_LOW_LATENCY"},
};

}  // namespace

PresetSettings preset_settings(AndroidMode mode) {
  switch (mode) {
    case AndroidMode::kScanLowPower:
      return ScanSettings(milliseconds(5120), milliseconds(512));
    case AndroidMode::kScanBalanced:
      return ScanSettings(milliseconds(4096), milliseconds(1024));
    case AndroidMode::kScanLowLatency:
      return ScanSettings(milliseconds(4096), milliseconds(4096));
    case AndroidMode::kScanLegacyLowLatency:
      return ScanSettings(milliseconds(5000), milliseconds(5000));
    case AndroidMode::kAdvertiseLowPower:
      return AdvSettings(milliseconds(1000));
    case AndroidMode::kAdvertiseBalanced:
      return AdvSettings(milliseconds(250));
    case AndroidMode::kAdvertiseLowLatency:
      return AdvSettings(milliseconds(100));
  }
  throw ConfigError("unknown Android mode");
}

PresetSettings preset_settings(std::string_view name) {
  return preset_settings(parse_android_mode(name));
}

AndroidMode parse_android_mode(std::string_view name) {
  for (const auto& m : kModeNames) {
    if (m.name == name) return m.mode;
  }
  throw ConfigError("unknown Android mode '" + std::string(name) + "'");
}

std::string_view android_mode_name(AndroidMode mode) {
  for (const auto& m : kModeNames) {
    if (m.mode == mode) return m.name;
  }
  return "?";
}

ScanSettings scan_preset(AndroidMode mode) {
  auto s = preset_settings(mode);
  if (auto* scan = std::get_if<ScanSettings>(&s)) return *scan;
  throw ConfigError(std::string(android_mode_name(mode)) +
                    " is not a scan mode");
}

AdvSettings adv_preset(AndroidMode mode) {
  auto s = preset_settings(mode);
  if (auto* adv = std::get_if<AdvSettings>(&s)) return *adv;
  throw ConfigError(std::string(android_mode_name(mode)) +
                    " is not an advertise mode");
}

}  // namespace blechannel
