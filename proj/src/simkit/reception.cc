#include <algorithm>
#include <cmath>

#include "blechannel/rng.h"
#include "blechannel/simkit.h"

namespace blechannel::simkit {

namespace {

constexpr std::uint64_t kJitterStream = 0x717;
constexpr std::uint64_t kLossStream = 0x1055;
constexpr std::uint64_t kFadingStream = 0xfade;

void check_drift(double drift_rate) {
  if (!std::isfinite(drift_rate) || drift_rate <= -1.0) {
    throw ConfigError("clock drift rate must be finite and > -1");
  }
}

}  // namespace

AppTime ClockModel::to_app(RadioTime t) const {
  check_drift(drift_rate);
  const long double scaled = static_cast<long double>(t.time_since_epoch().count()) /
                             (1.0L + static_cast<long double>(drift_rate));
  return app_at(initial_offset + Duration{std::llround(scaled)});
}

RadioTime ClockModel::to_radio(AppTime t) const {
  check_drift(drift_rate);
  const long double since =
      static_cast<long double>((t.time_since_epoch() - initial_offset).count());
  return radio_at(Duration{
      std::llround(since * (1.0L + static_cast<long double>(drift_rate)))});
}

std::vector<RestartStamp> stamp_restarts(const ClockModel& clock,
                                         std::span<const RadioTime> restarts,
                                         std::uint64_t seed) {
  if (clock.restart_jitter < Duration::zero()) {
    throw ConfigError("restart jitter must be non-negative");
  }
  Rng rng(derive_seed(seed, kJitterStream));
  std::vector<RestartStamp> out;
  out.reserve(restarts.size());
  for (RadioTime r : restarts) {
    const Duration delay = rng.uniform_duration(Duration::zero(), clock.restart_jitter);
    out.push_back(RestartStamp{r, clock.to_app(r) - delay});
  }
  return out;
}

Trace SimTrace::packets() const {
  Trace out;
  out.reserve(receptions.size());
  for (const auto& r : receptions) out.push_back(r.packet);
  return out;
}

std::vector<AppTime> SimTrace::restart_times() const {
  std::vector<AppTime> out;
  out.reserve(restarts.size());
  for (const auto& r : restarts) out.push_back(r.app_stamp);
  return out;
}

SimTrace simulate_reception(std::span<const AdvertisingEvent> events,
                            std::span<const ScanWindow> windows,
                            const ClockModel& clock,
                            std::span<const RestartStamp> restarts,
                            const LossModel& loss, std::uint64_t seed) {
  if (loss.drop_probability < 0.0 || loss.drop_probability > 1.0) {
    throw ConfigError("drop probability must lie in [0, 1]");
  }
  const bool windows_sorted = std::is_sorted(
      windows.begin(), windows.end(),
      [](const ScanWindow& a, const ScanWindow& b) { return a.start < b.start; });
  const bool restarts_sorted = std::is_sorted(
      restarts.begin(), restarts.end(),
      [](const RestartStamp& a, const RestartStamp& b) {
        return a.radio_start < b.radio_start;
      });
  if (!windows_sorted || !restarts_sorted) {
    throw TraceOrderError("simulate_reception: windows and restarts must be sorted");
  }

  // Radio instants from which the scanner is off until the next restart
  // resumes it.
  std::vector<RadioTime> off_from;
  off_from.reserve(restarts.size());
  for (const auto& r : restarts) off_from.push_back(clock.to_radio(r.app_stamp));

  Rng rng(derive_seed(seed, kLossStream));
  SimTrace trace;
  trace.restarts.assign(restarts.begin(), restarts.end());

  for (const auto& ev : events) {
    for (Channel c : all_channels()) {
      if (!ev.transmits_on(c)) continue;
      const RadioTime t = ev.packet_times[c.index()];

      auto w = std::upper_bound(
          windows.begin(), windows.end(), t,
          [](RadioTime v, const ScanWindow& sw) { return v < sw.start; });
      if (w == windows.begin()) continue;
      --w;
      if (!w->contains(t) || w->channel != c) continue;

      auto next_restart = std::upper_bound(
          restarts.begin(), restarts.end(), t,
          [](RadioTime v, const RestartStamp& r) { return v < r.radio_start; });
      if (next_restart != restarts.end() &&
          t >= off_from[static_cast<std::size_t>(next_restart - restarts.begin())]) {
        continue;
      }

      const bool blacked_out = std::any_of(
          loss.blackouts.begin(), loss.blackouts.end(),
          [t](const auto& b) { return t >= b.first && t < b.second; });
      if (blacked_out) continue;
      if (rng.bernoulli(loss.drop_probability)) continue;

      Reception rec;
      rec.packet.recv_time = clock.to_app(t);
      rec.packet.device_id = ev.transmitter_id;
      rec.packet.true_channel = c;
      rec.radio_time = t;
      rec.window = static_cast<std::size_t>(w - windows.begin());
      trace.receptions.push_back(std::move(rec));
    }
  }

  std::stable_sort(trace.receptions.begin(), trace.receptions.end(),
                   [](const Reception& a, const Reception& b) {
                     return a.packet.recv_time < b.packet.recv_time;
                   });
  return trace;
}

SimTrace attach_rssi(SimTrace trace, const ranging::RadioLink& link,
                     const FadingModel& fading, std::uint64_t seed) {
  if (!(link.distance_m > 0.0)) {
    throw DomainError("attach_rssi: distance must be positive");
  }
  if (fading.shadowing_sigma_db < 0.0) {
    throw ConfigError("attach_rssi: shadowing sigma must be non-negative");
  }
  std::array<double, 3> mean{};
  for (Channel c : all_channels()) {
    mean[c.index()] = ranging::friis_rx_power(link, c) +
                      fading.channel_offset_db[c.index()] + fading.bias_db;
  }

  Rng rng(derive_seed(seed, kFadingStream));
  for (auto& r : trace.receptions) {
    if (!r.packet.true_channel) continue;
    double v = rng.normal(mean[r.packet.true_channel->index()],
                          fading.shadowing_sigma_db);
    if (fading.quantize) v = std::round(v) + 0.0;  // no negative zero
    r.packet.rssi_dbm = v;
  }
  return trace;
}

}  // namespace blechannel::simkit
