#include <algorithm>
#include <vector>

#include "blechannel/detector.h"
#include "blechannel/rng.h"
#include "blechannel/simkit.h"
#include "doctest.h"
#include "oracles.h"

using namespace blechannel;
using namespace blechannel::detector;
using std::chrono::milliseconds;
using std::chrono::seconds;

namespace {

const Duration kTs = milliseconds(4096);
const Duration kTg = milliseconds(200);

int code(const Classification& c) {
  if (c.has_channel()) return c.channel().id();
  return c.reason() == UnclassifiedReason::kPreStart ? -1 : 0;
}

int classify_s(double delta_s) {
  return code(classify_time(from_seconds(delta_s), kTs, kTg));
}

PacketRecord packet(double t_s) {
  return PacketRecord{app_at(from_seconds(t_s)), "d", std::nullopt,
                      std::nullopt, std::nullopt};
}

}  // namespace

TEST_CASE("classify_time examples") {
  CHECK(classify_s(1.0) == 37);
  CHECK(classify_s(4.2) == 38);
  CHECK(classify_s(4.05) == 0);
  CHECK(classify_s(12.5) == 37);
  CHECK(classify_s(-0.001) == -1);
  CHECK(code(classify_time(Duration::zero(), kTs, Duration::zero())) == 37);
  // Border points with zero guard belong to the later slot.
  CHECK(code(classify_time(kTs, kTs, Duration::zero())) == 38);
  CHECK(code(classify_time(3 * kTs, kTs, Duration::zero())) == 37);
  // Guard borders themselves are inside the classified interval.
  CHECK(code(classify_time(milliseconds(100), kTs, kTg)) == 37);
  CHECK(code(classify_time(milliseconds(99), kTs, kTg)) == 0);
  CHECK(code(classify_time(kTs - milliseconds(100), kTs, kTg)) == 37);
  CHECK(code(classify_time(kTs - milliseconds(100) + Duration{1}, kTs, kTg)) ==
        0);
}

TEST_CASE("classify_time rejects invalid settings") {
  CHECK_THROWS_AS(classify_time(seconds(1), Duration::zero(), kTg),
                  ConfigError);
  CHECK_THROWS_AS(classify_time(seconds(1), kTs, milliseconds(-1)),
                  ConfigError);
  CHECK_THROWS_AS(classify_time(seconds(1), kTs, kTs), ConfigError);
}

TEST_CASE("classify_time matches the interval enumeration oracle") {
  Rng rng(2024);
  const std::int64_t intervals[] = {4'096'000'000, 5'000'000'000,
                                    5'120'000'000};
  const std::int64_t guards[] = {0, 100'000'000, 200'000'000, 500'000'000};
  for (int i = 0; i < 20000; ++i) {
    const std::int64_t T = intervals[rng.uniform_int(2)];
    const std::int64_t g = guards[rng.uniform_int(3)];
    std::int64_t delta;
    if (i % 4 == 0) {
      // Near a slot or guard border.
      const std::int64_t k = static_cast<std::int64_t>(rng.uniform_int(800));
      const std::int64_t edge = k * T + (rng.bernoulli(0.5) ? g / 2 : -g / 2);
      delta = std::max<std::int64_t>(
          0, edge + static_cast<std::int64_t>(rng.uniform_int(4)) - 2);
    } else {
      delta = static_cast<std::int64_t>(rng.uniform_int(3'600'000'000'000));
    }
    CAPTURE(delta);
    CAPTURE(T);
    CAPTURE(g);
    REQUIRE(code(classify_time(Duration{delta}, Duration{T}, Duration{g})) ==
            oracle::classify(delta, T, g));
  }
}

TEST_CASE("zero guard partitions time and positive guard removes exactly t_g") {
  // Small integer slots so every nanosecond can be enumerated.
  const Duration T{1000};
  for (std::int64_t g : {0, 2, 100, 998}) {
    CAPTURE(g);
    std::int64_t unclassified = 0;
    for (std::int64_t d = 3000; d < 4000; ++d) {
      const auto c = classify_time(Duration{d}, T, Duration{g});
      if (!c.has_channel()) {
        ++unclassified;
      } else {
        CHECK(c.channel().id() == 37 + (d / 1000) % 3);
      }
    }
    // Closed classified interval [g/2, T - g/2] holds T - g + 1 lattice
    // points, so the continuous guard measure g shows up as g - 1 points.
    CHECK(unclassified == std::max<std::int64_t>(0, g - 1));
  }
}

TEST_CASE("classify_time is invariant under a shift of three slots") {
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const Duration d{static_cast<std::int64_t>(rng.uniform_int(600'000'000'000))};
    REQUIRE(classify_time(d, kTs, kTg) == classify_time(d + 3 * kTs, kTs, kTg));
  }
}

TEST_CASE("session enters low latency on first signal") {
  DetectorSession s(DetectorConfig{});
  CHECK(s.mode() == Mode::kLowPower);
  const auto first = s.on_packet(packet(10.0));
  REQUIRE(std::holds_alternative<StateChange>(first));
  CHECK(std::get<StateChange>(first).kind == StateChange::Kind::kEnterLowLatency);
  CHECK(s.mode() == Mode::kLowLatency);
  REQUIRE(s.restart_time().has_value());
  CHECK(*s.restart_time() == app_at(from_seconds(10.0)));

  const auto next = s.on_packet(packet(11.0));
  REQUIRE(std::holds_alternative<ClassifiedPacket>(next));
  const auto& cp = std::get<ClassifiedPacket>(next);
  CHECK(cp.classification == Classification::channel(Channel(37)));
  CHECK(cp.since_restart == seconds(1));
  CHECK(s.counters().classified == 1);
}

TEST_CASE("session restarts after max scan time") {
  DetectorSession s(DetectorConfig{});
  s.restart(app_at(Duration::zero()));
  s.on_packet(packet(595.0));
  CHECK_FALSE(s.on_tick(app_at(from_seconds(599.0))).has_value());
  const auto change = s.on_tick(app_at(from_seconds(601.0)));
  REQUIRE(change.has_value());
  CHECK(change->kind == StateChange::Kind::kRestart);
  CHECK(*s.restart_time() == app_at(from_seconds(601.0)));
  // Origin moved: one second later is channel 37 again.
  const auto out = s.on_packet(packet(602.0));
  CHECK(std::get<ClassifiedPacket>(out).classification ==
        Classification::channel(Channel(37)));
}

TEST_CASE("session returns to low power when idle") {
  DetectorConfig cfg;
  cfg.idle_timeout = seconds(5);
  DetectorSession s(cfg);
  s.on_packet(packet(1.0));
  CHECK_FALSE(s.on_tick(app_at(from_seconds(5.5))).has_value());
  const auto change = s.on_tick(app_at(from_seconds(6.5)));
  REQUIRE(change.has_value());
  CHECK(change->kind == StateChange::Kind::kEnterLowPower);
  CHECK(s.mode() == Mode::kLowPower);
  CHECK(std::holds_alternative<StateChange>(s.on_packet(packet(7.0))));
}

TEST_CASE("session rejects time going backwards and flags pre-start packets") {
  DetectorSession s(DetectorConfig{});
  s.restart(app_at(from_seconds(5.0)));
  const auto pre = s.on_packet(packet(4.9));
  CHECK(std::get<ClassifiedPacket>(pre).classification ==
        Classification::unclassified(UnclassifiedReason::kPreStart));
  s.on_packet(packet(6.0));
  CHECK_THROWS_AS(s.on_packet(packet(5.5)), TraceOrderError);
}

TEST_CASE("detector config validation") {
  DetectorConfig cfg;
  cfg.max_scan_time = std::chrono::minutes(31);
  CHECK_THROWS_AS(DetectorSession{cfg}, ConfigError);
  cfg = DetectorConfig{};
  cfg.guard_time = kTs;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(DetectorConfig{}.effective_idle_timeout() == 3 * kTs);
}

namespace {

simkit::SimTrace simulate(const simkit::ScannerBehavior& behavior,
                          double drift, Duration duration, std::uint64_t seed) {
  using namespace simkit;
  const ScanSettings scan(kTs, kTs);
  std::vector<AdvertisingEvent> events;
  for (int i = 0; i < 4; ++i) {
    AdvertiserOptions opt;
    opt.transmitter_id = "adv" + std::to_string(i);
    opt.start_offset = milliseconds(23 * i);
    auto e = gen_advertising(AdvSettings(milliseconds(100)), duration,
                             derive_seed(seed, 1, i), opt);
    events.insert(events.end(), e.begin(), e.end());
  }
  const std::vector<RadioTime> restarts = {radio_at(Duration::zero())};
  const auto windows =
      gen_scan_windows(scan, behavior, restarts, duration, derive_seed(seed, 2));
  ClockModel clock;
  clock.drift_rate = drift;
  const auto stamps = stamp_restarts(clock, restarts, derive_seed(seed, 3));
  return simulate_reception(events, windows, clock, stamps, LossModel{},
                            derive_seed(seed, 4));
}

}  // namespace

TEST_CASE("compliant trace with zero drift is classified perfectly") {
  const auto sim =
      simulate(simkit::behavior::Compliant{}, 0.0, std::chrono::minutes(10), 3);
  const auto restarts = sim.restart_times();
  const auto out = classify_trace(sim.packets(), DetectorConfig{}, restarts);
  std::size_t classified = 0;
  for (const auto& p : out.packets) {
    REQUIRE(p.estimate.has_value());
    if (p.estimate->has_channel()) {
      ++classified;
      REQUIRE(p.estimate->channel() == *p.true_channel);
    }
  }
  CHECK(classified > 10000);
  CHECK(out.counters.classified == classified);
}

TEST_CASE("drift thresholds bound the first misclassification") {
  const double drift = 5e-3;
  const auto sim =
      simulate(simkit::behavior::Compliant{}, drift, std::chrono::minutes(10), 9);
  const auto out =
      classify_trace(sim.packets(), DetectorConfig{}, sim.restart_times());
  const double guard_onset = 0.1 / drift;
  const double mid_onset = (4.096 - 0.2) / (2 * drift);
  bool any_wrong = false;
  bool any_mid_wrong = false;
  for (std::size_t i = 0; i < out.packets.size(); ++i) {
    const auto& p = out.packets[i];
    if (!p.estimate->has_channel() || p.estimate->channel() == *p.true_channel)
      continue;
    any_wrong = true;
    const double elapsed = seconds_since_origin(p.recv_time);
    CHECK(elapsed >= guard_onset);
    // Offset of the radio reception within its slot.
    const double r = std::fmod(
        seconds_since_origin(sim.receptions[i].radio_time), 4.096);
    if (std::abs(r - 2.048) < 0.1) {
      any_mid_wrong = true;
      CHECK(elapsed >= mid_onset);
    }
  }
  CHECK(any_wrong);
  CHECK(any_mid_wrong);
}

TEST_CASE("rapid toggling is classified at chance level") {
  const auto sim = simulate(simkit::behavior::RapidToggle{}, 0.0,
                            std::chrono::minutes(10), 11);
  const auto out =
      classify_trace(sim.packets(), DetectorConfig{}, sim.restart_times());
  double n = 0, correct = 0;
  for (const auto& p : out.packets) {
    if (!p.estimate->has_channel()) continue;
    ++n;
    if (p.estimate->channel() == *p.true_channel) ++correct;
  }
  REQUIRE(n >= 3000);
  const double acc = correct / n;
  CHECK(std::abs(acc - 1.0 / 3.0) < 2 * oracle::ci95(1.0 / 3.0, n));
}

TEST_CASE("classify_trace without restart times follows the session cycle") {
  Trace trace;
  for (double t : {100.0, 101.0, 105.5, 300.0, 301.0}) trace.push_back(packet(t));
  const auto out = classify_trace(trace, DetectorConfig{});
  // 100 triggers low latency, 300 is after the idle timeout (12.288 s).
  REQUIRE(out.restarts.size() == 2);
  CHECK(out.restarts[0] == app_at(seconds(100)));
  CHECK(out.restarts[1] == app_at(seconds(300)));
  CHECK_FALSE(out.packets[0].estimate.has_value());
  CHECK(out.packets[1].estimate == Classification::channel(Channel(37)));
  CHECK(out.packets[2].estimate == Classification::channel(Channel(38)));
  CHECK_FALSE(out.packets[3].estimate.has_value());
  CHECK(out.packets[4].estimate == Classification::channel(Channel(37)));

  Trace unordered = {packet(2.0), packet(1.0)};
  CHECK_THROWS_AS(classify_trace(unordered, DetectorConfig{}), TraceOrderError);
}
