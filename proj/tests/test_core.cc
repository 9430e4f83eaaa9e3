#include <concepts>
#include <variant>

#include "blechannel/core.h"
#include "blechannel/rng.h"
#include "blechannel/text.h"
#include "doctest.h"

using namespace blechannel;
using std::chrono::milliseconds;

namespace {

template <typename A, typename B>
concept Subtractable = requires(A a, B b) { a - b; };

}  // namespace

static_assert(Subtractable<AppTime, AppTime>);
static_assert(!Subtractable<AppTime, RadioTime>);
static_assert(!Subtractable<RadioTime, AppTime>);

TEST_CASE("channel ids and frequencies") {
  CHECK(channel_frequency(Channel(37)) == 2.402e9);
  CHECK(channel_frequency(Channel(38)) == 2.426e9);
  CHECK(channel_frequency(Channel(39)) == 2.480e9);
  CHECK(channel_frequency(Channel(37)) < channel_frequency(Channel(38)));
  CHECK(channel_frequency(Channel(38)) < channel_frequency(Channel(39)));

  CHECK_THROWS_AS(Channel(36), ConfigError);
  CHECK_THROWS_AS(Channel(40), ConfigError);
  CHECK_THROWS_AS(Channel(0), ConfigError);
  for (int i = 0; i < 3; ++i) CHECK(Channel::from_index(i).index() == i);
}

TEST_CASE("next_channel is round robin with period 3") {
  CHECK(next_channel(Channel(37)) == Channel(38));
  CHECK(next_channel(Channel(38)) == Channel(39));
  CHECK(next_channel(Channel(39)) == Channel(37));
  for (Channel c : all_channels()) {
    CHECK(next_channel(c) != c);
    CHECK(next_channel(next_channel(c)) != c);
    CHECK(next_channel(next_channel(next_channel(c))) == c);
  }
}

TEST_CASE("settings validation") {
  CHECK_NOTHROW(ScanSettings(milliseconds(4096), milliseconds(4096)));
  CHECK_THROWS_AS(ScanSettings(milliseconds(4096), milliseconds(5000)),
                  ConfigError);
  CHECK_THROWS_AS(ScanSettings(milliseconds(4096), milliseconds(0)),
                  ConfigError);
  CHECK_THROWS_AS(ScanSettings(milliseconds(0), milliseconds(0)), ConfigError);
  CHECK_THROWS_AS(AdvSettings(milliseconds(0)), ConfigError);
  CHECK_THROWS_AS(AdvSettings(milliseconds(100), milliseconds(-1)),
                  ConfigError);
  CHECK(AdvSettings(milliseconds(100)).rho_max() == milliseconds(10));
}

TEST_CASE("android presets match the published table") {
  struct Row {
    const char* name;
    long long interval_ms;
    long long window_ms;  // 0 for advertising modes
  };
  const Row table[] = {
      {"SCAN_MODE_LOW_POWER", 5120, 512},
      {"SCAN_MODE_BALANCED", 4096, 1024},
      {"SCAN_MODE_LOW_LATENCY", 4096, 4096},
      {"ADVERTISE_MODE_LOW_POWER", 1000, 0},
      {"ADVERTISE_MODE_BALANCED", 250, 0},
      {"ADVERTISE_MODE_LOW_LATENCY", 100, 0},
      {"SCAN_MODE_LEGACY_LOW_LATENCY", 5000, 5000},
  };
  for (const Row& row : table) {
    CAPTURE(row.name);
    const PresetSettings p = preset_settings(row.name);
    if (row.window_ms > 0) {
      const auto& s = std::get<ScanSettings>(p);
      CHECK(s.interval() == milliseconds(row.interval_ms));
      CHECK(s.window() == milliseconds(row.window_ms));
    } else {
      const auto& a = std::get<AdvSettings>(p);
      CHECK(a.base_interval() == milliseconds(row.interval_ms));
    }
    const AndroidMode mode = parse_android_mode(row.name);
    CHECK(android_mode_name(mode) == row.name);
    CHECK(preset_settings(mode) == p);
  }
  CHECK_THROWS_AS(preset_settings("SCAN_MODE_TURBO"), ConfigError);
  CHECK_THROWS_AS(scan_preset(AndroidMode::kAdvertiseBalanced), ConfigError);
  CHECK_THROWS_AS(adv_preset(AndroidMode::kScanBalanced), ConfigError);
}

TEST_CASE("classification value") {
  const auto a = Classification::channel(Channel(38));
  CHECK(a.has_channel());
  CHECK(a.channel() == Channel(38));
  const auto b = Classification::unclassified(UnclassifiedReason::kPreStart);
  CHECK_FALSE(b.has_channel());
  CHECK(b.reason() == UnclassifiedReason::kPreStart);
  CHECK_FALSE(b.channel_or_none().has_value());
  CHECK(a != b);
}

TEST_CASE("time conversions are exact at nanosecond resolution") {
  CHECK(from_seconds(4.096) == Duration{4'096'000'000});
  CHECK(from_seconds(0.2) == milliseconds(200));
  CHECK(to_seconds(Duration{30'000'000'000}) == 30.0);
  const AppTime t = app_at(from_seconds(1.5));
  CHECK((t + milliseconds(500)).time_since_epoch() == from_seconds(2.0));
}

TEST_CASE("rng is reproducible and in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(r.uniform_int(2) <= 2);
    const Duration d = r.uniform_duration(milliseconds(100), milliseconds(200));
    REQUIRE(d >= milliseconds(100));
    REQUIRE(d <= milliseconds(200));
  }
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2, 0) != derive_seed(1, 2, 1));
}

TEST_CASE("text helpers") {
  using namespace blechannel::text;
  CHECK(format_double(-40.0) == "-40");
  CHECK(parse_double(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK_FALSE(parse_double("1.5x").has_value());
  CHECK(parse_int("-12") == -12);
  CHECK_FALSE(parse_int("").has_value());
  CHECK_FALSE(parse_uint("-1").has_value());
}
