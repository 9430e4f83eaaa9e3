#include "blechannel/rng.h"
#include "blechannel/simkit.h"

namespace blechannel::simkit {

namespace {
constexpr std::uint64_t kAdvertisingStream = 0xad;
}  // namespace

std::vector<AdvertisingEvent> gen_advertising(const AdvSettings& settings,
                                              Duration duration,
                                              std::uint64_t seed,
                                              const AdvertiserOptions& options) {
  if (duration <= Duration::zero()) {
    throw ConfigError("gen_advertising: duration must be positive");
  }
  if (options.intra_event_gap < Duration::zero() ||
      options.start_offset < Duration::zero()) {
    throw ConfigError("gen_advertising: gaps and offsets must be non-negative");
  }

  Rng rng(derive_seed(seed, kAdvertisingStream));
  std::vector<AdvertisingEvent> events;
  events.reserve(static_cast<std::size_t>(duration / settings.base_interval()) + 1);

  Duration t = options.start_offset;
  for (std::int64_t index = 0; t < duration; ++index) {
    AdvertisingEvent ev;
    ev.event_index = index;
    ev.transmitter_id = options.transmitter_id;
    ev.channel_map = options.channel_map;
    for (int c = 0; c < 3; ++c) {
      ev.packet_times[c] = radio_at(t + c * options.intra_event_gap);
    }
    events.push_back(std::move(ev));
    t += settings.base_interval() +
         rng.uniform_duration(Duration::zero(), settings.rho_max());
  }
  return events;
}

}  // namespace blechannel::simkit
