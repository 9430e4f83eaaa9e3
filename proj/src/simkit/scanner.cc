#include <algorithm>
#include <string>

#include "blechannel/rng.h"
#include "blechannel/simkit.h"

namespace blechannel::simkit {

namespace {

constexpr std::uint64_t kScannerStream = 0x5c;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Channel random_channel(Rng& rng) {
  return Channel::from_index(static_cast<int>(rng.uniform_int(2)));
}

Channel random_other_channel(Rng& rng, Channel current) {
  const int step = 1 + static_cast<int>(rng.uniform_int(1));
  return Channel::from_index((current.index() + step) % 3);
}

// Emits windows for one segment; owns the cross-restart channel state.
class WindowBuilder {
 public:
  WindowBuilder(const ScanSettings& settings, std::uint64_t seed,
                std::vector<ScanWindow>& out)
      : settings_(settings), rng_(derive_seed(seed, kScannerStream)), out_(out) {}

  void segment(const ScannerBehavior& b, std::size_t segment, RadioTime start,
               RadioTime end) {
    segment_ = segment;
    index_ = 0;
    std::visit(Overloaded{
                   [&](const behavior::Compliant&) {
                     periodic(start, end, settings_.interval(),
                              settings_.window(), Channel(37));
                   },
                   [&](const behavior::AltInterval& alt) {
                     const Duration window = alt.window.value_or(alt.interval);
                     if (alt.interval <= Duration::zero() ||
                         window <= Duration::zero() || window > alt.interval) {
                       throw ConfigError(
                           "alt-interval behavior needs 0 < window <= interval");
                     }
                     periodic(start, end, alt.interval, window, Channel(37));
                   },
                   [&](const behavior::BalancedOffset& bal) {
                     balanced(bal, start, end);
                   },
                   [&](const behavior::RapidToggle& rt) {
                     rapid(rt, start, end);
                   },
                   [&](const behavior::NonStandardOrder& ns) {
                     nonstandard(ns, start, end);
                   },
                   [&](const behavior::ContinueChannel& cc) {
                     const Channel first = last_channel_.value_or(cc.initial);
                     periodic(start, end, settings_.interval(),
                              settings_.window(), first);
                   },
               },
               b);
  }

 private:
  void emit(RadioTime start, Duration length, RadioTime end, Channel c) {
    const Duration clipped = std::min(length, end - start);
    if (clipped <= Duration::zero()) return;
    out_.push_back(ScanWindow{start, clipped, c, index_++, segment_});
    last_channel_ = c;
  }

  void periodic(RadioTime start, RadioTime end, Duration interval,
                Duration window, Channel first) {
    Channel c = first;
    for (RadioTime s = start; s < end; s += interval) {
      emit(s, window, end, c);
      c = next_channel(c);
    }
  }

  void balanced(const behavior::BalancedOffset& bal, RadioTime start,
                RadioTime end) {
    const Duration hi = bal.offset_max.value_or(2 * settings_.interval());
    if (bal.offset_min < Duration::zero() || hi < bal.offset_min) {
      throw ConfigError("balanced-offset behavior needs 0 <= min <= max offset");
    }
    const Duration offset = rng_.uniform_duration(bal.offset_min, hi);
    const RadioTime regular = std::min(start + offset, end);

    // Before the offset the radio scans continuously, staying on each channel
    // for somewhat longer than one window.
    Channel c(37);
    for (RadioTime s = start; s < regular;) {
      const Duration len =
          rng_.uniform_duration(settings_.window(), 2 * settings_.window());
      const RadioTime e = std::min(s + len, regular);
      emit(s, e - s, regular, c);
      c = next_channel(c);
      s = e;
    }
    periodic(regular, end, settings_.interval(), settings_.window(), Channel(37));
  }

  void rapid(const behavior::RapidToggle& rt, RadioTime start, RadioTime end) {
    if (rt.min_window <= Duration::zero() || rt.max_window < rt.min_window) {
      throw ConfigError("rapid-toggle behavior needs 0 < min <= max window");
    }
    for (RadioTime s = start; s < end;) {
      const Duration len = rng_.uniform_duration(rt.min_window, rt.max_window);
      emit(s, len, end, random_channel(rng_));
      s += len;
    }
  }

  void nonstandard(const behavior::NonStandardOrder& ns, RadioTime start,
                   RadioTime end) {
    for (RadioTime s = start; s < end; s += settings_.interval()) {
      Channel c(37);
      if (!ns.sequence.empty()) {
        c = ns.sequence[sequence_pos_ % ns.sequence.size()];
        ++sequence_pos_;
      } else if (last_channel_) {
        c = random_other_channel(rng_, *last_channel_);
      } else {
        c = random_channel(rng_);
      }
      emit(s, settings_.window(), end, c);
    }
  }

  ScanSettings settings_;
  Rng rng_;
  std::vector<ScanWindow>& out_;
  std::size_t segment_ = 0;
  std::int64_t index_ = 0;
  std::optional<Channel> last_channel_;
  std::size_t sequence_pos_ = 0;
};

struct TagEntry {
  std::string_view tag;
  ScannerBehavior (*make)();
};

const TagEntry kTags[] = {
    {"compliant", [] { return ScannerBehavior{behavior::Compliant{}}; }},
    {"balanced-offset", [] { return ScannerBehavior{behavior::BalancedOffset{}}; }},
    {"alt-interval", [] { return ScannerBehavior{behavior::AltInterval{}}; }},
    {"rapid-toggle", [] { return ScannerBehavior{behavior::RapidToggle{}}; }},
    {"nonstandard-order", [] { return ScannerBehavior{behavior::NonStandardOrder{}}; }},
    {"continue-channel", [] { return ScannerBehavior{behavior::ContinueChannel{}}; }},
};

}  // namespace

std::string_view behavior_tag(const ScannerBehavior& b) {
  return kTags[b.index()].tag;
}

ScannerBehavior behavior_from_tag(std::string_view tag) {
  for (const auto& entry : kTags) {
    if (entry.tag == tag) return entry.make();
  }
  throw ConfigError("unknown scanner behavior '" + std::string(tag) + "'");
}

std::vector<ScanWindow> gen_scan_windows(const ScanSettings& settings,
                                         const ScannerBehavior& behavior,
                                         std::span<const RadioTime> restarts,
                                         Duration duration, std::uint64_t seed) {
  if (duration <= Duration::zero()) {
    throw ConfigError("gen_scan_windows: duration must be positive");
  }
  if (!std::is_sorted(restarts.begin(), restarts.end())) {
    throw TraceOrderError("gen_scan_windows: restarts must be sorted");
  }

  const RadioTime stop = radio_at(duration);
  static const RadioTime kOrigin{};
  std::span<const RadioTime> starts =
      restarts.empty() ? std::span<const RadioTime>(&kOrigin, 1) : restarts;

  std::vector<ScanWindow> windows;
  WindowBuilder builder(settings, seed, windows);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const RadioTime begin = starts[k];
    if (begin >= stop) break;
    const RadioTime end = k + 1 < starts.size() ? std::min(starts[k + 1], stop) : stop;
    builder.segment(behavior, k, begin, end);
  }
  return windows;
}

}  // namespace blechannel::simkit
