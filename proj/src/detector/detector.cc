#include "blechannel/detector.h"

#include <algorithm>

namespace blechannel::detector {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

void DetectorConfig::validate() const {
  if (guard_time < Duration::zero() || guard_time >= scan_settings.interval()) {
    throw ConfigError("guard time must satisfy 0 <= t_g < T_s");
  }
  if (max_scan_time <= Duration::zero() || max_scan_time > kMaxScanTimeCap) {
    throw ConfigError("max scan time must lie in (0, 30 min]");
  }
  if (effective_idle_timeout() <= Duration::zero()) {
    throw ConfigError("idle timeout must be positive");
  }
}

Classification classify_time(Duration delta, Duration scan_interval,
                             Duration guard_time) {
  if (scan_interval <= Duration::zero()) {
    throw ConfigError("classify_time: scan interval must be positive");
  }
  if (guard_time < Duration::zero() || guard_time >= scan_interval) {
    throw ConfigError("classify_time: guard time must satisfy 0 <= t_g < T_s");
  }
  if (delta < Duration::zero()) {
    return Classification::unclassified(UnclassifiedReason::kPreStart);
  }
  const std::int64_t period = scan_interval.count();
  const std::int64_t slot = floor_div(delta.count(), period);
  const std::int64_t r = delta.count() - slot * period;
  // Compare doubled values so an odd guard in nanoseconds stays exact.
  const std::int64_t g = guard_time.count();
  if (2 * r < g || 2 * r > 2 * period - g) {
    return Classification::unclassified(UnclassifiedReason::kGuardZone);
  }
  return Classification::channel(Channel::from_index(static_cast<int>(slot % 3)));
}

DetectorSession::DetectorSession(DetectorConfig config)
    : config_(std::move(config)) {
  config_.validate();
}

StateChange DetectorSession::restart(AppTime now) {
  const auto kind = mode_ == Mode::kLowPower ? StateChange::Kind::kEnterLowLatency
                                             : StateChange::Kind::kRestart;
  mode_ = Mode::kLowLatency;
  restart_time_ = now;
  last_signal_ = now;
  ++counters_.restarts;
  return StateChange{kind, now};
}

PacketOutcome DetectorSession::on_packet(const PacketRecord& record) {
  const AppTime now = record.recv_time;
  if (last_packet_ && now < *last_packet_) {
    throw TraceOrderError("packet timestamps moved backwards");
  }
  last_packet_ = now;

  if (mode_ == Mode::kLowPower) return restart(now);

  last_signal_ = std::max(*last_signal_, now);
  const Duration delta = now - *restart_time_;
  auto cls = classify_time(delta, config_.scan_settings.interval(),
                           config_.guard_time);
  if (cls.has_channel()) {
    ++counters_.classified;
  } else {
    ++counters_.unclassified;
  }
  return ClassifiedPacket{cls, delta};
}

std::optional<StateChange> DetectorSession::on_tick(AppTime now) {
  if (mode_ != Mode::kLowLatency) return std::nullopt;
  if (now - *last_signal_ >= config_.effective_idle_timeout()) {
    mode_ = Mode::kLowPower;
    restart_time_.reset();
    return StateChange{StateChange::Kind::kEnterLowPower, now};
  }
  if (now - *restart_time_ > config_.max_scan_time) return restart(now);
  return std::nullopt;
}

ClassifiedTrace classify_trace(const Trace& trace, const DetectorConfig& config,
                               std::span<const AppTime> restart_times) {
  if (!std::is_sorted(restart_times.begin(), restart_times.end())) {
    throw TraceOrderError("classify_trace: restart times must be sorted");
  }
  DetectorSession session(config);
  ClassifiedTrace out;
  out.packets.reserve(trace.size());

  const bool scheduled = !restart_times.empty();
  std::size_t next_restart = 0;
  if (scheduled) {
    out.restarts.assign(restart_times.begin(), restart_times.end());
    session.restart(restart_times[next_restart++]);
  }

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const PacketRecord& in = trace[i];
    if (i > 0 && in.recv_time < trace[i - 1].recv_time) {
      throw TraceOrderError("classify_trace: trace row " + std::to_string(i) +
                            " is earlier than its predecessor");
    }
    if (scheduled) {
      while (next_restart < restart_times.size() &&
             restart_times[next_restart] <= in.recv_time) {
        session.restart(restart_times[next_restart++]);
      }
    } else if (auto change = session.on_tick(in.recv_time);
               change && change->kind == StateChange::Kind::kRestart) {
      out.restarts.push_back(change->at);
    }

    PacketRecord rec = in;
    rec.estimate.reset();
    const PacketOutcome outcome = session.on_packet(in);
    if (const auto* cp = std::get_if<ClassifiedPacket>(&outcome)) {
      rec.estimate = cp->classification;
    } else {
      out.restarts.push_back(std::get<StateChange>(outcome).at);
    }
    out.packets.push_back(std::move(rec));
  }
  out.counters = session.counters();
  return out;
}

}  // namespace blechannel::detector
