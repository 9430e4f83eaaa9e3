#include "blechannel/experiment.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include "blechannel/rng.h"
#include "blechannel/text.h"

namespace blechannel::harness {

namespace {

constexpr std::uint64_t kPhaseStream = 0x9a5e;
constexpr std::uint64_t kAdvStream = 0xad5;
constexpr std::uint64_t kScanStream = 0x5ca;
constexpr std::uint64_t kClockStream = 0xc10c;
constexpr std::uint64_t kLossStream = 0x105;
constexpr std::uint64_t kRssiStream = 0x3551;
constexpr std::uint64_t kCalibrationStream = 0xca1;
constexpr std::uint64_t kEvaluationStream = 0xe7a1;

// Runs body(i) for i in [0, n) on up to hardware_concurrency threads and
// rethrows the first exception.
template <class Body>
void parallel_for(std::size_t n, Body body) {
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::string seconds_text(Duration d) { return text::format_double(to_seconds(d)); }

}  // namespace

std::optional<double> AccuracyBucket::accuracy() const {
  if (n_classified == 0) return std::nullopt;
  return static_cast<double>(n_correct) / static_cast<double>(n_classified);
}

std::size_t AccuracyCurve::classified() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.n_classified;
  return n;
}

std::size_t AccuracyCurve::correct() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.n_correct;
  return n;
}

std::size_t AccuracyCurve::unclassified() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.n_unclassified;
  return n;
}

std::optional<double> AccuracyCurve::overall() const {
  const std::size_t n = classified();
  if (n == 0) return std::nullopt;
  return static_cast<double>(correct()) / static_cast<double>(n);
}

std::optional<std::size_t> AccuracyCurve::first_imperfect() const {
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const auto a = buckets[i].accuracy();
    if (a && *a < 1.0) return i;
  }
  return std::nullopt;
}

AccuracyCurve& AccuracyCurve::operator+=(const AccuracyCurve& other) {
  if (buckets.empty()) {
    *this = other;
    return *this;
  }
  if (other.bucket_width != bucket_width || other.buckets.size() != buckets.size()) {
    throw ConfigError("cannot pool accuracy curves with different buckets");
  }
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    buckets[i].n_classified += other.buckets[i].n_classified;
    buckets[i].n_correct += other.buckets[i].n_correct;
    buckets[i].n_unclassified += other.buckets[i].n_unclassified;
  }
  return *this;
}

AccuracyCurve make_accuracy_curve(const Trace& classified,
                                  std::span<const AppTime> restarts,
                                  Duration bucket_width, Duration horizon) {
  if (bucket_width <= Duration::zero() || horizon <= Duration::zero()) {
    throw ConfigError("accuracy curve needs positive bucket width and horizon");
  }
  if (!std::is_sorted(restarts.begin(), restarts.end())) {
    throw TraceOrderError("accuracy curve: restarts must be sorted");
  }
  AccuracyCurve curve;
  curve.bucket_width = bucket_width;
  const std::int64_t n_buckets = (horizon.count() + bucket_width.count() - 1) / bucket_width.count();
  for (std::int64_t i = 0; i < n_buckets; ++i) {
    curve.buckets.push_back(AccuracyBucket{i * bucket_width,
                                           std::min((i + 1) * bucket_width, horizon)});
  }

  for (const auto& p : classified) {
    if (!p.estimate || !p.true_channel) continue;
    auto it = std::upper_bound(restarts.begin(), restarts.end(), p.recv_time);
    if (it == restarts.begin()) continue;
    const Duration since = p.recv_time - *std::prev(it);
    if (since >= horizon) continue;
    auto& bucket = curve.buckets[static_cast<std::size_t>(since / bucket_width)];
    if (p.estimate->has_channel()) {
      ++bucket.n_classified;
      if (p.estimate->channel() == *p.true_channel) ++bucket.n_correct;
    } else {
      ++bucket.n_unclassified;
    }
  }
  return curve;
}

void write_curve_csv(std::ostream& out, const AccuracyCurve& curve) {
  out << "bucket_start_s,bucket_end_s,n_classified,n_correct,n_unclassified,accuracy\n";
  for (const auto& b : curve.buckets) {
    const auto a = b.accuracy();
    out << seconds_text(b.start) << ',' << seconds_text(b.end) << ',' << b.n_classified
        << ',' << b.n_correct << ',' << b.n_unclassified << ','
        << (a ? text::format_double(*a) : "") << '\n';
  }
}

void ExperimentConfig::validate() const {
  if (advertisers < 1) throw ConfigError("need at least one advertiser");
  if (duration <= Duration::zero()) throw ConfigError("duration must be positive");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (bucket_width <= Duration::zero()) throw ConfigError("bucket width must be positive");
  const Duration restart = effective_restart_interval();
  if (restart <= Duration::zero() || restart > detector::kMaxScanTimeCap) {
    throw ConfigError("restart interval must lie in (0, 30 min]");
  }
  if (!(link.distance_m > 0.0)) throw ConfigError("distance must be positive");
  detector.validate();
}

SimulationRun simulate_run(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  cfg.validate();

  std::vector<RadioTime> restarts;
  const Duration every = cfg.effective_restart_interval();
  for (Duration t = Duration::zero(); t < cfg.duration; t += every) {
    restarts.push_back(radio_at(t));
  }

  std::vector<simkit::AdvertisingEvent> events;
  for (int i = 0; i < cfg.advertisers; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    Rng phase(derive_seed(run_seed, kPhaseStream, idx));
    simkit::AdvertiserOptions options;
    options.transmitter_id = "adv" + std::to_string(i);
    options.start_offset = phase.uniform_duration(
        Duration::zero(), cfg.adv.base_interval() - Duration{1});
    auto adv = simkit::gen_advertising(cfg.adv, cfg.duration,
                                       derive_seed(run_seed, kAdvStream, idx), options);
    events.insert(events.end(), std::make_move_iterator(adv.begin()),
                  std::make_move_iterator(adv.end()));
  }

  SimulationRun run;
  run.windows = simkit::gen_scan_windows(cfg.scan, cfg.behavior, restarts, cfg.duration,
                                         derive_seed(run_seed, kScanStream));
  const auto stamps =
      simkit::stamp_restarts(cfg.clock, restarts, derive_seed(run_seed, kClockStream));
  run.trace = simkit::simulate_reception(events, run.windows, cfg.clock, stamps, cfg.loss,
                                         derive_seed(run_seed, kLossStream));
  run.trace = simkit::attach_rssi(std::move(run.trace), cfg.link, cfg.fading,
                                  derive_seed(run_seed, kRssiStream));
  return run;
}

AccuracyReport run_accuracy_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  AccuracyReport report;
  report.runs.resize(static_cast<std::size_t>(cfg.repetitions));
  parallel_for(report.runs.size(), [&](std::size_t r) {
    const auto run = simulate_run(cfg, cfg.run_seed(static_cast<int>(r)));
    const auto restarts = run.trace.restart_times();
    const auto classified =
        detector::classify_trace(run.trace.packets(), cfg.detector, restarts);
    report.runs[r] = make_accuracy_curve(classified.packets, classified.restarts,
                                         cfg.bucket_width, cfg.detector.max_scan_time);
  });
  for (const auto& c : report.runs) report.pooled += c;
  return report;
}

std::vector<MatrixEntry> default_matrix_entries() {
  using namespace simkit::behavior;
  const ScanSettings five_seconds(std::chrono::seconds(5), std::chrono::seconds(5));
  return {
      {"compliant", Compliant{}, std::nullopt},
      {"alt-interval", AltInterval{std::chrono::seconds(5), std::nullopt}, five_seconds},
      {"rapid-toggle", RapidToggle{}, std::nullopt},
      {"nonstandard-order", NonStandardOrder{}, std::nullopt},
      {"continue-channel", ContinueChannel{}, std::nullopt},
      {"balanced-offset", BalancedOffset{}, std::nullopt},
  };
}

ExperimentConfig default_matrix_config() {
  ExperimentConfig cfg;
  cfg.scenario = "compatibility-matrix";
  cfg.duration = std::chrono::minutes(7);
  cfg.restart_interval = std::chrono::minutes(1);
  cfg.detector.guard_time = std::chrono::milliseconds(200);
  cfg.clock.drift_rate = 20e-6;
  cfg.clock.restart_jitter = std::chrono::milliseconds(20);
  return cfg;
}

std::vector<CompatibilityRow> run_compatibility_matrix(std::span<const MatrixEntry> entries,
                                                       const ExperimentConfig& cfg,
                                                       double threshold) {
  std::vector<CompatibilityRow> rows;
  for (const auto& e : entries) {
    ExperimentConfig run_cfg = cfg;
    run_cfg.behavior = e.behavior;
    if (e.detector_scan) run_cfg.detector.scan_settings = *e.detector_scan;
    const auto report = run_accuracy_experiment(run_cfg);

    CompatibilityRow row;
    row.label = e.label;
    row.accuracy = report.pooled.overall();
    row.n_classified = report.pooled.classified();
    row.n_correct = report.pooled.correct();
    row.n_unclassified = report.pooled.unclassified();
    row.compatible = row.accuracy && *row.accuracy >= threshold;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_matrix_csv(std::ostream& out, std::span<const CompatibilityRow> rows) {
  out << "behavior,compatible,accuracy,n_classified,n_correct,n_unclassified\n";
  for (const auto& r : rows) {
    out << r.label << ',' << (r.compatible ? "yes" : "no") << ','
        << (r.accuracy ? text::format_double(*r.accuracy) : "") << ',' << r.n_classified
        << ',' << r.n_correct << ',' << r.n_unclassified << '\n';
  }
}

void RangingConfig::validate() const {
  if (distances_m.empty()) throw ConfigError("ranging needs a distance grid");
  for (double d : distances_m) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw ConfigError("grid distances must be positive and finite");
    }
  }
  if (per_distance <= Duration::zero() || per_distance > detector::kMaxScanTimeCap) {
    throw ConfigError("per-distance scanning time must lie in (0, 30 min]");
  }
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  detector.validate();
}

namespace {

ExperimentConfig single_link_config(const RangingConfig& cfg, double distance_m) {
  ExperimentConfig e;
  e.scenario = "ranging";
  e.adv = cfg.adv;
  e.advertisers = 1;
  e.scan = cfg.detector.scan_settings;
  e.link = cfg.link;
  e.link.distance_m = distance_m;
  e.fading = cfg.fading;
  e.detector = cfg.detector;
  e.duration = cfg.per_distance;
  e.restart_interval = cfg.per_distance;
  return e;
}

}  // namespace

RangingReport run_ranging_experiment(const RangingConfig& cfg) {
  cfg.validate();
  RangingReport report;
  report.runs.resize(static_cast<std::size_t>(cfg.repetitions));
  std::vector<std::vector<ranging::CalibrationSample>> samples(report.runs.size());

  parallel_for(report.runs.size(), [&](std::size_t r) {
    const std::uint64_t run_seed = cfg.seed + r;
    auto& own = samples[r];
    for (std::size_t j = 0; j < cfg.distances_m.size(); ++j) {
      const double d = cfg.distances_m[j];
      const auto run = simulate_run(single_link_config(cfg, d),
                                    derive_seed(run_seed, kCalibrationStream, j));
      for (const auto& rec : run.trace.receptions) {
        own.push_back({*rec.packet.true_channel, d, *rec.packet.rssi_dbm});
      }
    }
    auto& out = report.runs[r];
    out.fit = ranging::calibrate(own, cfg.calibration);

    for (std::size_t j = 0; j < cfg.distances_m.size(); ++j) {
      const double d = cfg.distances_m[j];
      const auto run = simulate_run(single_link_config(cfg, d),
                                    derive_seed(run_seed, kEvaluationStream, j));
      const auto classified = detector::classify_trace(run.trace.packets(), cfg.detector,
                                                       run.trace.restart_times());
      out.comparison += ranging::compare_estimators(classified.packets, d, out.fit.model);
    }
  });

  for (const auto& run : report.runs) report.pooled += run.comparison;
  report.samples = std::move(samples.front());

  const auto& model = report.runs.front().fit.model;
  for (double d : cfg.distances_m) {
    for (Channel c : all_channels()) {
      std::size_t n = 0;
      double sum = 0.0;
      for (const auto& s : report.samples) {
        if (s.distance_m == d && s.channel == c) {
          sum += s.rssi_dbm;
          ++n;
        }
      }
      if (n == 0) continue;
      report.curves.push_back(RssiDistanceRow{
          d, c, n, sum / static_cast<double>(n), ranging::friis_rx_power(cfg.link.tx_power_dbm, cfg.link.gain_db, c, d),
          model.covers(c) ? model.predict_rssi(c, d) : std::nan("")});
    }
  }
  return report;
}

void write_rssi_curves_csv(std::ostream& out, std::span<const RssiDistanceRow> rows) {
  out << "distance_m,channel,n,mean_rssi_dbm,friis_rssi_dbm,fit_rssi_dbm\n";
  for (const auto& r : rows) {
    out << text::format_double(r.distance_m) << ',' << r.channel.id() << ',' << r.n << ','
        << text::format_double(r.mean_rssi_dbm) << ',' << text::format_double(r.friis_rssi_dbm)
        << ',' << (std::isnan(r.fitted_rssi_dbm) ? "" : text::format_double(r.fitted_rssi_dbm))
        << '\n';
  }
}

void write_samples_csv(std::ostream& out,
                       std::span<const ranging::CalibrationSample> samples) {
  out << "channel,distance_m,rssi_dbm\n";
  for (const auto& s : samples) {
    out << s.channel.id() << ',' << text::format_double(s.distance_m) << ','
        << text::format_double(s.rssi_dbm) << '\n';
  }
}

std::vector<ranging::CalibrationSample> read_samples_csv(std::istream& in) {
  std::vector<ranging::CalibrationSample> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "channel,distance_m,rssi_dbm") {
        throw ParseError(line_no, "expected header 'channel,distance_m,rssi_dbm'");
      }
      header = true;
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 3) throw ParseError(line_no, "expected 3 fields");
    const auto ch = text::parse_int(f[0]);
    const auto d = text::parse_double(f[1]);
    const auto rssi = text::parse_double(f[2]);
    if (!ch || *ch < 37 || *ch > 39) throw ParseError(line_no, "bad channel");
    if (!d || !(*d > 0.0) || !std::isfinite(*d)) throw ParseError(line_no, "bad distance");
    if (!rssi || !std::isfinite(*rssi)) throw ParseError(line_no, "bad rssi");
    out.push_back({Channel(static_cast<int>(*ch)), *d, *rssi});
  }
  if (!header) throw ParseError(0, "samples file is empty");
  return out;
}

}  // namespace blechannel::harness
