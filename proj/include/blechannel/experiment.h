#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blechannel/detector.h"
#include "blechannel/ranging.h"
#include "blechannel/simkit.h"

namespace blechannel::harness {

struct AccuracyBucket {
  Duration start;
  Duration end;
  std::size_t n_classified = 0;
  std::size_t n_correct = 0;
  std::size_t n_unclassified = 0;

  // Fraction of classified packets whose estimate matches the true channel;
  // empty when nothing was classified in the bucket.
  std::optional<double> accuracy() const;
};

// Detection accuracy against time since the most recent restart.
struct AccuracyCurve {
  Duration bucket_width{};
  std::vector<AccuracyBucket> buckets;

  std::size_t classified() const;
  std::size_t correct() const;
  std::size_t unclassified() const;
  // correct / classified over all buckets; empty when nothing was classified.
  std::optional<double> overall() const;
  // First bucket whose accuracy is below 1.
  std::optional<std::size_t> first_imperfect() const;

  // Adds counts bucket by bucket. Throws ConfigError on mismatched layouts.
  AccuracyCurve& operator+=(const AccuracyCurve& other);
};

// Buckets of `bucket_width` covering [0, horizon). Packets without a true
// channel or estimate, or before the first restart, are not counted.
AccuracyCurve make_accuracy_curve(const Trace& classified,
                                  std::span<const AppTime> restarts,
                                  Duration bucket_width, Duration horizon);

// bucket_start_s,bucket_end_s,n_classified,n_correct,n_unclassified,accuracy
void write_curve_csv(std::ostream& out, const AccuracyCurve& curve);

struct ExperimentConfig {
  std::string scenario = "default";
  AdvSettings adv{std::chrono::milliseconds(100)};
  int advertisers = 4;
  ScanSettings scan{std::chrono::milliseconds(4096),
                    std::chrono::milliseconds(4096)};
  simkit::ScannerBehavior behavior = simkit::behavior::Compliant{};
  simkit::ClockModel clock;
  simkit::LossModel loss;
  simkit::FadingModel fading;
  ranging::RadioLink link;
  // Its scan settings are what the app assumes; they may differ from `scan`.
  detector::DetectorConfig detector;
  Duration duration = std::chrono::minutes(10);
  // Interval between scan restarts; unset means detector.max_scan_time.
  std::optional<Duration> restart_interval;
  Duration bucket_width = std::chrono::seconds(30);
  std::uint64_t seed = 1;
  int repetitions = 1;

  Duration effective_restart_interval() const {
    return restart_interval.value_or(detector.max_scan_time);
  }
  std::uint64_t run_seed(int repetition) const {
    return seed + static_cast<std::uint64_t>(repetition);
  }

  // Throws ConfigError.
  void validate() const;
};

struct SimulationRun {
  std::vector<simkit::ScanWindow> windows;
  simkit::SimTrace trace;
};

SimulationRun simulate_run(const ExperimentConfig& cfg, std::uint64_t run_seed);

struct AccuracyReport {
  AccuracyCurve pooled;
  std::vector<AccuracyCurve> runs;
};

// Simulates, classifies with the configured detector, and bins correctness by
// time since restart. Repetitions run concurrently; results are independent
// of scheduling.
AccuracyReport run_accuracy_experiment(const ExperimentConfig& cfg);

struct MatrixEntry {
  std::string label;
  simkit::ScannerBehavior behavior;
  // Detector scan settings matched to the device; unset keeps cfg.detector's.
  std::optional<ScanSettings> detector_scan;
};

struct CompatibilityRow {
  std::string label;
  bool compatible = false;
  std::optional<double> accuracy;
  std::size_t n_classified = 0;
  std::size_t n_correct = 0;
  std::size_t n_unclassified = 0;
};

// The device behaviors of the smartphone survey: compliant, older-API 5 s
// interval (with the matching detector interval), rapid toggling,
// non-standard order, no channel reset, and balanced-mode offset.
std::vector<MatrixEntry> default_matrix_entries();

// Configuration used for the survey: 7 minutes, restart every minute,
// guard time 0.2 s.
ExperimentConfig default_matrix_config();

std::vector<CompatibilityRow> run_compatibility_matrix(
    std::span<const MatrixEntry> entries, const ExperimentConfig& cfg,
    double threshold = 0.99);

// behavior,compatible,accuracy,n_classified,n_correct,n_unclassified
void write_matrix_csv(std::ostream& out, std::span<const CompatibilityRow> rows);

struct RangingConfig {
  std::vector<double> distances_m;
  ranging::RadioLink link;
  simkit::FadingModel fading;
  AdvSettings adv{std::chrono::milliseconds(100)};
  // Simulated scanning time per grid distance (calibration and evaluation
  // each get their own trace).
  Duration per_distance = std::chrono::seconds(60);
  detector::DetectorConfig detector;
  ranging::CalibrationOptions calibration;
  std::uint64_t seed = 1;
  int repetitions = 1;

  void validate() const;
};

struct RssiDistanceRow {
  double distance_m;
  Channel channel;
  std::size_t n;
  double mean_rssi_dbm;
  double friis_rssi_dbm;
  double fitted_rssi_dbm;
};

struct RangingRun {
  ranging::CalibrationFit fit;
  ranging::EstimatorComparison comparison;
};

struct RangingReport {
  std::vector<RssiDistanceRow> curves;
  std::vector<ranging::CalibrationSample> samples;
  // Per repetition; runs[0] also produced curves and samples.
  std::vector<RangingRun> runs;
  ranging::EstimatorComparison pooled;
};

// For each repetition: fit a calibration on simulated packets with known
// channels, then estimate distances on an independent simulated trace whose
// channels come from the detector, comparing channel-aware and pooled
// estimators.
RangingReport run_ranging_experiment(const RangingConfig& cfg);

// distance_m,channel,n,mean_rssi_dbm,friis_rssi_dbm,fit_rssi_dbm
void write_rssi_curves_csv(std::ostream& out,
                           std::span<const RssiDistanceRow> rows);
// channel,distance_m,rssi_dbm
void write_samples_csv(std::ostream& out,
                       std::span<const ranging::CalibrationSample> samples);
// Throws ParseError.
std::vector<ranging::CalibrationSample> read_samples_csv(std::istream& in);

}  // namespace blechannel::harness
