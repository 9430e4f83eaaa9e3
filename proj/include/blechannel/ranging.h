#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "blechannel/core.h"

namespace blechannel::ranging {

// Free-space link between one transmitter and one receiver.
struct RadioLink {
  double tx_power_dbm = 0.0;
  // Combined transmitter and receiver antenna gain, G_t * G_r, in dB.
  double gain_db = 0.0;
  double distance_m = 1.0;
};

double wavelength(Channel c);

// Received power under free-space propagation. Throws DomainError when the
// distance is not positive or any input is non-finite.
double friis_rx_power(double tx_power_dbm, double gain_db, Channel c,
                      double distance_m);
double friis_rx_power(const RadioLink& link, Channel c);

// Exact inverse of friis_rx_power in distance.
double estimate_distance(double rssi_dbm, double tx_power_dbm, double gain_db,
                         Channel c);

// 20*log10(f_c / f_37): how much weaker channel c is than channel 37 in free
// space at equal distance.
double frequency_loss_db(Channel c);

// Log-distance model with per-channel offsets:
//   rssi = beta + alpha_c - 10 * exponent * log10(d) - frequency_loss_db(c)
// alpha_37 is fixed at 0; alphas for channels absent from the training data
// are empty.
struct CalibrationModel {
  static constexpr int kVersion = 1;

  double beta_db = 0.0;
  std::array<std::optional<double>, 3> alpha_db{0.0, std::nullopt,
                                                std::nullopt};
  double exponent = 2.0;

  bool covers(Channel c) const { return alpha_db[c.index()].has_value(); }
  // Throws ConfigError for channels the model does not cover.
  double alpha(Channel c) const;
  double predict_rssi(Channel c, double distance_m) const;
  double estimate_distance(Channel c, double rssi_dbm) const;

  // RSSI mapped to its channel-37-equivalent value.
  double corrected_rssi(Channel c, double rssi_dbm) const;

  // The single pooled model a receiver unaware of the channel would use:
  // offsets and frequency terms of all covered channels are folded into beta.
  CalibrationModel channel_agnostic() const;

  double estimate_distance_agnostic(double rssi_dbm) const;

  friend bool operator==(const CalibrationModel&,
                         const CalibrationModel&) = default;
};

struct CalibrationSample {
  Channel channel;
  double distance_m;
  double rssi_dbm;
};

struct CalibrationOptions {
  bool fit_exponent = false;
  // Used when fit_exponent is false.
  double exponent = 2.0;
};

struct CalibrationFit {
  CalibrationModel model;
  double beta_se = 0.0;
  std::array<std::optional<double>, 3> alpha_se{};
  std::optional<double> exponent_se;
  double residual_sigma = 0.0;
  std::size_t samples = 0;
};

// Ordinary least squares in the log-distance domain. Requires at least one
// channel-37 sample (the gauge reference). Throws FitError for rank-deficient
// designs, NoDataError for empty input.
CalibrationFit calibrate(std::span<const CalibrationSample> samples,
                         const CalibrationOptions& options = {});

// Key-value text form:
//   version=1
//   beta_db=<real>
//   alpha_38_db=<real|none>
//   alpha_39_db=<real|none>
//   exponent=<real>
void write_calibration(std::ostream& out, const CalibrationModel& model);
CalibrationModel read_calibration(std::istream& in);
void save_calibration(const std::string& path, const CalibrationModel& model);
CalibrationModel load_calibration(const std::string& path);

struct RssiSample {
  AppTime time;
  Channel channel;
  double rssi_dbm;
};

enum class AveragingDomain { kDecibel, kMilliwatt };

struct BalancedAverage {
  double mean_dbm = 0.0;
  bool balanced = false;
  std::size_t per_channel = 0;
  std::size_t used = 0;
};

inline constexpr Duration kUnboundedWindow = Duration::max();

// Averages the same number of samples from every channel present within
// `window` of the newest sample, taking the newest ones per channel. With a
// calibration, samples are first mapped to channel-37-equivalent power.
// The result is flagged unbalanced unless all three channels contributed.
// Throws NoDataError for empty input, ConfigError for a negative window.
BalancedAverage balanced_average(std::span<const RssiSample> samples,
                                 Duration window,
                                 const CalibrationModel* calibration = nullptr,
                                 AveragingDomain domain =
                                     AveragingDomain::kDecibel);

struct EstimatorComparison {
  double sse_channel_aware = 0.0;
  std::size_t n_channel_aware = 0;
  double sse_channel_agnostic = 0.0;
  std::size_t n_channel_agnostic = 0;

  double rmse_channel_aware() const;
  double rmse_channel_agnostic() const;

  EstimatorComparison& operator+=(const EstimatorComparison& other);
};

// Distance error of per-packet estimates against a known true distance.
// The channel-aware estimator uses each packet's detected channel and skips
// packets without one; the agnostic estimator uses every packet with RSSI.
// Throws NoDataError when no packet carries RSSI.
EstimatorComparison compare_estimators(const Trace& classified,
                                       double truth_distance_m,
                                       const CalibrationModel& calibration);

}  // namespace blechannel::ranging
