#include "blechannel/ranging.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <vector>

#include "blechannel/text.h"

namespace blechannel::ranging {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

double wavelength(Channel c) { return kSpeedOfLight / channel_frequency(c); }

double friis_rx_power(double tx_power_dbm, double gain_db, Channel c,
                      double distance_m) {
  if (!finite(tx_power_dbm) || !finite(gain_db) || !finite(distance_m)) {
    throw DomainError("friis_rx_power: non-finite input");
  }
  if (distance_m <= 0.0) {
    throw DomainError("friis_rx_power: distance must be positive");
  }
  return tx_power_dbm + gain_db +
         20.0 * std::log10(wavelength(c) /
                           (4.0 * std::numbers::pi * distance_m));
}

double friis_rx_power(const RadioLink& link, Channel c) {
  return friis_rx_power(link.tx_power_dbm, link.gain_db, c, link.distance_m);
}

double estimate_distance(double rssi_dbm, double tx_power_dbm, double gain_db,
                         Channel c) {
  return wavelength(c) / (4.0 * std::numbers::pi) *
         std::pow(10.0, (tx_power_dbm + gain_db - rssi_dbm) / 20.0);
}

double frequency_loss_db(Channel c) {
  return 20.0 * std::log10(channel_frequency(c) / channel_frequency(Channel(37)));
}

double CalibrationModel::alpha(Channel c) const {
  const auto& a = alpha_db[c.index()];
  if (!a) {
    throw ConfigError("calibration has no offset for channel " +
                      std::to_string(c.id()));
  }
  return *a;
}

double CalibrationModel::predict_rssi(Channel c, double distance_m) const {
  if (distance_m <= 0.0) {
    throw DomainError("predict_rssi: distance must be positive");
  }
  return beta_db + alpha(c) - 10.0 * exponent * std::log10(distance_m) -
         frequency_loss_db(c);
}

double CalibrationModel::estimate_distance(Channel c, double rssi_dbm) const {
  return std::pow(10.0, (beta_db + alpha(c) - frequency_loss_db(c) - rssi_dbm) /
                            (10.0 * exponent));
}

double CalibrationModel::corrected_rssi(Channel c, double rssi_dbm) const {
  return rssi_dbm - alpha(c) + frequency_loss_db(c);
}

CalibrationModel CalibrationModel::channel_agnostic() const {
  double sum = 0.0;
  int n = 0;
  for (Channel c : all_channels()) {
    if (!covers(c)) continue;
    sum += alpha(c) - frequency_loss_db(c);
    ++n;
  }
  CalibrationModel pooled;
  pooled.beta_db = beta_db + (n > 0 ? sum / n : 0.0);
  pooled.alpha_db = {0.0, 0.0, 0.0};
  pooled.exponent = exponent;
  return pooled;
}

double CalibrationModel::estimate_distance_agnostic(double rssi_dbm) const {
  const CalibrationModel pooled = channel_agnostic();
  return std::pow(10.0, (pooled.beta_db - rssi_dbm) / (10.0 * exponent));
}

CalibrationFit calibrate(std::span<const CalibrationSample> samples,
                         const CalibrationOptions& options) {
  if (samples.empty()) throw NoDataError("calibrate: no samples");
  if (!options.fit_exponent && !(options.exponent > 0.0)) {
    throw ConfigError("calibrate: path-loss exponent must be positive");
  }

  std::array<bool, 3> present{};
  for (const auto& s : samples) {
    if (!(s.distance_m > 0.0) || !finite(s.distance_m) || !finite(s.rssi_dbm)) {
      throw DomainError("calibrate: samples need finite RSSI and distance > 0");
    }
    present[s.channel.index()] = true;
  }
  if (!present[0]) {
    throw FitError("calibrate: channel 37 samples are required as reference");
  }

  // Columns: beta, alpha_38?, alpha_39?, exponent?
  std::array<int, 3> alpha_col{-1, -1, -1};
  int cols = 1;
  for (int i = 1; i < 3; ++i) {
    if (present[i]) alpha_col[i] = cols++;
  }
  const int exponent_col = options.fit_exponent ? cols++ : -1;

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, cols);
  Eigen::VectorXd target(n);
  for (Eigen::Index row = 0; row < n; ++row) {
    const auto& s = samples[static_cast<std::size_t>(row)];
    const double log_d = std::log10(s.distance_m);
    design(row, 0) = 1.0;
    if (alpha_col[s.channel.index()] > 0) design(row, alpha_col[s.channel.index()]) = 1.0;
    double y = s.rssi_dbm + frequency_loss_db(s.channel);
    if (exponent_col >= 0) {
      design(row, exponent_col) = -10.0 * log_d;
    } else {
      y += 10.0 * options.exponent * log_d;
    }
    target(row) = y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    throw FitError(
        "calibrate: design is rank deficient (need distinct distances to fit "
        "the exponent)");
  }
  const Eigen::VectorXd params = qr.solve(target);
  const Eigen::VectorXd residual = target - design * params;

  CalibrationFit fit;
  fit.samples = samples.size();
  fit.model.beta_db = params(0);
  fit.model.alpha_db = {0.0, std::nullopt, std::nullopt};
  for (int i = 1; i < 3; ++i) {
    if (alpha_col[i] > 0) fit.model.alpha_db[i] = params(alpha_col[i]);
  }
  fit.model.exponent =
      exponent_col >= 0 ? params(exponent_col) : options.exponent;

  const double dof = static_cast<double>(n - cols);
  const double rss = residual.squaredNorm();
  fit.residual_sigma = dof > 0 ? std::sqrt(rss / dof) : 0.0;
  const Eigen::MatrixXd cov =
      (design.transpose() * design).inverse() * (fit.residual_sigma * fit.residual_sigma);
  fit.beta_se = std::sqrt(cov(0, 0));
  fit.alpha_se = {0.0, std::nullopt, std::nullopt};
  for (int i = 1; i < 3; ++i) {
    if (alpha_col[i] > 0) fit.alpha_se[i] = std::sqrt(cov(alpha_col[i], alpha_col[i]));
  }
  if (exponent_col >= 0) fit.exponent_se = std::sqrt(cov(exponent_col, exponent_col));
  return fit;
}

void write_calibration(std::ostream& out, const CalibrationModel& model) {
  auto opt = [](const std::optional<double>& v) {
    return v ? text::format_double(*v) : std::string("none");
  };
  out << "version=" << CalibrationModel::kVersion << '\n'
      << "beta_db=" << text::format_double(model.beta_db) << '\n'
      << "alpha_38_db=" << opt(model.alpha_db[1]) << '\n'
      << "alpha_39_db=" << opt(model.alpha_db[2]) << '\n'
      << "exponent=" << text::format_double(model.exponent) << '\n';
}

CalibrationModel read_calibration(std::istream& in) {
  CalibrationModel model;
  std::optional<double> beta, exponent;
  bool alpha38_seen = false, alpha39_seen = false, version_seen = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(line_no, "expected key=value");
    }
    const auto key = text::trim(body.substr(0, eq));
    const auto value = text::trim(body.substr(eq + 1));

    auto real = [&]() {
      auto v = text::parse_double(value);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(line_no, "bad number for " + std::string(key));
      }
      return *v;
    };
    auto optional_real = [&]() -> std::optional<double> {
      if (value == "none") return std::nullopt;
      return real();
    };

    if (key == "version") {
      if (value != std::to_string(CalibrationModel::kVersion)) {
        throw ParseError(line_no, "unsupported calibration version '" +
                                      std::string(value) + "'");
      }
      version_seen = true;
    } else if (key == "beta_db") {
      beta = real();
    } else if (key == "alpha_38_db") {
      model.alpha_db[1] = optional_real();
      alpha38_seen = true;
    } else if (key == "alpha_39_db") {
      model.alpha_db[2] = optional_real();
      alpha39_seen = true;
    } else if (key == "exponent") {
      exponent = real();
    } else {
      throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  if (!version_seen || !beta || !exponent || !alpha38_seen || !alpha39_seen) {
    throw ParseError(0, "calibration file is missing required keys");
  }
  if (!(*exponent > 0.0)) throw ParseError(0, "exponent must be positive");
  model.beta_db = *beta;
  model.exponent = *exponent;
  return model;
}

void save_calibration(const std::string& path, const CalibrationModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_calibration(out, model);
  if (!out) throw Error("failed writing '" + path + "'");
}

CalibrationModel load_calibration(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_calibration(in);
}

BalancedAverage balanced_average(std::span<const RssiSample> samples,
                                 Duration window,
                                 const CalibrationModel* calibration,
                                 AveragingDomain domain) {
  if (samples.empty()) throw NoDataError("balanced_average: no samples");
  if (window < Duration::zero()) {
    throw ConfigError("balanced_average: window must be non-negative");
  }

  AppTime newest = samples.front().time;
  for (const auto& s : samples) newest = std::max(newest, s.time);

  std::array<std::vector<RssiSample>, 3> per_channel;
  for (const auto& s : samples) {
    if (window != kUnboundedWindow && newest - s.time > window) continue;
    per_channel[s.channel.index()].push_back(s);
  }

  std::size_t m = std::numeric_limits<std::size_t>::max();
  int channels_present = 0;
  for (const auto& bucket : per_channel) {
    if (bucket.empty()) continue;
    ++channels_present;
    m = std::min(m, bucket.size());
  }

  BalancedAverage result;
  result.balanced = channels_present == 3;
  result.per_channel = m;

  double sum = 0.0;
  for (auto& bucket : per_channel) {
    if (bucket.empty()) continue;
    std::stable_sort(bucket.begin(), bucket.end(),
                     [](const RssiSample& a, const RssiSample& b) {
                       return a.time > b.time;
                     });
    for (std::size_t i = 0; i < m; ++i) {
      const auto& s = bucket[i];
      const double v = calibration
                           ? calibration->corrected_rssi(s.channel, s.rssi_dbm)
                           : s.rssi_dbm;
      sum += domain == AveragingDomain::kDecibel ? v : std::pow(10.0, v / 10.0);
      ++result.used;
    }
  }
  const double mean = sum / static_cast<double>(result.used);
  result.mean_dbm =
      domain == AveragingDomain::kDecibel ? mean : 10.0 * std::log10(mean);
  return result;
}

double EstimatorComparison::rmse_channel_aware() const {
  if (n_channel_aware == 0) throw NoDataError("no channel-aware estimates");
  return std::sqrt(sse_channel_aware / static_cast<double>(n_channel_aware));
}

double EstimatorComparison::rmse_channel_agnostic() const {
  if (n_channel_agnostic == 0) throw NoDataError("no channel-agnostic estimates");
  return std::sqrt(sse_channel_agnostic /
                   static_cast<double>(n_channel_agnostic));
}

EstimatorComparison& EstimatorComparison::operator+=(
    const EstimatorComparison& other) {
  sse_channel_aware += other.sse_channel_aware;
  n_channel_aware += other.n_channel_aware;
  sse_channel_agnostic += other.sse_channel_agnostic;
  n_channel_agnostic += other.n_channel_agnostic;
  return *this;
}

EstimatorComparison compare_estimators(const Trace& classified,
                                       double truth_distance_m,
                                       const CalibrationModel& calibration) {
  if (!(truth_distance_m > 0.0)) {
    throw DomainError("compare_estimators: true distance must be positive");
  }
  const CalibrationModel pooled = calibration.channel_agnostic();

  EstimatorComparison out;
  for (const auto& p : classified) {
    if (!p.rssi_dbm) continue;
    const double agnostic = std::pow(
        10.0, (pooled.beta_db - *p.rssi_dbm) / (10.0 * pooled.exponent));
    out.sse_channel_agnostic += (agnostic - truth_distance_m) * (agnostic - truth_distance_m);
    ++out.n_channel_agnostic;

    if (p.estimate && p.estimate->has_channel() &&
        calibration.covers(p.estimate->channel())) {
      const double aware =
          calibration.estimate_distance(p.estimate->channel(), *p.rssi_dbm);
      out.sse_channel_aware += (aware - truth_distance_m) * (aware - truth_distance_m);
      ++out.n_channel_aware;
    }
  }
  if (out.n_channel_agnostic == 0) {
    throw NoDataError("compare_estimators: trace carries no RSSI values");
  }
  return out;
}

}  // namespace blechannel::ranging
