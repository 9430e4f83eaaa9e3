// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "blechannel/cli.h"
#include "blechannel/detector.h"
#include "blechannel/experiment.h"
#include "blechannel/ranging.h"
#include "blechannel/rng.h"
#include "blechannel/simkit.h"
#include "oracles.h"

using namespace blechannel;
using namespace blechannel::harness;
using std::chrono::milliseconds;
using std::chrono::seconds;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int code(const Classification& c) {
  if (c.has_channel()) return c.channel().id();
  return c.reason() == UnclassifiedReason::kPreStart ? -1 : 0;
}

Verdict oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const std::int64_t intervals[] = {4'096'000'000, 5'000'000'000, 5'120'000'000};
  const std::int64_t guards[] = {0, 100'000'000, 200'000'000, 500'000'000};
  const int n = 100000;
  int mismatches = 0;
  for (int i = 0; i < n; ++i) {
    const std::int64_t T = intervals[rng.uniform_int(2)];
    const std::int64_t g = guards[rng.uniform_int(3)];
    const auto delta = static_cast<std::int64_t>(rng.uniform_int(3'600'000'000'000));
    const auto got = detector::classify_time(Duration{delta}, Duration{T}, Duration{g});
    if (code(got) != oracle::classify(delta, T, g)) ++mismatches;
  }
  const double t = elapsed_s(t0);
  return {mismatches == 0 && t < 5.0,
          fmt("%.0f mismatches in %.0f inputs, %.2f s (limit 5 s)", mismatches, n, t)};
}

Verdict plateau() {
  const auto t0 = std::chrono::steady_clock::now();
  int bad_buckets = 0, buckets = 0;
  double classified = 0;
  for (double drift : {50e-6, -50e-6}) {
    ExperimentConfig cfg;
    cfg.clock.drift_rate = drift;
    cfg.clock.restart_jitter = milliseconds(50);
    cfg.duration = seconds(600);
    cfg.repetitions = 20;
    const auto report = run_accuracy_experiment(cfg);
    for (const auto& run : report.runs) {
      for (const auto& b : run.buckets) {
        ++buckets;
        classified += static_cast<double>(b.n_classified);
        if (b.n_classified == 0 || b.n_correct != b.n_classified) ++bad_buckets;
      }
    }
  }
  const double t = elapsed_s(t0);
  return {bad_buckets == 0 && buckets == 2 * 20 * 20 && t < 10.0,
          fmt("%.0f of %.0f buckets below 100%% (drift +-50 ppm, jitter 50 ms, 20 seeds, "
              "%.0f packets), %.2f s (limit 10 s)",
              bad_buckets, buckets, classified, t)};
}

Verdict drift_decay() {
  ExperimentConfig cfg;
  // Buckets of seven whole slots. 30 s buckets hold 7.32 slots, so every
  // third one contains an extra slot border, where drift errors sit, and the
  // curve is saw-toothed even in expectation.
  cfg.bucket_width = 7 * cfg.scan.interval();
  cfg.advertisers = 32;
  cfg.clock.drift_rate = 200e-6;
  // The curve covers 31 buckets; simulating a little longer keeps the last
  // bucket complete on the app clock.
  cfg.detector.max_scan_time = 31 * cfg.bucket_width;
  cfg.duration = cfg.detector.max_scan_time + seconds(10);
  cfg.restart_interval = cfg.duration;
  cfg.repetitions = 20;
  const auto report = run_accuracy_experiment(cfg);

  double earliest = 1e9, latest = -1;
  bool onset_ok = true;
  for (const auto& run : report.runs) {
    const auto first = run.first_imperfect();
    if (!first) {
      onset_ok = false;
      continue;
    }
    const double start = to_seconds(run.buckets[*first].start);
    earliest = std::min(earliest, start);
    latest = std::max(latest, start);
    if (start < 450.0 || start > 550.0) onset_ok = false;
  }

  const auto& pooled = report.pooled;
  bool monotone = true;
  const auto first = pooled.first_imperfect();
  if (!first) monotone = false;
  for (std::size_t i = first.value_or(0) + 1; first && i < pooled.buckets.size(); ++i) {
    if (*pooled.buckets[i].accuracy() > *pooled.buckets[i - 1].accuracy()) monotone = false;
  }
  const double last = pooled.buckets.back().accuracy().value_or(NAN);
  return {onset_ok && monotone,
          fmt("per-seed onset in [%.0f, %.0f] s (window 450-550), ", earliest, latest) +
              (monotone ? "pooled curve non-increasing after onset"
                        : "pooled curve increases after onset") +
              fmt(", %.3f s buckets, last bucket accuracy %.4f", to_seconds(cfg.bucket_width),
                  last)};
}

Verdict compatibility() {
  ExperimentConfig cfg = default_matrix_config();
  cfg.repetitions = 5;
  const auto rows = run_compatibility_matrix(default_matrix_entries(), cfg);
  bool ok = true;
  std::ostringstream detail;
  for (const auto& r : rows) {
    const double acc = r.accuracy.value_or(NAN);
    bool row_ok = true;
    if (r.label == "compliant") {
      row_ok = r.compatible && acc == 1.0;
    } else if (r.label == "alt-interval") {
      row_ok = r.compatible && acc >= 0.99;
    } else if (r.label == "rapid-toggle") {
      row_ok = !r.compatible && acc >= 0.30 && acc <= 0.40 && r.n_classified >= 3000;
    } else if (r.label == "nonstandard-order" || r.label == "continue-channel") {
      row_ok = !r.compatible;
    }
    ok = ok && row_ok;
    detail << r.label << (r.compatible ? " ok " : " x ") << fmt("%.4f", acc);
    if (r.label == "rapid-toggle") {
      detail << fmt(" (n=%.0f, 95%% CI +-%.4f)", static_cast<double>(r.n_classified),
                    oracle::ci95(acc, static_cast<double>(r.n_classified)));
    }
    detail << "; ";
  }
  return {ok, detail.str()};
}

Verdict friis() {
  using ranging::friis_rx_power;
  const Channel c37(37), c39(39);
  const double p1 = friis_rx_power(0, 0, c37, 1.0);
  const double step = friis_rx_power(0, 0, c37, 1.0) - friis_rx_power(0, 0, c37, 2.0);
  const double spread = p1 - friis_rx_power(0, 0, c39, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double d = 0.25 * (i + 1);
    for (Channel c : all_channels()) {
      const double back =
          ranging::estimate_distance(friis_rx_power(0, 0, c, d), 0, 0, c);
      worst = std::max(worst, std::abs(back / d - 1.0));
    }
  }
  const bool ok = std::abs(p1 + 40.06) <= 0.01 && std::abs(step - 6.0206) <= 1e-6 &&
                  std::abs(spread - 0.278) <= 0.005 && worst <= 1e-9;
  return {ok, fmt("P(ch37, 1 m) %.4f dBm, doubling %.7f dB, ch37-ch39 %.4f dB, "
                  "inversion rel. error %.1e",
                  p1, step, spread, worst)};
}

std::vector<ranging::CalibrationSample> calibration_data(double sigma, int count,
                                                         std::uint64_t seed) {
  const double beta = -40.0, n = 2.0;
  const double alpha[] = {0.0, -7.0, -15.0};
  Rng rng(seed);
  std::vector<ranging::CalibrationSample> out;
  for (int i = 0; i < count; ++i) {
    const Channel c = Channel::from_index(i % 3);
    const double d = 0.5 + 9.5 * rng.uniform();
    const double fl = 20.0 * std::log10(oracle::frequency_hz(c.id()) / 2402e6);
    out.push_back({c, d,
                   beta + alpha[c.index()] - 10.0 * n * std::log10(d) - fl +
                       rng.normal(0.0, sigma)});
  }
  return out;
}

Verdict calibration() {
  const ranging::CalibrationOptions free_n{true, 2.0};
  const auto exact = ranging::calibrate(calibration_data(0.0, 300, 1), free_n);
  const double err = std::max({std::abs(exact.model.beta_db + 40.0),
                               std::abs(*exact.model.alpha_db[1] + 7.0),
                               std::abs(*exact.model.alpha_db[2] + 15.0),
                               std::abs(exact.model.exponent - 2.0)});
  const int runs = 200;
  std::array<int, 4> inside{};
  for (int r = 0; r < runs; ++r) {
    const auto fit = ranging::calibrate(calibration_data(2.0, 300, derive_seed(77, r)), free_n);
    inside[0] += std::abs(fit.model.beta_db + 40.0) <= 3 * fit.beta_se;
    inside[1] += std::abs(*fit.model.alpha_db[1] + 7.0) <= 3 * *fit.alpha_se[1];
    inside[2] += std::abs(*fit.model.alpha_db[2] + 15.0) <= 3 * *fit.alpha_se[2];
    inside[3] += std::abs(fit.model.exponent - 2.0) <= 3 * *fit.exponent_se;
  }
  const int worst = *std::min_element(inside.begin(), inside.end());
  return {err <= 1e-9 && worst >= 0.95 * runs,
          fmt("noiseless max error %.1e; within 3 SE: beta %.0f, alpha38 %.0f, alpha39 %.0f",
              err, inside[0], inside[1], inside[2]) +
              fmt(", exponent %.0f of %.0f runs (need 190)", inside[3], runs)};
}

// Distance RMSE of both estimators with the true channel as the estimate.
ranging::EstimatorComparison ranging_run(const std::array<double, 3>& offsets,
                                         std::uint64_t seed) {
  auto link_config = [&](double d) {
    ExperimentConfig cfg;
    cfg.advertisers = 1;
    cfg.duration = seconds(60);
    cfg.detector.max_scan_time = seconds(60);
    cfg.link = ranging::RadioLink{0.0, 0.0, d};
    cfg.fading.channel_offset_db = offsets;
    cfg.fading.shadowing_sigma_db = 2.0;
    return cfg;
  };
  std::vector<double> grid;
  for (double d = 1.0; d <= 5.0 + 1e-9; d += 0.5) grid.push_back(d);

  std::vector<ranging::CalibrationSample> train;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto run = simulate_run(link_config(grid[j]), derive_seed(seed, 1, j));
    for (const auto& r : run.trace.receptions)
      train.push_back({*r.packet.true_channel, grid[j], *r.packet.rssi_dbm});
  }
  const auto fit = ranging::calibrate(train);
  ranging::EstimatorComparison cmp;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto run = simulate_run(link_config(grid[j]), derive_seed(seed, 2, j));
    Trace packets = run.trace.packets();
    for (auto& p : packets) p.estimate = Classification::channel(*p.true_channel);
    cmp += ranging::compare_estimators(packets, grid[j], fit.model);
  }
  return cmp;
}

Verdict channel_aware_benefit() {
  double worst_ratio = 0.0, worst_rel = 0.0;
  ranging::EstimatorComparison spread_pool, flat_pool;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto spread = ranging_run({0.0, -7.0, -15.0}, s);
    const auto flat = ranging_run({0.0, 0.0, 0.0}, s);
    worst_ratio = std::max(worst_ratio,
                           spread.rmse_channel_aware() / spread.rmse_channel_agnostic());
    worst_rel = std::max(worst_rel, std::abs(flat.rmse_channel_aware() /
                                                 flat.rmse_channel_agnostic() -
                                             1.0));
    spread_pool += spread;
    flat_pool += flat;
  }
  return {worst_ratio < 0.5 && worst_rel < 0.05,
          fmt("15 dB spread: worst aware/agnostic RMSE ratio %.3f (pooled %.3f m vs %.3f m); ",
              worst_ratio, spread_pool.rmse_channel_aware(),
              spread_pool.rmse_channel_agnostic()) +
              fmt("zero spread: worst relative difference %.2f%% (limit 5%%)",
                  100.0 * worst_rel)};
}

Verdict window_guarantee() {
  using namespace simkit;
  struct Case {
    AndroidMode scan;
    Duration duration;
  };
  const Case cases[] = {{AndroidMode::kScanLowLatency, seconds(41000)},
                        {AndroidMode::kScanBalanced, seconds(41000)},
                        {AndroidMode::kScanLowPower, seconds(51300)}};
  std::size_t total = 0, empty = 0;
  std::uint64_t seed = 1;
  for (const auto& c : cases) {
    const ScanSettings scan = scan_preset(c.scan);
    AdvertiserOptions opt;
    opt.start_offset = milliseconds(37);
    const AdvSettings adv(milliseconds(100), milliseconds(10));
    const auto events = gen_advertising(adv, c.duration, seed, opt);
    const std::vector<RadioTime> restarts = {radio_at(Duration::zero())};
    const auto windows =
        gen_scan_windows(scan, behavior::Compliant{}, restarts, c.duration, seed);
    ClockModel clock;
    clock.drift_rate = 20e-6;
    const auto stamps = stamp_restarts(clock, restarts, seed);
    const auto trace =
        simulate_reception(events, windows, clock, stamps, LossModel{}, seed);
    std::vector<int> hits(windows.size(), 0);
    for (const auto& r : trace.receptions) ++hits[r.window];
    for (std::size_t i = 0; i < windows.size(); ++i) {
      // Skip windows that start before the first event or are cut short.
      if (windows[i].start < radio_at(opt.start_offset) ||
          windows[i].duration < scan.window())
        continue;
      ++total;
      if (hits[i] == 0) ++empty;
    }
    ++seed;
  }
  return {empty == 0 && total >= 10000 * 3,
          fmt("%.0f empty windows of %.0f (LOW_LATENCY, BALANCED, LOW_POWER)",
              static_cast<double>(empty), static_cast<double>(total))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string snapshot(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.filename().string() + "\n" + slurp(f);
  return all;
}

Verdict cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "blechannel_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "run.toml";
  {
    std::ofstream f(config);
    f << "seed = 5\n\n[simulate]\nduration = 240\ndrift_ppm = 30\njitter_ms = 25\n\n"
         "[accuracy]\nduration = 240\ndrift_ppm = 30\n\n[ranging]\nshadowing = 3\n";
  }
  const fs::path trace = root / "input.csv";
  {
    std::ostringstream o, e;
    run_cli({"blechannel", "simulate", "--config", config.string(), "--out", trace.string()},
            o, e);
  }
  const fs::path samples = root / "samples.csv";
  {
    std::ofstream f(samples);
    write_samples_csv(f, calibration_data(2.0, 300, 3));
  }

  const std::vector<std::vector<std::string>> commands = {
      {"simulate", "--behavior", "rapid-toggle", "--loss", "0.1", "--shadowing", "3"},
      {"classify", "--in", trace.string(), "--curve", "@/curve.csv"},
      {"calibrate", "--in", samples.string(), "--fit-exponent"},
      {"accuracy", "--reps", "3"},
      {"matrix", "--duration", "120"},
      {"ranging", "--grid", "1:3:1", "--per-distance", "20", "--reps", "2", "--out", "@"},
  };
  int differing = 0, failed = 0;
  std::string which;
  for (const auto& cmd : commands) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (cmd[0] + std::to_string(rep));
      fs::create_directories(dir);
      std::vector<std::string> args = {"blechannel", cmd[0], "--config", config.string()};
      for (std::size_t i = 1; i < cmd.size(); ++i) {
        std::string a = cmd[i];
        if (a.rfind('@', 0) == 0) a = dir.string() + a.substr(1);
        args.push_back(a);
      }
      std::ostringstream o, e;
      if (run_cli(args, o, e) != kExitOk) {
        ++failed;
        which += " " + cmd[0] + "(exit: " + e.str() + ")";
      }
      outputs[rep] = o.str() + "\n--files--\n" + snapshot(dir);
    }
    if (outputs[0] != outputs[1] || outputs[0].size() < 40) {
      ++differing;
      which += " " + cmd[0];
    }
  }
  fs::remove_all(root);
  return {differing == 0 && failed == 0,
          fmt("%.0f of %.0f subcommands differ between identical runs, %.0f failed", differing,
              static_cast<double>(commands.size()), failed) +
              which};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {"classifier oracle equivalence", oracle_equivalence},
      {"100% accuracy plateau over 10 min", plateau},
      {"drift decay onset and monotone decline", drift_decay},
      {"compatibility matrix structure", compatibility},
      {"free-space path loss exactness", friis},
      {"calibration recovery", calibration},
      {"channel-aware ranging benefit", channel_aware_benefit},
      {"reception in every scan window", window_guarantee},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << index << ". " << c.name << ": "
              << v.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : "criteria failed: ")
            << (failures == 0 ? "" : std::to_string(failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
