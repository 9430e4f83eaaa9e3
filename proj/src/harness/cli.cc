#include "blechannel/cli.h"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "blechannel/experiment.h"
#include "blechannel/text.h"
#include "blechannel/trace_io.h"

namespace blechannel::harness {

namespace {

namespace fs = std::filesystem;

constexpr const char* kSubcommands[] = {"simulate", "classify", "calibrate",
                                        "accuracy", "matrix",   "ranging"};

// Scenario knobs shared by simulate, accuracy and matrix. Unset values keep
// the subcommand's base configuration.
struct SimFlags {
  std::string behavior = "compliant";
  std::string scan_mode = "SCAN_MODE_LOW_LATENCY";
  std::optional<double> ts, ds;
  std::string adv_mode = "ADVERTISE_MODE_LOW_LATENCY";
  std::optional<double> ta0, rho_max;
  std::optional<int> advertisers;
  std::optional<double> duration, restart_every;
  std::optional<double> drift_ppm, jitter_ms, clock_offset;
  std::optional<double> loss;
  double distance = 1.0, tx_power = 0.0, gain = 0.0;
  std::string offsets = "0,0,0";
  double shadowing = 0.0, bias = 0.0;
  bool no_quantize = false;
  double alt_ts = 5.0;
  std::optional<double> alt_ds;
  double balanced_offset_min = 0.0;
  std::optional<double> balanced_offset_max;
  double toggle_min_ms = 100.0, toggle_max_ms = 200.0;
  std::string sequence;
};

struct DetectorFlags {
  double tg = 0.2;
  double max_scan_time = 600.0;
  std::optional<double> detector_ts;
  std::optional<double> idle_timeout;
};

void add_sim_flags(CLI::App& app, SimFlags& f) {
  app.add_option("--behavior", f.behavior,
                 "Scanner behavior: compliant, balanced-offset, alt-interval, "
                 "rapid-toggle, nonstandard-order, continue-channel");
  app.add_option("--scan-mode", f.scan_mode, "Android scan preset");
  app.add_option("--ts", f.ts, "Scan interval [s] (overrides --scan-mode)");
  app.add_option("--ds", f.ds, "Scan window [s] (overrides --scan-mode)");
  app.add_option("--adv-mode", f.adv_mode, "Android advertise preset");
  app.add_option("--ta0", f.ta0, "Static advertising interval [s]");
  app.add_option("--rho-max", f.rho_max, "Bound of the random advertising delay [s]");
  app.add_option("--advertisers", f.advertisers, "Number of advertisers");
  app.add_option("--duration", f.duration, "Simulated time [s]");
  app.add_option("--restart-every", f.restart_every, "Scan restart interval [s]");
  app.add_option("--drift-ppm", f.drift_ppm, "Radio vs app clock drift [ppm]");
  app.add_option("--jitter-ms", f.jitter_ms, "Max restart timestamp jitter [ms]");
  app.add_option("--clock-offset", f.clock_offset, "Initial app clock offset [s]");
  app.add_option("--loss", f.loss, "Independent packet drop probability");
  app.add_option("--distance", f.distance, "Link distance [m]");
  app.add_option("--tx-power", f.tx_power, "Transmit power [dBm]");
  app.add_option("--gain", f.gain, "Antenna gain product [dB]");
  app.add_option("--offsets", f.offsets, "Per-channel RSSI offsets 37,38,39 [dB]");
  app.add_option("--shadowing", f.shadowing, "RSSI noise standard deviation [dB]");
  app.add_option("--bias", f.bias, "Constant RSSI bias [dB]");
  app.add_flag("--no-quantize", f.no_quantize, "Keep real-valued RSSI");
  app.add_option("--alt-ts", f.alt_ts, "alt-interval: device scan interval [s]");
  app.add_option("--alt-ds", f.alt_ds, "alt-interval: device scan window [s]");
  app.add_option("--balanced-offset-min", f.balanced_offset_min,
                 "balanced-offset: min start offset [s]");
  app.add_option("--balanced-offset-max", f.balanced_offset_max,
                 "balanced-offset: max start offset [s]");
  app.add_option("--toggle-min-ms", f.toggle_min_ms, "rapid-toggle: min window [ms]");
  app.add_option("--toggle-max-ms", f.toggle_max_ms, "rapid-toggle: max window [ms]");
  app.add_option("--sequence", f.sequence,
                 "nonstandard-order: fixed channel cycle, e.g. 38,39,37,39");
}

void add_detector_flags(CLI::App& app, DetectorFlags& f) {
  app.add_option("--tg", f.tg, "Guard time [s]");
  app.add_option("--max-scan-time", f.max_scan_time, "Max scan time before restart [s]");
  app.add_option("--detector-ts", f.detector_ts,
                 "Scan interval assumed by the detector [s] (default: the scanner's)");
  app.add_option("--idle-timeout", f.idle_timeout, "No-signal timeout [s]");
}

std::array<double, 3> parse_offsets(const std::string& s) {
  const auto parts = text::split(s, ',');
  if (parts.size() != 3) throw ConfigError("--offsets needs three values");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    auto v = text::parse_double(text::trim(parts[i]));
    if (!v) throw ConfigError("bad --offsets value '" + std::string(parts[i]) + "'");
    out[i] = *v;
  }
  return out;
}

simkit::ScannerBehavior make_behavior(const SimFlags& f, const std::string& tag) {
  using namespace simkit::behavior;
  auto b = simkit::behavior_from_tag(tag);
  if (auto* alt = std::get_if<AltInterval>(&b)) {
    alt->interval = from_seconds(f.alt_ts);
    if (f.alt_ds) alt->window = from_seconds(*f.alt_ds);
  } else if (auto* bal = std::get_if<BalancedOffset>(&b)) {
    bal->offset_min = from_seconds(f.balanced_offset_min);
    if (f.balanced_offset_max) bal->offset_max = from_seconds(*f.balanced_offset_max);
  } else if (auto* rt = std::get_if<RapidToggle>(&b)) {
    rt->min_window = from_seconds(f.toggle_min_ms * 1e-3);
    rt->max_window = from_seconds(f.toggle_max_ms * 1e-3);
  } else if (auto* ns = std::get_if<NonStandardOrder>(&b)) {
    if (!f.sequence.empty()) {
      for (auto item : text::split(f.sequence, ',')) {
        auto id = text::parse_int(text::trim(item));
        if (!id) throw ConfigError("bad --sequence entry '" + std::string(item) + "'");
        ns->sequence.push_back(Channel(static_cast<int>(*id)));
      }
    }
  }
  return b;
}

ScanSettings make_scan(const SimFlags& f) {
  ScanSettings scan = scan_preset(parse_android_mode(f.scan_mode));
  if (f.ts || f.ds) {
    const Duration ts = f.ts ? from_seconds(*f.ts) : scan.interval();
    const Duration ds = f.ds ? from_seconds(*f.ds) : std::min(scan.window(), ts);
    scan = ScanSettings(ts, ds);
  }
  return scan;
}

void apply_sim_flags(const SimFlags& f, ExperimentConfig& cfg) {
  cfg.scan = make_scan(f);
  AdvSettings adv = adv_preset(parse_android_mode(f.adv_mode));
  if (f.ta0 || f.rho_max) {
    adv = AdvSettings(f.ta0 ? from_seconds(*f.ta0) : adv.base_interval(),
                      f.rho_max ? from_seconds(*f.rho_max) : adv.rho_max());
  }
  cfg.adv = adv;
  cfg.behavior = make_behavior(f, f.behavior);
  if (f.advertisers) cfg.advertisers = *f.advertisers;
  if (f.duration) cfg.duration = from_seconds(*f.duration);
  if (f.restart_every) cfg.restart_interval = from_seconds(*f.restart_every);
  if (f.drift_ppm) cfg.clock.drift_rate = *f.drift_ppm * 1e-6;
  if (f.jitter_ms) cfg.clock.restart_jitter = from_seconds(*f.jitter_ms * 1e-3);
  if (f.clock_offset) cfg.clock.initial_offset = from_seconds(*f.clock_offset);
  if (f.loss) cfg.loss.drop_probability = *f.loss;
  cfg.link = ranging::RadioLink{f.tx_power, f.gain, f.distance};
  cfg.fading.channel_offset_db = parse_offsets(f.offsets);
  cfg.fading.shadowing_sigma_db = f.shadowing;
  cfg.fading.bias_db = f.bias;
  cfg.fading.quantize = !f.no_quantize;
}

detector::DetectorConfig make_detector(const DetectorFlags& f, const ScanSettings& scan) {
  detector::DetectorConfig d;
  d.scan_settings = scan;
  if (f.detector_ts) {
    const Duration ts = from_seconds(*f.detector_ts);
    d.scan_settings = ScanSettings(ts, ts);
  }
  d.guard_time = from_seconds(f.tg);
  d.max_scan_time = from_seconds(f.max_scan_time);
  if (f.idle_timeout) d.idle_timeout = from_seconds(*f.idle_timeout);
  d.validate();
  return d;
}

// Writes via a buffer so failed runs leave no partial output.
void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  file << content;
  if (!file) throw Error("failed writing '" + path + "'");
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return std::string(v.substr(1, v.size() - 2));
  }
  return std::string(v);
}

// Flat key = value file; [section] applies only to the named subcommand.
std::vector<std::string> config_file_args(const std::string& path,
                                          const std::string& subcommand) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::vector<std::string> args;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = text::trim(line);
    if (const auto hash = body.find('#');
        hash != std::string_view::npos && body.find('"') == std::string_view::npos) {
      body = text::trim(body.substr(0, hash));
    }
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(line_no, "malformed section header");
      section = std::string(text::trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    if (!section.empty() && section != subcommand) continue;
    std::string key(text::trim(body.substr(0, eq)));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = unquote(text::trim(body.substr(eq + 1)));
    if (key == "config") throw ParseError(line_no, "config files cannot nest");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::string simulate_command(const SimFlags& flags, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.scenario = "simulate";
  apply_sim_flags(flags, cfg);
  // Detector settings do not matter here; keep them valid for the scan.
  cfg.detector.scan_settings = cfg.scan;
  cfg.detector.guard_time = Duration::zero();
  cfg.detector.max_scan_time = detector::kMaxScanTimeCap;
  if (!cfg.restart_interval) cfg.restart_interval = std::min(cfg.duration, detector::kMaxScanTimeCap);

  const auto run = simulate_run(cfg, seed);
  TraceFile file;
  file.header.scan = cfg.scan;
  file.header.behavior = std::string(simkit::behavior_tag(cfg.behavior));
  file.header.seed = seed;
  file.header.restarts = run.trace.restart_times();
  file.rows = run.trace.packets();
  std::ostringstream buf;
  write_trace(buf, file);
  return buf.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  // Pull out --config and splice the file's flags right after the subcommand.
  std::vector<std::string> args;
  std::string config_path;
  for (std::size_t i = 0; i < raw_args.size(); ++i) {
    const std::string& a = raw_args[i];
    if (i > 0 && a == "--config") {
      if (i + 1 >= raw_args.size()) {
        err << "--config requires a file argument\n";
        return kExitUsage;
      }
      config_path = raw_args[++i];
    } else if (i > 0 && a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      args.push_back(a);
    }
  }
  if (args.empty()) args.emplace_back("blechannel");
  if (!config_path.empty()) {
    auto sub = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) {
      return std::find(std::begin(kSubcommands), std::end(kSubcommands), a) !=
             std::end(kSubcommands);
    });
    if (sub == args.end()) {
      err << "--config needs a subcommand\n";
      return kExitUsage;
    }
    try {
      const auto extra = config_file_args(config_path, *sub);
      args.insert(sub + 1, extra.begin(), extra.end());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    }
  }

  CLI::App app{"Advertising-channel detection and channel-aware ranging for BLE scanners",
               "blechannel"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "blechannel 1.0");

  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Base random seed")->envname("BLECHANNEL_SEED");

  SimFlags sim_flags;
  DetectorFlags det_flags;
  std::string out_path, in_path, curve_path, restart_source = "header", behaviors;
  double bucket = 30.0, threshold = 0.99;
  int reps = 1;
  bool allow_mismatch = false, fit_exponent = false;
  double exponent = 2.0;
  std::optional<double> classify_ts, classify_ds;

  auto* simulate = app.add_subcommand("simulate", "Simulate a reception trace");
  add_sim_flags(*simulate, sim_flags);
  simulate->add_option("--out", out_path, "Trace file (default: stdout)");

  auto* classify = app.add_subcommand("classify", "Estimate the channel of each packet");
  classify->add_option("--in", in_path, "Input trace")->required();
  classify->add_option("--out", out_path, "Classified trace (default: stdout)");
  classify->add_option("--ts", classify_ts, "Scan interval [s] (default: from header)");
  classify->add_option("--ds", classify_ds, "Scan window [s] (default: from header)");
  add_detector_flags(*classify, det_flags);
  classify->add_option("--restarts", restart_source,
                       "header: restart times from the trace; auto: run the "
                       "low-power/low-latency state machine")
      ->check(CLI::IsMember({"header", "auto"}));
  classify->add_option("--curve", curve_path, "Also write the accuracy curve CSV");
  classify->add_option("--bucket", bucket, "Curve bucket width [s]");
  classify->add_flag("--allow-settings-mismatch", allow_mismatch,
                     "Classify even if --ts/--ds differ from the trace header");

  auto* calibrate = app.add_subcommand("calibrate", "Fit per-channel RSSI offsets");
  calibrate->add_option("--in", in_path, "Samples CSV (channel,distance_m,rssi_dbm)")
      ->required();
  calibrate->add_option("--out", out_path, "Calibration file (default: stdout)");
  calibrate->add_flag("--fit-exponent", fit_exponent, "Fit the path-loss exponent");
  calibrate->add_option("--exponent", exponent, "Fixed path-loss exponent");

  auto* accuracy = app.add_subcommand("accuracy", "Detection accuracy vs time since restart");
  add_sim_flags(*accuracy, sim_flags);
  add_detector_flags(*accuracy, det_flags);
  accuracy->add_option("--bucket", bucket, "Bucket width [s]");
  accuracy->add_option("--reps", reps, "Repetitions (seeds seed..seed+reps-1)");
  accuracy->add_option("--out", out_path, "Curve CSV (default: stdout)");

  auto* matrix = app.add_subcommand("matrix", "Compatibility of scanner behaviors");
  add_sim_flags(*matrix, sim_flags);
  add_detector_flags(*matrix, det_flags);
  matrix->add_option("--behaviors", behaviors, "Comma-separated behavior tags (default: all)");
  matrix->add_option("--threshold", threshold, "Minimum accuracy to count as compatible");
  matrix->add_option("--reps", reps, "Repetitions per behavior");
  matrix->add_option("--out", out_path, "Matrix CSV (default: stdout)");

  auto* ranging_cmd = app.add_subcommand("ranging", "Channel-aware vs agnostic ranging");
  std::string grid = "0.5:10:0.5";
  double per_distance = 60.0;
  ranging_cmd->add_option("--grid", grid, "Distances as start:stop:step [m]");
  ranging_cmd->add_option("--per-distance", per_distance, "Scan time per distance [s]");
  SimFlags link_flags;
  link_flags.shadowing = 2.0;
  ranging_cmd->add_option("--offsets", link_flags.offsets, "Per-channel offsets 37,38,39 [dB]");
  ranging_cmd->add_option("--shadowing", link_flags.shadowing, "RSSI noise sigma [dB]");
  ranging_cmd->add_option("--tx-power", link_flags.tx_power, "Transmit power [dBm]");
  ranging_cmd->add_option("--gain", link_flags.gain, "Antenna gain product [dB]");
  ranging_cmd->add_flag("--no-quantize", link_flags.no_quantize, "Keep real-valued RSSI");
  ranging_cmd->add_flag("--fit-exponent", fit_exponent, "Fit the path-loss exponent");
  ranging_cmd->add_option("--tg", det_flags.tg, "Guard time [s]");
  ranging_cmd->add_option("--reps", reps, "Repetitions");
  ranging_cmd->add_option("--out", out_path, "Output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) {
      write_output(out_path, simulate_command(sim_flags, seed), out);
    } else if (*classify) {
      TraceFile trace = read_trace(in_path);
      ScanSettings scan = trace.header.scan;
      if (classify_ts || classify_ds) {
        const Duration ts = classify_ts ? from_seconds(*classify_ts) : scan.interval();
        const Duration ds = classify_ds ? from_seconds(*classify_ds) : std::min(scan.window(), ts);
        scan = ScanSettings(ts, ds);
        if (!allow_mismatch) validate_scan_settings(trace.header, scan);
      }
      const auto cfg = make_detector(det_flags, scan);
      std::vector<AppTime> restarts;
      if (restart_source == "header") {
        if (trace.header.restarts.empty()) {
          throw ValidationError("trace header has no restart times; use --restarts auto");
        }
        restarts = trace.header.restarts;
      }
      const auto classified = detector::classify_trace(trace.rows, cfg, restarts);
      TraceFile result;
      result.header = trace.header;
      result.header.restarts = classified.restarts;
      result.rows = classified.packets;
      result.has_estimates = true;
      std::ostringstream buf;
      write_trace(buf, result);
      write_output(out_path, buf.str(), out);
      if (!curve_path.empty()) {
        const auto curve = make_accuracy_curve(classified.packets, classified.restarts,
                                               from_seconds(bucket), cfg.max_scan_time);
        std::ostringstream cbuf;
        write_curve_csv(cbuf, curve);
        write_output(curve_path, cbuf.str(), out);
      }
    } else if (*calibrate) {
      std::ifstream in(in_path, std::ios::binary);
      if (!in) throw Error("cannot open '" + in_path + "'");
      const auto samples = read_samples_csv(in);
      ranging::CalibrationOptions options;
      options.fit_exponent = fit_exponent;
      options.exponent = exponent;
      const auto fit = ranging::calibrate(samples, options);
      std::ostringstream buf;
      ranging::write_calibration(buf, fit.model);
      write_output(out_path, buf.str(), out);
    } else if (*accuracy) {
      ExperimentConfig cfg;
      cfg.scenario = "accuracy";
      apply_sim_flags(sim_flags, cfg);
      cfg.detector = make_detector(det_flags, cfg.scan);
      cfg.bucket_width = from_seconds(bucket);
      cfg.seed = seed;
      cfg.repetitions = reps;
      const auto report = run_accuracy_experiment(cfg);
      std::ostringstream buf;
      write_curve_csv(buf, report.pooled);
      write_output(out_path, buf.str(), out);
      if (!out_path.empty()) {
        const auto overall = report.pooled.overall();
        out << "classified " << report.pooled.classified() << ", correct "
            << report.pooled.correct() << ", unclassified " << report.pooled.unclassified()
            << ", accuracy " << (overall ? text::format_double(*overall) : "n/a") << '\n'
            << "note: clock drift and restart jitter are synthetic model inputs\n";
      }
    } else if (*matrix) {
      ExperimentConfig cfg = default_matrix_config();
      const ExperimentConfig base = cfg;
      apply_sim_flags(sim_flags, cfg);
      if (!sim_flags.duration) cfg.duration = base.duration;
      if (!sim_flags.restart_every) cfg.restart_interval = base.restart_interval;
      if (!sim_flags.drift_ppm) cfg.clock.drift_rate = base.clock.drift_rate;
      if (!sim_flags.jitter_ms) cfg.clock.restart_jitter = base.clock.restart_jitter;
      cfg.detector = make_detector(det_flags, cfg.scan);
      cfg.seed = seed;
      cfg.repetitions = reps;

      std::vector<MatrixEntry> entries;
      for (auto& e : default_matrix_entries()) {
        if (!behaviors.empty()) {
          const auto tags = text::split(behaviors, ',');
          if (std::find(tags.begin(), tags.end(), e.label) == tags.end()) continue;
        }
        if (std::holds_alternative<simkit::behavior::AltInterval>(e.behavior)) {
          e.behavior = make_behavior(sim_flags, e.label);
          const auto& alt = std::get<simkit::behavior::AltInterval>(e.behavior);
          e.detector_scan = ScanSettings(alt.interval, alt.interval);
        } else {
          e.behavior = make_behavior(sim_flags, e.label);
        }
        entries.push_back(std::move(e));
      }
      if (entries.empty()) throw ConfigError("--behaviors selected nothing");
      const auto rows = run_compatibility_matrix(entries, cfg, threshold);
      std::ostringstream buf;
      write_matrix_csv(buf, rows);
      write_output(out_path, buf.str(), out);
    } else if (*ranging_cmd) {
      const auto g = text::split(grid, ':');
      std::optional<double> start, stop, step;
      if (g.size() == 3) {
        start = text::parse_double(g[0]);
        stop = text::parse_double(g[1]);
        step = text::parse_double(g[2]);
      }
      if (!start || !stop || !step || !(*step > 0.0) || *stop < *start) {
        throw ConfigError("--grid must be start:stop:step with step > 0");
      }
      RangingConfig cfg;
      for (int i = 0;; ++i) {
        const double d = *start + i * *step;
        if (d > *stop + 1e-9 * *step) break;
        cfg.distances_m.push_back(d);
      }
      cfg.link = ranging::RadioLink{link_flags.tx_power, link_flags.gain, 1.0};
      cfg.fading.channel_offset_db = parse_offsets(link_flags.offsets);
      cfg.fading.shadowing_sigma_db = link_flags.shadowing;
      cfg.fading.quantize = !link_flags.no_quantize;
      cfg.per_distance = from_seconds(per_distance);
      cfg.detector.guard_time = from_seconds(det_flags.tg);
      cfg.calibration.fit_exponent = fit_exponent;
      cfg.seed = seed;
      cfg.repetitions = reps;
      const auto report = run_ranging_experiment(cfg);

      fs::create_directories(out_path);
      std::ostringstream curves, samples, calib, summary;
      write_rssi_curves_csv(curves, report.curves);
      write_samples_csv(samples, report.samples);
      ranging::write_calibration(calib, report.runs.front().fit.model);
      const auto& fit = report.runs.front().fit;
      summary << "samples " << fit.samples << '\n'
              << "beta_db " << text::format_double(fit.model.beta_db) << '\n';
      for (int i = 1; i < 3; ++i) {
        summary << "alpha_" << 37 + i << "_db "
                << (fit.model.alpha_db[i] ? text::format_double(*fit.model.alpha_db[i]) : "none")
                << '\n';
      }
      summary << "exponent " << text::format_double(fit.model.exponent) << '\n'
              << "rmse_channel_aware_m "
              << text::format_double(report.pooled.rmse_channel_aware()) << '\n'
              << "rmse_channel_agnostic_m "
              << text::format_double(report.pooled.rmse_channel_agnostic()) << '\n';
      write_output((fs::path(out_path) / "rssi_vs_distance.csv").string(), curves.str(), out);
      write_output((fs::path(out_path) / "samples.csv").string(), samples.str(), out);
      write_output((fs::path(out_path) / "calibration.txt").string(), calib.str(), out);
      write_output((fs::path(out_path) / "report.txt").string(), summary.str(), out);
      out << summary.str();
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace blechannel::harness
