#include "blechannel/trace_io.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "blechannel/text.h"

namespace blechannel::harness {

namespace {

constexpr std::string_view kMagic = "# blechannel-trace v";
constexpr std::string_view kColumns = "recv_time_ns,device_id,true_channel,rssi_dbm";
constexpr std::string_view kEstColumn = ",est_channel";

std::string estimate_text(const std::optional<Classification>& est) {
  if (!est) return "";
  if (est->has_channel()) return std::to_string(est->channel().id());
  return est->reason() == UnclassifiedReason::kGuardZone ? "guard" : "prestart";
}

}  // namespace

void write_trace(std::ostream& out, const TraceFile& trace) {
  const auto& h = trace.header;
  if (h.behavior.empty() || h.behavior.find_first_of(" \t\r\n") != std::string::npos) {
    throw ConfigError("behavior tag must be a non-empty word");
  }
  out << kMagic << kTraceVersion << '\n';
  out << "# ts_ns=" << h.scan.interval().count() << " ds_ns=" << h.scan.window().count()
      << " behavior=" << h.behavior << " seed=" << h.seed << '\n';
  if (!h.restarts.empty()) {
    out << "# restarts_ns=";
    for (std::size_t i = 0; i < h.restarts.size(); ++i) {
      if (i > 0) out << ';';
      out << h.restarts[i].time_since_epoch().count();
    }
    out << '\n';
  }
  out << kColumns;
  if (trace.has_estimates) out << kEstColumn;
  out << '\n';

  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& r = trace.rows[i];
    if (i > 0 && r.recv_time < trace.rows[i - 1].recv_time) {
      throw ConfigError("write_trace: rows must be ordered by reception time");
    }
    if (r.device_id.empty() || r.device_id.find_first_of(",\r\n") != std::string::npos) {
      throw ConfigError("write_trace: device id '" + r.device_id +
                        "' is empty or contains a separator");
    }
    out << r.recv_time.time_since_epoch().count() << ',' << r.device_id << ','
        << (r.true_channel ? std::to_string(r.true_channel->id()) : "unknown") << ','
        << (r.rssi_dbm ? text::format_double(*r.rssi_dbm) : "");
    if (trace.has_estimates) out << ',' << estimate_text(r.estimate);
    out << '\n';
  }
}

void write_trace(const std::string& path, const TraceFile& trace) {
  // Serialize first so a failed write never leaves a partial file behind.
  std::ostringstream buf;
  write_trace(buf, trace);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << buf.str();
  if (!out) throw Error("failed writing '" + path + "'");
}

TraceFile read_trace(std::istream& in) {
  TraceFile trace;
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line.rfind(kMagic, 0) != 0) {
    throw ParseError(1, "missing '# blechannel-trace v<N>' header");
  }
  if (line.substr(kMagic.size()) != std::to_string(kTraceVersion)) {
    throw ParseError(1, "unsupported trace version '" + line.substr(kMagic.size()) + "'");
  }

  if (!next_line() || line.rfind("# ", 0) != 0) {
    throw ParseError(2, "missing settings header line");
  }
  {
    std::optional<std::int64_t> ts, ds;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> behavior;
    for (auto field : text::split(std::string_view(line).substr(2), ' ')) {
      if (field.empty()) continue;
      const auto eq = field.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
      const auto key = field.substr(0, eq);
      const auto value = field.substr(eq + 1);
      if (key == "ts_ns") {
        ts = text::parse_int(value);
        if (!ts) throw ParseError(line_no, "bad ts_ns");
      } else if (key == "ds_ns") {
        ds = text::parse_int(value);
        if (!ds) throw ParseError(line_no, "bad ds_ns");
      } else if (key == "behavior") {
        if (value.empty()) throw ParseError(line_no, "empty behavior tag");
        behavior = std::string(value);
      } else if (key == "seed") {
        seed = text::parse_uint(value);
        if (!seed) throw ParseError(line_no, "bad seed");
      } else {
        throw ParseError(line_no, "unknown header key '" + std::string(key) + "'");
      }
    }
    if (!ts || !ds || !behavior || !seed) {
      throw ParseError(line_no, "settings header needs ts_ns, ds_ns, behavior and seed");
    }
    try {
      trace.header.scan = ScanSettings(Duration{*ts}, Duration{*ds});
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    trace.header.behavior = *behavior;
    trace.header.seed = *seed;
  }

  if (!next_line()) throw ParseError(line_no + 1, "missing column header");
  if (line.rfind("# restarts_ns=", 0) == 0) {
    const std::string_view list = std::string_view(line).substr(14);
    if (!list.empty()) {
      for (auto item : text::split(list, ';')) {
        auto ns = text::parse_int(item);
        if (!ns) throw ParseError(line_no, "bad restart timestamp");
        const AppTime t = at_ns<AppClock>(*ns);
        if (!trace.header.restarts.empty() && t < trace.header.restarts.back()) {
          throw ParseError(line_no, "restart timestamps must be ordered");
        }
        trace.header.restarts.push_back(t);
      }
    }
    if (!next_line()) throw ParseError(line_no + 1, "missing column header");
  }

  if (line == std::string(kColumns)) {
    trace.has_estimates = false;
  } else if (line == std::string(kColumns) + std::string(kEstColumn)) {
    trace.has_estimates = true;
  } else {
    throw ParseError(line_no, "unexpected column header '" + line + "'");
  }
  const std::size_t columns = trace.has_estimates ? 5 : 4;

  while (next_line()) {
    if (line.empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != columns) {
      throw ParseError(line_no, "expected " + std::to_string(columns) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    PacketRecord r;
    auto ns = text::parse_int(fields[0]);
    if (!ns) throw ParseError(line_no, "bad recv_time_ns");
    r.recv_time = at_ns<AppClock>(*ns);
    if (!trace.rows.empty() && r.recv_time < trace.rows.back().recv_time) {
      throw ParseError(line_no, "rows are not ordered by recv_time_ns");
    }
    if (fields[1].empty()) throw ParseError(line_no, "empty device_id");
    r.device_id = std::string(fields[1]);

    if (fields[2] != "unknown") {
      auto id = text::parse_int(fields[2]);
      if (!id || *id < 37 || *id > 39) {
        throw ParseError(line_no, "bad true_channel '" + std::string(fields[2]) + "'");
      }
      r.true_channel = Channel(static_cast<int>(*id));
    }
    if (!fields[3].empty()) {
      auto v = text::parse_double(fields[3]);
      if (!v || !std::isfinite(*v)) throw ParseError(line_no, "bad rssi_dbm");
      r.rssi_dbm = *v;
    }
    if (trace.has_estimates && !fields[4].empty()) {
      const auto est = fields[4];
      if (est == "guard") {
        r.estimate = Classification::unclassified(UnclassifiedReason::kGuardZone);
      } else if (est == "prestart") {
        r.estimate = Classification::unclassified(UnclassifiedReason::kPreStart);
      } else {
        auto id = text::parse_int(est);
        if (!id || *id < 37 || *id > 39) {
          throw ParseError(line_no, "bad est_channel '" + std::string(est) + "'");
        }
        r.estimate = Classification::channel(Channel(static_cast<int>(*id)));
      }
    }
    trace.rows.push_back(std::move(r));
  }
  return trace;
}

TraceFile read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_trace(in);
}

void validate_scan_settings(const TraceHeader& header, const ScanSettings& expected) {
  if (header.scan != expected) {
    throw ValidationError(
        "trace was recorded with ts_ns=" + std::to_string(header.scan.interval().count()) +
        " ds_ns=" + std::to_string(header.scan.window().count()) +
        " but ts_ns=" + std::to_string(expected.interval().count()) +
        " ds_ns=" + std::to_string(expected.window().count()) + " was requested");
  }
}

}  // namespace blechannel::harness
