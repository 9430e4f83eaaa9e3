#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "blechannel/core.h"

namespace blechannel::harness {

// On-disk trace layout:
//
//   # blechannel-trace v1
//   # ts_ns=<int> ds_ns=<int> behavior=<tag> seed=<int>
//   # restarts_ns=<int>;<int>;...                  (optional)
//   recv_time_ns,device_id,true_channel,rssi_dbm[,est_channel]
//   <rows>
//
// true_channel is 37|38|39|unknown, rssi_dbm is a number or empty, est_channel
// is 37|38|39|guard|prestart or empty (packet not classified). Rows are
// ordered by recv_time_ns.
inline constexpr int kTraceVersion = 1;

struct TraceHeader {
  ScanSettings scan{std::chrono::milliseconds(4096),
                    std::chrono::milliseconds(4096)};
  std::string behavior = "unknown";
  std::uint64_t seed = 0;
  // App timestamps of scan restarts, if known.
  std::vector<AppTime> restarts;

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct TraceFile {
  TraceHeader header;
  Trace rows;
  bool has_estimates = false;

  friend bool operator==(const TraceFile&, const TraceFile&) = default;
};

// Throws ConfigError for rows that cannot be represented (device ids with
// separators, unordered rows).
void write_trace(std::ostream& out, const TraceFile& trace);
void write_trace(const std::string& path, const TraceFile& trace);

// Throws ParseError naming the offending line.
TraceFile read_trace(std::istream& in);
TraceFile read_trace(const std::string& path);

// Throws ValidationError if the header's scan settings differ from `expected`.
void validate_scan_settings(const TraceHeader& header,
                            const ScanSettings& expected);

}  // namespace blechannel::harness
