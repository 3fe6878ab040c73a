#pragma once

// Flow-start records -> fixed-window count series.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailmix/mixture.hpp"

namespace tailmix {

struct FlowRecord {
  double start_time = 0.0;  ///< seconds since epoch
  std::string proto;
  std::optional<int> sport;
  std::optional<int> dport;
};

/// Half-open [begin, end) seconds during which the host was up and connected.
struct UptimeInterval {
  double begin = 0.0;
  double end = 0.0;
};
using UptimeIntervals = std::vector<UptimeInterval>;

/// Throws DataError unless intervals are sorted, disjoint and begin < end.
void validate(const UptimeIntervals& uptime);

/// Window sizes used by the standard sweep: 4 s doubling up to 512 s.
inline constexpr std::array<int, 8> kStandardWindows{4, 8, 16, 32, 64, 128, 256, 512};

/// Header row required; comma or tab delimited; `start_time` column required,
/// `proto`, `sport`, `dport` optional. Errors carry 1-based line numbers.
std::vector<FlowRecord> read_flows(std::istream& in, const std::string& name = "<stream>");
std::vector<FlowRecord> read_flows(const std::filesystem::path& path);

/// Two columns `begin,end` (header optional).
UptimeIntervals read_uptime(std::istream& in, const std::string& name = "<stream>");
UptimeIntervals read_uptime(const std::filesystem::path& path);

struct BinningOutput {
  BinnedSeries series;
  std::size_t total_bins = 0;  ///< bins spanned before any filtering
  std::size_t downtime_bins_dropped = 0;
  std::size_t zero_bins_dropped = 0;
};

/// Counts starts in windows [k w, (k+1) w), anchored at floor(first_start / w) w
/// and ending at the window holding the last start. Windows not wholly inside
/// `uptime` are removed, then empty windows when `drop_zeros`.
BinningOutput bin_series(std::span<const FlowRecord> records, double bin_seconds,
                         const UptimeIntervals* uptime = nullptr, bool drop_zeros = true,
                         const std::string& source_id = "");

std::map<int, BinningOutput> standard_window_sweep(std::span<const FlowRecord> records,
                                                   const UptimeIntervals* uptime = nullptr,
                                                   bool drop_zeros = true, const std::string& source_id = "");

/// Series file: `#` + JSON header {bin_seconds, n, source_id} on line 1, then one count per line.
void write_series(std::ostream& out, const BinnedSeries& series);
void write_series(const std::filesystem::path& path, const BinnedSeries& series);
BinnedSeries read_series(std::istream& in, const std::string& name = "<stream>");
BinnedSeries read_series(const std::filesystem::path& path);

}  // namespace tailmix
