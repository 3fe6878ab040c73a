#include "tailmix/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tailmix/error.hpp"

namespace tailmix {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(trim(field));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& name, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << name << ":" << line << ": " << msg;
  throw DataError(os.str());
}

double parse_double(const std::string& text, const std::string& name, std::size_t line, const char* what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v))
    fail(name, line, std::string("malformed ") + what + " '" + text + "'");
  return v;
}

std::optional<int> parse_port(const std::string& text, const std::string& name, std::size_t line) {
  if (text.empty() || text == "-") return std::nullopt;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v < 0 || v > 65535)
    fail(name, line, "malformed port '" + text + "'");
  return v;
}

bool is_blank(const std::string& line) { return trim(line).empty(); }

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

void validate(const UptimeIntervals& uptime) {
  for (std::size_t i = 0; i < uptime.size(); ++i) {
    if (!(uptime[i].begin < uptime[i].end)) throw DataError("uptime interval " + std::to_string(i) + " has begin >= end");
    if (i > 0 && uptime[i].begin < uptime[i - 1].end)
      throw DataError("uptime intervals must be sorted and disjoint (interval " + std::to_string(i) + ")");
  }
}

std::vector<FlowRecord> read_flows(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 0;
  std::string header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_blank(line)) {
      header = line;
      break;
    }
  }
  if (header.empty()) throw DataError(name + ": empty flow file");

  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const auto cols = split(header, delim);
  auto column = [&](std::string_view key) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == key) return i;
    return std::nullopt;
  };
  const auto c_start = column("start_time");
  if (!c_start) fail(name, lineno, "header lacks the required 'start_time' column");
  const auto c_proto = column("proto");
  const auto c_sport = column("sport");
  const auto c_dport = column("dport");

  std::vector<FlowRecord> records;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto f = split(line, delim);
    if (f.size() != cols.size())
      fail(name, lineno, "expected " + std::to_string(cols.size()) + " fields, got " + std::to_string(f.size()));
    FlowRecord r;
    r.start_time = parse_double(f[*c_start], name, lineno, "start_time");
    if (r.start_time < 0.0) fail(name, lineno, "start_time must be nonnegative");
    if (c_proto) r.proto = f[*c_proto];
    if (c_sport) r.sport = parse_port(f[*c_sport], name, lineno);
    if (c_dport) r.dport = parse_port(f[*c_dport], name, lineno);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw DataError(name + ": no flow records");
  return records;
}

std::vector<FlowRecord> read_flows(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_flows(in, path.string());
}

UptimeIntervals read_uptime(std::istream& in, const std::string& name) {
  UptimeIntervals out;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto f = split(line, delim);
    if (first && !f.empty() && f[0] == "begin") {
      first = false;
      continue;
    }
    first = false;
    if (f.size() != 2) fail(name, lineno, "expected two fields begin,end");
    out.push_back({parse_double(f[0], name, lineno, "begin"), parse_double(f[1], name, lineno, "end")});
  }
  validate(out);
  return out;
}

UptimeIntervals read_uptime(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_uptime(in, path.string());
}

BinningOutput bin_series(std::span<const FlowRecord> records, double bin_seconds, const UptimeIntervals* uptime,
                         bool drop_zeros, const std::string& source_id) {
  if (!(bin_seconds > 0.0) || !std::isfinite(bin_seconds)) throw DomainError("bin_series: window size must be positive");
  if (records.empty()) throw DataError("bin_series: no flow records");
  if (uptime) validate(*uptime);

  std::vector<std::int64_t> index(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double t = records[i].start_time;
    if (!std::isfinite(t) || t < 0.0) throw DataError("bin_series: record " + std::to_string(i) + " has an invalid start time");
    index[i] = static_cast<std::int64_t>(std::floor(t / bin_seconds));
  }
  std::sort(index.begin(), index.end());
  const std::int64_t first = index.front();
  const std::int64_t last = index.back();

  std::vector<std::int64_t> counts(static_cast<std::size_t>(last - first + 1), 0);
  for (std::int64_t k : index) ++counts[static_cast<std::size_t>(k - first)];

  BinningOutput out;
  out.total_bins = counts.size();
  out.series.bin_seconds = bin_seconds;
  out.series.source_id = source_id;
  out.series.counts.reserve(counts.size());

  std::size_t u = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double lo = static_cast<double>(first + static_cast<std::int64_t>(j)) * bin_seconds;
    const double hi = lo + bin_seconds;
    if (uptime) {
      while (u < uptime->size() && (*uptime)[u].end < hi) ++u;
      const bool inside = u < uptime->size() && (*uptime)[u].begin <= lo && hi <= (*uptime)[u].end;
      if (!inside) {
        ++out.downtime_bins_dropped;
        continue;
      }
    }
    if (drop_zeros && counts[j] == 0) {
      ++out.zero_bins_dropped;
      continue;
    }
    out.series.counts.push_back(counts[j]);
  }
  return out;
}

std::map<int, BinningOutput> standard_window_sweep(std::span<const FlowRecord> records, const UptimeIntervals* uptime,
                                                   bool drop_zeros, const std::string& source_id) {
  std::map<int, BinningOutput> out;
  for (int w : kStandardWindows) out.emplace(w, bin_series(records, w, uptime, drop_zeros, source_id));
  return out;
}

void write_series(std::ostream& out, const BinnedSeries& series) {
  nlohmann::ordered_json header;
  header["bin_seconds"] = series.bin_seconds;
  header["n"] = series.n();
  header["source_id"] = series.source_id;
  out << '#' << header.dump() << '\n';
  for (std::int64_t c : series.counts) out << c << '\n';
}

void write_series(const std::filesystem::path& path, const BinnedSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_series(out, series);
}

BinnedSeries read_series(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') fail(name, 1, "missing '#' JSON header line");
  BinnedSeries s;
  std::optional<std::size_t> declared_n;
  try {
    const auto header = nlohmann::json::parse(line.substr(1));
    s.bin_seconds = header.value("bin_seconds", 0.0);
    s.source_id = header.value("source_id", std::string{});
    if (header.contains("n")) declared_n = header.at("n").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(name, 1, std::string("bad header: ") + e.what());
  }
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || v < 0) fail(name, lineno, "malformed count '" + t + "'");
    s.counts.push_back(v);
  }
  if (declared_n && *declared_n != s.n())
    fail(name, lineno, "header declares n = " + std::to_string(*declared_n) + " but file holds " + std::to_string(s.n()));
  return s;
}

BinnedSeries read_series(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  auto s = read_series(in, path.string());
  if (s.source_id.empty()) s.source_id = path.stem().string();
  return s;
}

}  // namespace tailmix
