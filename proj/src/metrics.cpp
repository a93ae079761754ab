#include "permasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "permasim/numfmt.hpp"

namespace permasim::metrics {

double str(std::span<const telemetry::TransactionResolution> resolutions) {
  if (resolutions.empty()) throw std::invalid_argument("STR of an empty transaction set is undefined");
  const auto ok = std::count_if(resolutions.begin(), resolutions.end(), [](const auto& r) {
    return r.outcome == telemetry::Outcome::Success;
  });
  return static_cast<double>(ok) / static_cast<double>(resolutions.size());
}

double t_quantile(double p, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

double sorted_mean(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("mean of no samples");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

MeanCi mean_ci99(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("mean_ci99 needs at least 2 samples");
  const double mean = sorted_mean(samples);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) return {mean, 0.0};
  std::vector<double> dev;
  dev.reserve(samples.size());
  for (double x : samples) dev.push_back((x - mean) * (x - mean));
  const double k = static_cast<double>(samples.size());
  const double var = sorted_mean(dev) * k / (k - 1.0);
  return {mean, t_quantile(0.995, k - 1.0) * std::sqrt(var / k)};
}

// ---------------------------------------------------------------------------

namespace {

std::string point_name(const std::string& mode, double pb0, std::uint32_t spots, std::uint32_t r) {
  return "(" + mode + ", pb0=" + format_double(pb0) + ", spots=" + std::to_string(spots) +
         ", redundancy=" + std::to_string(r) + ")";
}

bool same_point(const StrReport& a, const RawRow& b) {
  return a.mode == b.mode && a.pb0 == b.pb0 && a.spots == b.spots && a.redundancy == b.redundancy;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <typename Row, typename Parse>
std::vector<Row> read_csv(std::istream& in, const char* header, std::size_t columns, Parse parse) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::runtime_error("unexpected CSV header '" + line + "'");
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != columns) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " fields");
    }
    try {
      rows.push_back(parse(f));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

template <typename T>
T to_uint(const std::string& s) {
  return static_cast<T>(parse_u64(s));
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

IncompleteGrid::IncompleteGrid(std::vector<std::string> missing)
    : std::runtime_error([&] {
        std::string msg = "incomplete grid, missing " + std::to_string(missing.size()) + " point(s):";
        for (const auto& m : missing) msg += "\n  " + m;
        return msg;
      }()),
      missing_(std::move(missing)) {}

std::vector<StrReport> aggregate(std::span<const RawRow> rows) {
  std::vector<StrReport> reports;
  std::vector<std::vector<double>> samples;
  for (const RawRow& row : rows) {
    auto it = std::find_if(reports.begin(), reports.end(),
                           [&](const StrReport& r) { return same_point(r, row); });
    if (it == reports.end()) {
      reports.push_back(StrReport{row.mode, row.pb0, row.spots, row.redundancy, 0, 0.0, 0.0});
      samples.emplace_back();
      it = reports.end() - 1;
    }
    samples[static_cast<std::size_t>(it - reports.begin())].push_back(row.str);
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    reports[i].n_reps = static_cast<std::uint32_t>(samples[i].size());
    if (samples[i].size() >= 2) {
      const MeanCi ci = mean_ci99(samples[i]);
      reports[i].str_mean = ci.mean;
      reports[i].ci99_half_width = ci.half_width;
    } else {
      reports[i].str_mean = samples[i].front();
    }
  }
  return reports;
}

void check_complete(std::span<const StrReport> reports, const GridSpec& grid) {
  std::vector<std::string> missing;
  for (const auto& mode : grid.modes) {
    for (double pb0 : grid.pb0_values) {
      for (const auto& p : grid.points) {
        const bool found = std::any_of(reports.begin(), reports.end(), [&](const StrReport& r) {
          return r.mode == mode && r.pb0 == pb0 && r.spots == p.spots && r.redundancy == p.redundancy;
        });
        if (!found) missing.push_back(point_name(telemetry::slug(mode), pb0, p.spots, p.redundancy));
      }
    }
  }
  if (!missing.empty()) throw IncompleteGrid(std::move(missing));
}

void write_raw(std::ostream& out, std::span<const RawRow> rows) {
  out << kRawHeader << '\n';
  for (const RawRow& r : rows) {
    out << telemetry::slug(r.mode) << ',' << format_double(r.pb0) << ',' << r.spots << ','
        << r.redundancy << ',' << r.rep << ',' << r.seed << ',' << format_double(r.str) << '\n';
  }
}

void write_mesh(std::ostream& out, std::span<const StrReport> reports) {
  out << kMeshHeader << '\n';
  for (const StrReport& r : reports) {
    out << telemetry::slug(r.mode) << ',' << format_double(r.pb0) << ',' << r.spots << ','
        << r.redundancy << ',' << r.n_reps << ',' << format_double(r.str_mean) << ','
        << format_double(r.ci99_half_width) << '\n';
  }
}

void export_raw(std::span<const RawRow> rows, const std::string& path) {
  std::ostringstream ss;
  write_raw(ss, rows);
  write_file(path, ss.str());
}

void export_mesh(std::span<const StrReport> reports, const GridSpec& grid, const std::string& path) {
  check_complete(reports, grid);
  std::ostringstream ss;
  write_mesh(ss, reports);
  write_file(path, ss.str());
}

std::vector<RawRow> read_raw(std::istream& in) {
  return read_csv<RawRow>(in, kRawHeader, 7, [](const std::vector<std::string>& f) {
    return RawRow{telemetry::parse_mode(f[0]), parse_double(f[1]), to_uint<std::uint32_t>(f[2]),
                  to_uint<std::uint32_t>(f[3]), to_uint<std::uint32_t>(f[4]),
                  to_uint<std::uint64_t>(f[5]), parse_double(f[6])};
  });
}

std::vector<StrReport> read_mesh(std::istream& in) {
  return read_csv<StrReport>(in, kMeshHeader, 7, [](const std::vector<std::string>& f) {
    return StrReport{telemetry::parse_mode(f[0]), parse_double(f[1]), to_uint<std::uint32_t>(f[2]),
                     to_uint<std::uint32_t>(f[3]), to_uint<std::uint32_t>(f[4]), parse_double(f[5]),
                     parse_double(f[6])};
  });
}

std::vector<StrReport> load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mesh file '" + path + "'");
  try {
    return read_mesh(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<TableRow> summarize(std::span<const StrReport> reports) {
  std::vector<TableRow> rows;
  for (const auto& mode : telemetry::all_modes()) {
    std::vector<double> values;
    for (const auto& r : reports) {
      if (r.mode == mode) values.push_back(r.str_mean);
    }
    if (values.empty()) continue;
    rows.push_back(TableRow{mode, *std::max_element(values.begin(), values.end()), sorted_mean(values),
                            values.size()});
  }
  return rows;
}

std::string format_table(std::span<const TableRow> rows) {
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, telemetry::label(r.mode).size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "Mode" << "  " << std::right
     << std::setw(7) << "Max" << "  " << std::setw(7) << "Average" << '\n';
  os << std::string(width + 18, '-') << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << telemetry::label(r.mode) << "  "
       << std::right << std::setw(7) << r.max << "  " << std::setw(7) << r.mean << '\n';
  }
  return os.str();
}

}  // namespace permasim::metrics
