#pragma once

// STR, 99% confidence intervals over repetitions, and the raw / mesh CSV
// files.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "permasim/telemetry.hpp"

namespace permasim::metrics {

/// successes / total. Throws std::invalid_argument for an empty set.
double str(std::span<const telemetry::TransactionResolution> resolutions);

/// Quantile of Student's t distribution with `dof` degrees of freedom.
double t_quantile(double p, double dof);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};

/// Mean and Student-t 99% half-width t(0.995, k-1) * s / sqrt(k). Samples
/// are summed in ascending order. Throws std::invalid_argument for k < 2.
MeanCi mean_ci99(std::span<const double> samples);

/// Ascending-order sum divided by the count; the mesh mean uses this.
double sorted_mean(std::span<const double> samples);

struct RawRow {
  telemetry::Mode mode;
  double pb0 = 0.0;
  std::uint32_t spots = 0;
  std::uint32_t redundancy = 0;
  std::uint32_t rep = 0;
  std::uint64_t seed = 0;
  double str = 0.0;
};

struct StrReport {
  telemetry::Mode mode;
  double pb0 = 0.0;
  std::uint32_t spots = 0;
  std::uint32_t redundancy = 0;
  std::uint32_t n_reps = 0;
  double str_mean = 0.0;
  double ci99_half_width = 0.0;
};

struct GridPoint {
  std::uint32_t spots = 0;
  std::uint32_t redundancy = 0;
};

struct GridSpec {
  std::vector<double> pb0_values;
  std::vector<GridPoint> points;  // Y axis, in display order
  std::vector<telemetry::Mode> modes;
  std::uint32_t reps = 0;
};

/// Thrown by export_mesh / check_complete; lists every missing point.
class IncompleteGrid : public std::runtime_error {
 public:
  explicit IncompleteGrid(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

inline constexpr const char* kRawHeader = "mode,pb0,spots,redundancy,rep,seed,str";
inline constexpr const char* kMeshHeader = "mode,pb0,spots,redundancy,n_reps,str_mean,str_ci99_half";

/// Groups rows by (mode, pb0, spots, redundancy) in first-appearance order.
/// A single repetition gets half-width 0.
std::vector<StrReport> aggregate(std::span<const RawRow> rows);

/// Throws IncompleteGrid naming each (mode, pb0, spots, redundancy) without
/// a report.
void check_complete(std::span<const StrReport> reports, const GridSpec& grid);

void write_raw(std::ostream& out, std::span<const RawRow> rows);
void write_mesh(std::ostream& out, std::span<const StrReport> reports);
/// I/O failures are reported with the path.
void export_raw(std::span<const RawRow> rows, const std::string& path);
void export_mesh(std::span<const StrReport> reports, const GridSpec& grid, const std::string& path);

std::vector<RawRow> read_raw(std::istream& in);
std::vector<StrReport> read_mesh(std::istream& in);
std::vector<StrReport> load_mesh(const std::string& path);

struct TableRow {
  telemetry::Mode mode;
  double max = 0.0;
  double mean = 0.0;
  std::size_t points = 0;
};

/// Max and unweighted mean of str_mean per mode, in table mode order.
std::vector<TableRow> summarize(std::span<const StrReport> reports);
std::string format_table(std::span<const TableRow> rows);

}  // namespace permasim::metrics
