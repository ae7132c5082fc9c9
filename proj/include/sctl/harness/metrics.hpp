#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace sctl {

struct RunMetrics {
  double rms_x = 0.0;
  double rms_a = 0.0;
  double peak_a = 0.0;
  double peak_x = 0.0;
  double rms_u = 0.0;
  bool diverged = false;
  std::size_t steps = 0;
};

class MetricsAccumulator {
 public:
  void add(double x, double a, double u);
  RunMetrics finish(bool diverged = false) const;

 private:
  double sum_x2_ = 0.0, sum_a2_ = 0.0, sum_u2_ = 0.0;
  double peak_a_ = 0.0, peak_x_ = 0.0;
  std::size_t n_ = 0;
};

struct TrajectoryRow {
  double t, x, v, a, u, xg_ddot;
};

/// Header `t,x,v,a,u,xg_ddot`, 15 significant digits.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows);

/// One row per run; `labels` (same length) fills the first column.
void write_metrics_csv(std::ostream& os, const std::vector<std::string>& labels,
                       const std::vector<RunMetrics>& runs);

/// Runs of one policy across seeds.
struct PolicyRuns {
  std::string name;
  std::vector<RunMetrics> runs;
};

struct SummaryRow {
  std::string name;
  std::size_t count = 0;
  std::size_t diverged = 0;
  // mean / std (population) per metric: rms_x, rms_a, peak_a, peak_x, rms_u
  std::vector<double> mean;
  std::vector<double> stddev;
  // mean(metric) / mean(baseline metric); NaN without a baseline
  std::vector<double> ratio;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
  std::string baseline;

  std::string to_text() const;
  std::string to_csv() const;
};

const std::vector<std::string>& metric_names();

SummaryTable summarize(const std::vector<PolicyRuns>& groups, const std::string& baseline = "uncontrolled");

}  // namespace sctl
