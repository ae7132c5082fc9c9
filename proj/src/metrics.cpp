#include "sctl/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "sctl/errors.hpp"
#include "sctl/text.hpp"

namespace sctl {

void MetricsAccumulator::add(double x, double a, double u) {
  sum_x2_ += x * x;
  sum_a2_ += a * a;
  sum_u2_ += u * u;
  peak_a_ = std::max(peak_a_, std::abs(a));
  peak_x_ = std::max(peak_x_, std::abs(x));
  ++n_;
}

RunMetrics MetricsAccumulator::finish(bool diverged) const {
  RunMetrics m;
  m.steps = n_;
  m.diverged = diverged;
  if (n_ == 0) return m;
  const double n = static_cast<double>(n_);
  m.rms_x = std::sqrt(sum_x2_ / n);
  m.rms_a = std::sqrt(sum_a2_ / n);
  m.rms_u = std::sqrt(sum_u2_ / n);
  m.peak_a = peak_a_;
  m.peak_x = peak_x_;
  return m;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows) {
  os << "t,x,v,a,u,xg_ddot\n";
  for (const auto& r : rows) {
    os << format_real(r.t) << ',' << format_real(r.x) << ',' << format_real(r.v) << ','
       << format_real(r.a) << ',' << format_real(r.u) << ',' << format_real(r.xg_ddot) << '\n';
  }
}

void write_metrics_csv(std::ostream& os, const std::vector<std::string>& labels,
                       const std::vector<RunMetrics>& runs) {
  if (labels.size() != runs.size()) throw InputError("write_metrics_csv: one label per run required");
  os << "label,rms_x,rms_a,peak_a,peak_x,rms_u,diverged,steps\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& m = runs[i];
    os << labels[i] << ',' << format_real(m.rms_x) << ',' << format_real(m.rms_a) << ','
       << format_real(m.peak_a) << ',' << format_real(m.peak_x) << ',' << format_real(m.rms_u) << ','
       << (m.diverged ? 1 : 0) << ',' << m.steps << '\n';
  }
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"rms_x", "rms_a", "peak_a", "peak_x", "rms_u"};
  return names;
}

namespace {

std::vector<double> values(const RunMetrics& m) { return {m.rms_x, m.rms_a, m.peak_a, m.peak_x, m.rms_u}; }

}  // namespace

SummaryTable summarize(const std::vector<PolicyRuns>& groups, const std::string& baseline) {
  SummaryTable table;
  table.baseline = baseline;
  const std::size_t k = metric_names().size();
  for (const auto& g : groups) {
    if (g.runs.empty()) throw InputError("summarize: policy '" + g.name + "' has no runs");
    SummaryRow row;
    row.name = g.name;
    row.count = g.runs.size();
    row.mean.assign(k, 0.0);
    row.stddev.assign(k, 0.0);
    for (const auto& r : g.runs) {
      const auto v = values(r);
      for (std::size_t i = 0; i < k; ++i) row.mean[i] += v[i];
      if (r.diverged) ++row.diverged;
    }
    for (auto& m : row.mean) m /= static_cast<double>(row.count);
    for (const auto& r : g.runs) {
      const auto v = values(r);
      for (std::size_t i = 0; i < k; ++i) row.stddev[i] += (v[i] - row.mean[i]) * (v[i] - row.mean[i]);
    }
    for (auto& s : row.stddev) s = std::sqrt(s / static_cast<double>(row.count));
    table.rows.push_back(std::move(row));
  }
  const auto base = std::find_if(table.rows.begin(), table.rows.end(),
                                 [&](const SummaryRow& r) { return r.name == baseline; });
  for (auto& row : table.rows) {
    row.ratio.assign(k, std::numeric_limits<double>::quiet_NaN());
    if (base == table.rows.end()) continue;
    for (std::size_t i = 0; i < k; ++i) {
      if (base->mean[i] != 0.0) row.ratio[i] = row.mean[i] / base->mean[i];
    }
  }
  return table;
}

std::string SummaryTable::to_text() const {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %4s %4s", "policy", "n", "div");
  os << buf;
  for (const auto& name : metric_names()) {
    std::snprintf(buf, sizeof buf, " %24s", (name + " mean+-std").c_str());
    os << buf;
  }
  for (const auto& name : metric_names()) {
    std::snprintf(buf, sizeof buf, " %12s", ("r_" + name).c_str());
    os << buf;
  }
  os << '\n';
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %4zu %4zu", row.name.c_str(), row.count, row.diverged);
    os << buf;
    for (std::size_t i = 0; i < row.mean.size(); ++i) {
      std::snprintf(buf, sizeof buf, " %11.5g +- %-9.3g", row.mean[i], row.stddev[i]);
      os << buf;
    }
    for (double r : row.ratio) {
      std::snprintf(buf, sizeof buf, " %12.4f", r);
      os << buf;
    }
    os << '\n';
  }
  if (!baseline.empty()) os << "(ratios relative to '" << baseline << "')\n";
  return os.str();
}

std::string SummaryTable::to_csv() const {
  std::ostringstream os;
  os << "policy,count,diverged";
  for (const auto& name : metric_names()) os << ',' << name << "_mean," << name << "_std";
  for (const auto& name : metric_names()) os << ",ratio_" << name;
  os << '\n';
  for (const auto& row : rows) {
    os << row.name << ',' << row.count << ',' << row.diverged;
    for (std::size_t i = 0; i < row.mean.size(); ++i) {
      os << ',' << format_real(row.mean[i]) << ',' << format_real(row.stddev[i]);
    }
    for (double r : row.ratio) os << ',' << format_real(r);
    os << '\n';
  }
  return os.str();
}

}  // namespace sctl
