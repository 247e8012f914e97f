#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "csl/sde.hpp"

namespace csl {

/// One scalar observable across an ensemble on a shared time schedule:
/// values[trajectory][sample].
struct EnsembleSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  std::size_t trajectories() const noexcept { return values.size(); }

  void validate() const {
    for (const auto& v : values)
      require(v.size() == times.size(), ErrorCode::ScheduleMismatch,
              "ensemble series: trajectory length differs from the time schedule");
  }

  double mean_at(std::size_t k) const {
    double s = 0.0;
    for (const auto& v : values) s += v[k];
    return s / static_cast<double>(values.size());
  }

  /// Sample standard deviation at sample k (n - 1 denominator).
  double stddev_at(std::size_t k) const {
    const double mu = mean_at(k);
    double s = 0.0;
    for (const auto& v : values) s += (v[k] - mu) * (v[k] - mu);
    return values.size() > 1 ? std::sqrt(s / static_cast<double>(values.size() - 1)) : 0.0;
  }

  std::vector<double> mean() const {
    std::vector<double> m(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) m[k] = mean_at(k);
    return m;
  }
};

/// Collects one column from trajectory records that share a schedule.
inline EnsembleSeries collect_series(const std::vector<TrajectoryRecord>& records, std::string_view column) {
  EnsembleSeries s;
  if (records.empty()) return s;
  s.times = records.front().times;
  s.values.reserve(records.size());
  for (const auto& r : records) {
    require(r.times == s.times, ErrorCode::ScheduleMismatch, "records do not share a snapshot schedule");
    s.values.push_back(r.column(column));
  }
  return s;
}

/// Ordinary least-squares slope of y against t.
inline double least_squares_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - mt) * (y[i] - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  require(sxx > 0.0, ErrorCode::InsufficientData, "slope fit needs at least two distinct times");
  return sxy / sxx;
}

}  // namespace csl
