#include "focus/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "focus/error.hpp"

namespace focus {

void ArmStats::update(std::int64_t frame, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw DataError("reward " + std::to_string(reward) + " outside [0,1]");
  }
  ++count_;
  const double delta = reward - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (reward - mean_);
  observations_.push_back({frame, reward});
}

double bernstein_radius(double variance, std::int64_t pulls, std::int64_t n_total) {
  internal_check(n_total >= 1, "bernstein_radius: n_total must be >= 1");
  const double n = static_cast<double>(std::max<std::int64_t>(1, pulls));
  const double log_total = std::log(static_cast<double>(n_total));
  return std::sqrt(2.0 * variance * log_total / n) + 3.0 * log_total / n;
}

double bernstein_radius(const ArmStats& stats, std::int64_t n_total) {
  return bernstein_radius(stats.variance(), stats.count(), n_total);
}

ConfidenceBound confidence_bounds(const ArmStats& stats, std::int64_t n_total) {
  const double radius = bernstein_radius(stats, n_total);
  return ConfidenceBound{stats.mean() - radius, stats.mean() + radius, radius};
}

std::vector<int> top_m(std::span<const double> values, int m) {
  const int n = static_cast<int>(values.size());
  if (m < 1 || m > n) {
    throw ConfigError("top_m: m=" + std::to_string(m) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + m, order.end(), [&](int a, int b) {
    if (values[static_cast<std::size_t>(a)] != values[static_cast<std::size_t>(b)]) {
      return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  order.resize(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace focus
