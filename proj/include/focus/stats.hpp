#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace focus {

struct Observation {
  std::int64_t frame = 0;
  double reward = 0.0;
};

// Streaming mean/variance for one arm plus the append-only observation log.
// Uses Welford's one-pass recurrence; variance is the population estimate
// (divide by count), which stays zero for a single observation and keeps the
// confidence radius finite from the first pull.
class ArmStats {
 public:
  // Rejects rewards outside [0,1].
  void update(std::int64_t frame, double reward);

  std::int64_t count() const { return count_; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }
  double variance() const { return count_ >= 1 ? m2_ / static_cast<double>(count_) : 0.0; }
  const std::vector<Observation>& observations() const { return observations_; }

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;  // sum of squared deviations from the running mean
  std::vector<Observation> observations_;
};

// Variance-adaptive confidence half-width:
//   sqrt(2 * variance * ln(n) / max(1, pulls)) + 3 * ln(n) / max(1, pulls).
// Natural logarithm; n_total >= 1. An unpulled arm contributes zero variance,
// so its radius reduces to the range term 3 * ln(n).
double bernstein_radius(double variance, std::int64_t pulls, std::int64_t n_total);
double bernstein_radius(const ArmStats& stats, std::int64_t n_total);

struct ConfidenceBound {
  double lower = 0.0;
  double upper = 0.0;
  double radius = 0.0;
};

// mean +/- radius, deliberately not clamped to [0,1]: the separation test
// compares raw bounds.
ConfidenceBound confidence_bounds(const ArmStats& stats, std::int64_t n_total);

// Indices of the m largest values, ties broken toward the lower index.
// Returned sorted ascending. Rejects m outside [1, values.size()].
std::vector<int> top_m(std::span<const double> values, int m);

}  // namespace focus
