#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "focus/rng.hpp"
#include "focus/stats.hpp"
#include "focus/timeline.hpp"

namespace focus {

struct ArmQuotaInput {
  int id = 0;
  std::int64_t size = 0;
  double mean = 0.0;  // empirical mean; decides which arms get zero when k < arm count
};

// Split the keyframe budget k across the given arms as evenly as possible
// (largest-remainder, ties to the lower arm id), capping each quota at the
// arm size and pushing surplus to the arms with the most remaining room.
// When k is smaller than the arm count, the k slots go to the highest-mean
// arms and the rest get quota zero. Quotas always sum to min(k, total size).
std::vector<std::pair<int, std::int64_t>> allocate_quota(std::span<const ArmQuotaInput> arms,
                                                         std::int64_t k);

struct InterpolatedScores {
  std::vector<double> scores;     // index i scores frame arm.start + i
  bool uniform_fallback = false;  // arm had no observations
};

// Nearest-neighbor interpolation of observed rewards across the arm.
// Duplicate observations of one frame are averaged first; equidistant frames
// take the earlier observation's value. An arm without observations gets the
// uniform vector 1/|arm| and a warning flag.
InterpolatedScores interpolate_rewards(const Arm& arm, std::span<const Observation> observations);

// Draw k_a distinct frames, inclusion-weighted by the (nonnegative) scores:
// exponential-key ranking, whose single-draw marginals equal the normalized
// scores. Zero-score frames become eligible only once every positive-score
// frame has been taken; an all-zero vector falls back to uniform.
std::vector<std::int64_t> sample_frames(const Arm& arm, std::span<const double> scores,
                                        std::int64_t k_a, CounterRng& rng);

struct KeyframeSelection {
  std::vector<std::int64_t> frames;  // sorted ascending, distinct
  std::vector<std::pair<int, std::int64_t>> per_arm_quota;
  std::vector<int> selected_arms;
  std::int64_t pulls = 0;
  double frames_seen_fraction = 0.0;  // distinct frames scored / total frames
  double raw_pull_fraction = 0.0;
  std::vector<std::string> warnings;
};

// allocate_quota -> interpolate_rewards -> sample_frames for each selected
// arm. Per-arm randomness comes from streams keyed on (seed, arm id), so the
// per-arm draws are independent of iteration order. Budget diagnostics
// (pulls, fractions) are filled by the caller, which owns the ledger.
KeyframeSelection assemble(std::span<const Arm> arms, std::span<const int> selected_arms,
                           std::span<const ArmStats> stats, std::int64_t k, std::uint64_t seed);

}  // namespace focus
