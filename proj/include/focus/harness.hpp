#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "focus/parallel.hpp"
#include "focus/pipeline.hpp"
#include "focus/provider.hpp"
#include "focus/timeline.hpp"

namespace focus {

// ---------------------------------------------------------------------------
// Autocorrelation tooling
// ---------------------------------------------------------------------------

struct AcfResult {
  std::vector<double> rho;  // rho[d] for lags d = 0..max_lag
  bool valid = false;       // false for constant sequences, which carry no signal
};

// Pearson correlation of (x[t], x[t+d]) over the overlapping window, per lag.
// rho[0] is 1 for any non-constant sequence. Lags are independent, so they
// parallelize without changing results.
AcfResult acf(std::span<const double> sequence, std::int64_t max_lag_frames,
              ExecMode mode = ExecMode::serial);

struct AcfCurve {
  std::vector<double> lag_seconds;
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
  double half_life_seconds = 0.0;  // NaN when the median never drops below 0.5
};

// Pointwise median and interquartile band across sequences; invalid curves
// are excluded. The half-life is the first lag whose median falls below 0.5.
AcfCurve aggregate_acf(const std::vector<AcfResult>& curves, double fps);

void write_acf_csv(std::ostream& out, const AcfCurve& curve);

// ---------------------------------------------------------------------------
// Ground-truth oracles
// ---------------------------------------------------------------------------

// Indices of the k largest values, ties toward the lower index, sorted.
std::vector<std::int64_t> top_k_indices(std::span<const double> values, std::int64_t k);

// True top-m arms by exact per-arm mean utility.
std::vector<int> oracle_arm_set(std::span<const double> utility, std::span<const Arm> arms, int m);

// Globally optimal k frames by true utility.
std::vector<std::int64_t> oracle_top_frames(std::span<const double> utility, std::int64_t k);

// Optimal frames constrained to the given arms with per-arm quotas.
std::vector<std::int64_t> oracle_frames_constrained(
    std::span<const double> utility, std::span<const Arm> arms,
    std::span<const std::pair<int, std::int64_t>> quotas);

double utility_sum(std::span<const double> utility, std::span<const std::int64_t> frames);

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

enum class Policy {
  focus,            // batched two-stage arm selection, weighted frame draws
  focus_iterative,  // sequential arm selection, weighted frame draws
  uniform,          // evenly spaced frames, no scoring
  topk_full,        // score every frame, take the top k
  topk_prefilter,   // score one frame per second, take the top k among those
  focus_c,          // coarse stage only; uniform frame draws inside selected arms
  focus_f,          // no arm selection; evenly spaced pulls, one global distribution
  focus_m,          // two-stage with plain empirical means ranking the coarse set
};

Policy parse_policy(std::string_view name);  // throws ConfigError on unknown ids
std::string_view policy_name(Policy policy);
const std::vector<Policy>& all_policies();

struct TrialReport {
  std::string policy;
  std::int64_t trial = 0;
  double captured_utility = 0.0;
  double oracle_utility = 0.0;
  double frame_regret = 0.0;
  std::optional<bool> arm_identification_hit;  // empty for policies without arm selection
  std::optional<double> arm_jaccard;
  double frames_seen_fraction = 0.0;
  std::int64_t pulls = 0;
  std::int64_t n_final = 0;
  double wall_time_ms = 0.0;

  nlohmann::json to_json() const;
};

struct HarnessConfig {
  PipelineConfig pipeline;
  double prefilter_fps = 1.0;
  std::uint64_t seed = 0;
};

// Run one policy on one provider and measure it against the ground truth.
// The provider must expose ground truth; per-policy randomness is derived
// from (cfg.seed, trial_index, policy).
TrialReport run_policy(Policy policy, const RewardProvider& provider, const VideoMeta& meta,
                       const HarnessConfig& cfg, std::int64_t trial_index = 0,
                       ExecMode mode = ExecMode::serial);

// ---------------------------------------------------------------------------
// Instance generation and batch evaluation
// ---------------------------------------------------------------------------

// Family of planted-segment instances: non-overlapping hot segments at random
// positions and levels over a quiet base, smoothed to the requested ACF
// half-life. instantiate() is deterministic in (seed, trial).
struct InstanceFamily {
  std::int64_t total_frames = 54000;
  double fps = 30.0;
  int num_segments = 6;
  std::int64_t segment_frames_min = 300;
  std::int64_t segment_frames_max = 600;
  double level_min = 0.6;
  double level_max = 1.0;
  double base_level = 0.05;
  double smoothing_half_life_seconds = 5.0;
  double noise_std = 0.05;

  void validate() const;
  static InstanceFamily from_json(const nlohmann::json& j);  // unknown keys rejected
  nlohmann::json to_json() const;
  SyntheticSpec instantiate(std::uint64_t seed, std::uint64_t trial) const;
};

// Constant per-arm utility levels (one planted segment covering each arm).
SyntheticSpec constant_arm_instance(std::span<const double> arm_means,
                                    std::int64_t frames_per_arm, double fps, double noise_std,
                                    std::uint64_t seed);

// Trials fan out in parallel; reports come back in (trial, policy) order
// regardless of thread count.
std::vector<TrialReport> run_trials(std::span<const Policy> policies,
                                    const InstanceFamily& family, int trials,
                                    const HarnessConfig& cfg, ExecMode mode = ExecMode::parallel);

struct PolicySummary {
  std::string policy;
  int trials = 0;
  double captured_mean = 0.0;
  double captured_ci95 = 0.0;
  double captured_median = 0.0;
  double oracle_mean = 0.0;
  double regret_mean = 0.0;
  double regret_ci95 = 0.0;
  double frames_seen_mean = 0.0;
  double pulls_mean = 0.0;
  double identification_rate = 0.0;  // NaN for policies without arm selection
};

std::vector<PolicySummary> summarize(std::span<const TrialReport> reports);
void write_summary_csv(std::ostream& out, std::span<const PolicySummary> summaries);

// ---------------------------------------------------------------------------
// Identification-rate measurement
// ---------------------------------------------------------------------------

struct IdentificationResult {
  double rate = 0.0;           // fraction of trials returning exactly the oracle set
  double theorem_bound = 0.0;  // 1 - 6M/n at the smallest observed n_final, floored at 0
  double mean_jaccard = 0.0;
  std::vector<std::int64_t> n_finals;
};

// Runs the sequential algorithm on fresh instances and compares the returned
// set against the oracle arm set of each instance.
IdentificationResult identification_rate(
    const std::function<SyntheticSpec(std::uint64_t trial)>& make_instance, double clip_seconds,
    const SelectionConfig& cfg, int trials, ExecMode mode = ExecMode::parallel);

// One-sided sign test: probability of at least `wins` successes out of
// wins + losses fair coin flips.
double sign_test_p_greater(std::int64_t wins, std::int64_t losses);

}  // namespace focus
