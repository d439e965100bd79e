#include "focus/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "focus/error.hpp"
#include "focus/selector.hpp"

namespace focus {

// ---------------------------------------------------------------------------
// Autocorrelation
// ---------------------------------------------------------------------------

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  return cov / std::sqrt(var_a * var_b);
}

bool is_constant(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] != x[0]) return false;
  }
  return true;
}

// Type-7 quantile (linear interpolation) over a scratch copy.
double quantile(std::vector<double> values, double p) {
  internal_check(!values.empty(), "quantile of empty set");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double w = h - std::floor(h);
  return values[lo] * (1.0 - w) + values[hi] * w;
}

}  // namespace

AcfResult acf(std::span<const double> sequence, std::int64_t max_lag_frames, ExecMode mode) {
  if (max_lag_frames < 0) throw ConfigError("acf: negative max lag");
  if (static_cast<std::int64_t>(sequence.size()) <= max_lag_frames) {
    throw ConfigError("acf: sequence shorter than max lag");
  }
  AcfResult result;
  if (is_constant(sequence)) return result;  // flagged invalid
  result.valid = true;
  result.rho.assign(static_cast<std::size_t>(max_lag_frames) + 1, 0.0);
  result.rho[0] = 1.0;
#pragma omp parallel for schedule(static) if (mode == ExecMode::parallel)
  for (std::int64_t d = 1; d <= max_lag_frames; ++d) {
    const auto len = sequence.size() - static_cast<std::size_t>(d);
    result.rho[static_cast<std::size_t>(d)] =
        pearson(sequence.subspan(0, len), sequence.subspan(static_cast<std::size_t>(d), len));
  }
  return result;
}

AcfCurve aggregate_acf(const std::vector<AcfResult>& curves, double fps) {
  if (!(fps > 0.0)) throw ConfigError("aggregate_acf: fps must be positive");
  std::vector<const AcfResult*> valid;
  for (const auto& c : curves) {
    if (c.valid) valid.push_back(&c);
  }
  if (valid.empty()) throw ConfigError("aggregate_acf: no valid curves");
  const std::size_t lags = valid.front()->rho.size();
  for (const auto* c : valid) {
    internal_check(c->rho.size() == lags, "aggregate_acf: mismatched lag counts");
  }

  AcfCurve curve;
  curve.lag_seconds.resize(lags);
  curve.median.resize(lags);
  curve.q25.resize(lags);
  curve.q75.resize(lags);
  std::vector<double> column(valid.size());
  for (std::size_t d = 0; d < lags; ++d) {
    for (std::size_t i = 0; i < valid.size(); ++i) column[i] = valid[i]->rho[d];
    curve.lag_seconds[d] = static_cast<double>(d) / fps;
    curve.median[d] = quantile(column, 0.5);
    curve.q25[d] = quantile(column, 0.25);
    curve.q75[d] = quantile(column, 0.75);
  }

  curve.half_life_seconds = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t d = 0; d < lags; ++d) {
    if (curve.median[d] < 0.5) {
      curve.half_life_seconds = static_cast<double>(d) / fps;
      break;
    }
  }
  return curve;
}

void write_acf_csv(std::ostream& out, const AcfCurve& curve) {
  out << "lag_seconds,median,q25,q75\n";
  char buf[160];
  for (std::size_t d = 0; d < curve.lag_seconds.size(); ++d) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", curve.lag_seconds[d],
                  curve.median[d], curve.q25[d], curve.q75[d]);
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

std::vector<std::int64_t> top_k_indices(std::span<const double> values, std::int64_t k) {
  const auto n = static_cast<std::int64_t>(values.size());
  if (k < 0 || k > n) throw ConfigError("top_k_indices: k outside [0, n]");
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::int64_t a, std::int64_t b) {
                      const double va = values[static_cast<std::size_t>(a)];
                      const double vb = values[static_cast<std::size_t>(b)];
                      if (va != vb) return va > vb;
                      return a < b;
                    });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<int> oracle_arm_set(std::span<const double> utility, std::span<const Arm> arms,
                                int m) {
  std::vector<double> means(arms.size(), 0.0);
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const Arm& arm = arms[a];
    double sum = 0.0;
    for (std::int64_t t = arm.start; t <= arm.end; ++t) {
      sum += utility[static_cast<std::size_t>(t)];
    }
    means[a] = sum / static_cast<double>(arm.size());
  }
  return top_m(means, m);
}

std::vector<std::int64_t> oracle_top_frames(std::span<const double> utility, std::int64_t k) {
  return top_k_indices(utility, k);
}

std::vector<std::int64_t> oracle_frames_constrained(
    std::span<const double> utility, std::span<const Arm> arms,
    std::span<const std::pair<int, std::int64_t>> quotas) {
  std::vector<std::int64_t> frames;
  for (const auto& [arm_id, quota] : quotas) {
    const Arm& arm = arms[static_cast<std::size_t>(arm_id)];
    const auto local = top_k_indices(
        utility.subspan(static_cast<std::size_t>(arm.start), static_cast<std::size_t>(arm.size())),
        quota);
    for (std::int64_t i : local) frames.push_back(arm.start + i);
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

double utility_sum(std::span<const double> utility, std::span<const std::int64_t> frames) {
  double sum = 0.0;
  for (std::int64_t t : frames) sum += utility[static_cast<std::size_t>(t)];
  return sum;
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

namespace {

struct PolicyEntry {
  Policy policy;
  std::string_view name;
};

constexpr PolicyEntry kPolicyTable[] = {
    {Policy::focus, "focus"},
    {Policy::focus_iterative, "focus-iterative"},
    {Policy::uniform, "uniform"},
    {Policy::topk_full, "topk-full"},
    {Policy::topk_prefilter, "topk-prefilter"},
    {Policy::focus_c, "focus-c"},
    {Policy::focus_f, "focus-f"},
    {Policy::focus_m, "focus-m"},
};

}  // namespace

Policy parse_policy(std::string_view name) {
  for (const auto& entry : kPolicyTable) {
    if (entry.name == name) return entry.policy;
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

std::string_view policy_name(Policy policy) {
  for (const auto& entry : kPolicyTable) {
    if (entry.policy == policy) return entry.name;
  }
  throw InternalError("unnamed policy");
}

const std::vector<Policy>& all_policies() {
  static const std::vector<Policy> policies = [] {
    std::vector<Policy> out;
    for (const auto& entry : kPolicyTable) out.push_back(entry.policy);
    return out;
  }();
  return policies;
}

nlohmann::json TrialReport::to_json() const {
  nlohmann::json j{{"policy", policy},
                   {"trial", trial},
                   {"captured_utility", captured_utility},
                   {"oracle_utility", oracle_utility},
                   {"frame_regret", frame_regret},
                   {"frames_seen_fraction", frames_seen_fraction},
                   {"pulls", pulls},
                   {"n_final", n_final},
                   {"wall_time_ms", wall_time_ms}};
  j["arm_identification_hit"] =
      arm_identification_hit ? nlohmann::json(*arm_identification_hit) : nlohmann::json(nullptr);
  j["arm_jaccard"] = arm_jaccard ? nlohmann::json(*arm_jaccard) : nlohmann::json(nullptr);
  return j;
}

namespace {

std::vector<double> truth_of(const RewardProvider& provider) {
  if (!provider.has_ground_truth()) {
    throw ConfigError("policy evaluation requires a provider with ground truth");
  }
  std::vector<double> y(static_cast<std::size_t>(provider.total_frames()));
  for (std::int64_t t = 0; t < provider.total_frames(); ++t) {
    y[static_cast<std::size_t>(t)] = provider.ground_truth(t);
  }
  return y;
}

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> inter, uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  return uni.empty() ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

std::vector<std::int64_t> evenly_spaced_frames(std::int64_t total, std::int64_t count) {
  std::vector<std::int64_t> frames;
  frames.reserve(static_cast<std::size_t>(std::min(total, count)));
  for (std::int64_t i = 0; i < count; ++i) {
    const auto t = static_cast<std::int64_t>(
        std::floor((static_cast<double>(i) + 0.5) * static_cast<double>(total) /
                   static_cast<double>(count)));
    if (frames.empty() || frames.back() != t) frames.push_back(std::min(t, total - 1));
  }
  return frames;
}

struct PolicyRun {
  std::vector<std::int64_t> frames;
  std::optional<std::vector<int>> selected_arms;
  std::int64_t pulls = 0;
  std::int64_t distinct = 0;
  std::int64_t n_final = 0;
};

PolicyRun run_focus_family(Policy policy, const RewardProvider& provider, const VideoMeta& meta,
                           PipelineConfig pipeline, ExecMode mode) {
  pipeline.algorithm = policy == Policy::focus_iterative ? PipelineConfig::Algorithm::iterative
                                                         : PipelineConfig::Algorithm::two_stage;
  pipeline.coarse_ranking = policy == Policy::focus_m ? CoarseRanking::empirical_mean
                                                      : CoarseRanking::optimistic_mean;
  const PipelineResult result = run_pipeline(provider, meta, pipeline, mode);
  PolicyRun run;
  run.frames = result.keyframes.frames;
  run.selected_arms = result.selection.selected;
  run.pulls = result.selection.ledger.pulls_total();
  run.distinct = result.selection.ledger.distinct_frames();
  run.n_final = result.selection.n_total;
  return run;
}

// Coarse stage only: q pulls per arm, optimistic ranking, then uniform draws
// inside the chosen arms.
PolicyRun run_focus_c(const RewardProvider& provider, const VideoMeta& meta,
                      const PipelineConfig& pipeline, ExecMode mode) {
  const auto arms = partition_timeline(meta, pipeline.clip_seconds);
  SelectionConfig cfg = pipeline.selection;
  if (cfg.m == 0) cfg.m = auto_target_arms(pipeline.k, static_cast<int>(arms.size()));
  cfg = resolve_config(cfg, static_cast<int>(arms.size()));

  std::vector<ArmStats> stats(arms.size());
  BudgetLedger ledger(arms.size());
  struct Pull {
    int arm;
    std::int64_t frame;
    std::uint64_t ordinal;
    double reward;
  };
  std::vector<Pull> batch;
  for (const Arm& arm : arms) {
    ArmSampler sampler(arm, cfg.seed);
    for (int i = 0; i < cfg.q; ++i) {
      const auto draw = sampler.next();
      batch.push_back({arm.id, draw.frame, draw.ordinal, 0.0});
    }
  }
  const auto total = static_cast<std::int64_t>(batch.size());
#pragma omp parallel for schedule(static) if (mode == ExecMode::parallel)
  for (std::int64_t i = 0; i < total; ++i) {
    batch[static_cast<std::size_t>(i)].reward =
        provider.score(batch[static_cast<std::size_t>(i)].frame,
                       batch[static_cast<std::size_t>(i)].ordinal);
  }
  std::sort(batch.begin(), batch.end(), [](const Pull& a, const Pull& b) {
    return std::tie(a.arm, a.frame, a.ordinal) < std::tie(b.arm, b.frame, b.ordinal);
  });
  for (const Pull& p : batch) {
    stats[static_cast<std::size_t>(p.arm)].update(p.frame, p.reward);
    ledger.record(p.arm, p.frame);
  }

  std::vector<double> optimistic(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    optimistic[a] = stats[a].mean() + bernstein_radius(stats[a], ledger.pulls_total());
  }
  const std::vector<int> selected = top_m(optimistic, cfg.m);

  std::vector<ArmQuotaInput> inputs;
  for (int a : selected) {
    inputs.push_back({a, arms[static_cast<std::size_t>(a)].size(),
                      stats[static_cast<std::size_t>(a)].mean()});
  }
  PolicyRun run;
  for (const auto& [arm_id, quota] : allocate_quota(inputs, pipeline.k)) {
    if (quota == 0) continue;
    const Arm& arm = arms[static_cast<std::size_t>(arm_id)];
    const std::vector<double> flat(static_cast<std::size_t>(arm.size()), 1.0);
    CounterRng rng(cfg.seed, Dom::frame_select, static_cast<std::uint64_t>(arm_id));
    const auto frames = sample_frames(arm, flat, quota, rng);
    run.frames.insert(run.frames.end(), frames.begin(), frames.end());
  }
  std::sort(run.frames.begin(), run.frames.end());
  run.selected_arms = selected;
  run.pulls = ledger.pulls_total();
  run.distinct = ledger.distinct_frames();
  run.n_final = ledger.pulls_total();
  return run;
}

// No arm structure: spend the two-stage budget on evenly spaced pulls and
// draw keyframes from one video-level interpolated distribution.
PolicyRun run_focus_f(const RewardProvider& provider, const VideoMeta& meta,
                      const PipelineConfig& pipeline, ExecMode mode) {
  const auto arms = partition_timeline(meta, pipeline.clip_seconds);
  const auto num_arms = static_cast<int>(arms.size());
  SelectionConfig cfg = pipeline.selection;
  if (cfg.m == 0) cfg.m = auto_target_arms(pipeline.k, num_arms);
  cfg = resolve_config(cfg, num_arms);

  const std::int64_t budget =
      static_cast<std::int64_t>(num_arms) * cfg.q +
      static_cast<std::int64_t>(coarse_set_size(cfg.alpha, num_arms)) * cfg.z;
  const auto frames = evenly_spaced_frames(meta.total_frames, budget);

  std::vector<double> rewards(frames.size(), 0.0);
  const auto total = static_cast<std::int64_t>(frames.size());
#pragma omp parallel for schedule(static) if (mode == ExecMode::parallel)
  for (std::int64_t i = 0; i < total; ++i) {
    rewards[static_cast<std::size_t>(i)] = provider.score(frames[static_cast<std::size_t>(i)], 0);
  }

  const Arm whole{0, 0, meta.total_frames - 1};
  std::vector<Observation> observations;
  observations.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) observations.push_back({frames[i], rewards[i]});
  const auto interp = interpolate_rewards(whole, observations);

  CounterRng rng(cfg.seed, Dom::frame_select, 0);
  PolicyRun run;
  run.frames = sample_frames(whole, interp.scores, std::min(pipeline.k, meta.total_frames), rng);
  run.pulls = static_cast<std::int64_t>(frames.size());
  run.distinct = run.pulls;
  run.n_final = run.pulls;
  return run;
}

PolicyRun run_topk(const RewardProvider& provider, const VideoMeta& meta,
                   const PipelineConfig& pipeline, double prefilter_fps, bool prefilter,
                   ExecMode mode) {
  std::vector<std::int64_t> candidates;
  if (prefilter) {
    if (!(prefilter_fps > 0.0)) throw ConfigError("prefilter rate must be positive");
    for (std::int64_t j = 0;; ++j) {
      const auto t = static_cast<std::int64_t>(
          std::llround(static_cast<double>(j) * meta.fps / prefilter_fps));
      if (t >= meta.total_frames) break;
      if (candidates.empty() || candidates.back() != t) candidates.push_back(t);
    }
  } else {
    candidates.resize(static_cast<std::size_t>(meta.total_frames));
    std::iota(candidates.begin(), candidates.end(), 0);
  }

  std::vector<double> scores(candidates.size(), 0.0);
  const auto total = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(static) if (mode == ExecMode::parallel)
  for (std::int64_t i = 0; i < total; ++i) {
    scores[static_cast<std::size_t>(i)] = provider.score(candidates[static_cast<std::size_t>(i)], 0);
  }

  const std::int64_t take = std::min(pipeline.k, static_cast<std::int64_t>(candidates.size()));
  PolicyRun run;
  for (std::int64_t i : top_k_indices(scores, take)) {
    run.frames.push_back(candidates[static_cast<std::size_t>(i)]);
  }
  std::sort(run.frames.begin(), run.frames.end());
  run.pulls = static_cast<std::int64_t>(candidates.size());
  run.distinct = run.pulls;
  run.n_final = run.pulls;
  return run;
}

}  // namespace

TrialReport run_policy(Policy policy, const RewardProvider& provider, const VideoMeta& meta,
                       const HarnessConfig& cfg, std::int64_t trial_index, ExecMode mode) {
  meta.validate();
  const std::vector<double> y = truth_of(provider);
  const std::int64_t k_eff = std::min(cfg.pipeline.k, meta.total_frames);

  PipelineConfig pipeline = cfg.pipeline;
  pipeline.selection.seed = stream_key(cfg.seed, Dom::trial, static_cast<std::uint64_t>(trial_index),
                                       static_cast<std::uint64_t>(policy));

  const auto started = std::chrono::steady_clock::now();
  PolicyRun run;
  switch (policy) {
    case Policy::focus:
    case Policy::focus_iterative:
    case Policy::focus_m:
      run = run_focus_family(policy, provider, meta, pipeline, mode);
      break;
    case Policy::focus_c:
      run = run_focus_c(provider, meta, pipeline, mode);
      break;
    case Policy::focus_f:
      run = run_focus_f(provider, meta, pipeline, mode);
      break;
    case Policy::uniform:
      run.frames = evenly_spaced_frames(meta.total_frames, k_eff);
      break;
    case Policy::topk_full:
      run = run_topk(provider, meta, pipeline, cfg.prefilter_fps, false, mode);
      break;
    case Policy::topk_prefilter:
      run = run_topk(provider, meta, pipeline, cfg.prefilter_fps, true, mode);
      break;
  }
  const auto elapsed = std::chrono::steady_clock::now() - started;

  TrialReport report;
  report.policy = std::string(policy_name(policy));
  report.trial = trial_index;
  report.captured_utility = utility_sum(y, run.frames);
  report.oracle_utility = utility_sum(y, oracle_top_frames(y, k_eff));
  report.frame_regret = report.oracle_utility - report.captured_utility;
  report.frames_seen_fraction =
      static_cast<double>(run.distinct) / static_cast<double>(meta.total_frames);
  report.pulls = run.pulls;
  report.n_final = run.n_final;
  report.wall_time_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();

  if (run.selected_arms) {
    const auto arms = partition_timeline(meta, cfg.pipeline.clip_seconds);
    const auto oracle =
        oracle_arm_set(y, arms, static_cast<int>(run.selected_arms->size()));
    report.arm_identification_hit = (*run.selected_arms == oracle);
    report.arm_jaccard = jaccard(*run.selected_arms, oracle);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Instances and batch evaluation
// ---------------------------------------------------------------------------

void InstanceFamily::validate() const {
  if (total_frames < 1) throw DataError("instance family: total_frames must be >= 1");
  if (!(fps > 0.0)) throw DataError("instance family: fps must be positive");
  if (num_segments < 0) throw DataError("instance family: negative segment count");
  if (segment_frames_min < 1 || segment_frames_max < segment_frames_min) {
    throw DataError("instance family: bad segment length range");
  }
  if (!(level_min >= 0.0 && level_max <= 1.0 && level_min <= level_max)) {
    throw DataError("instance family: bad level range");
  }
  if (!(base_level >= 0.0 && base_level <= 1.0)) {
    throw DataError("instance family: base_level outside [0,1]");
  }
  if (!(noise_std >= 0.0) || !(smoothing_half_life_seconds >= 0.0)) {
    throw DataError("instance family: negative noise or half-life");
  }
  if (static_cast<std::int64_t>(num_segments) * segment_frames_max > total_frames) {
    throw DataError("instance family: segments cannot fit in the timeline");
  }
}

InstanceFamily InstanceFamily::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("instance family: expected a JSON object");
  static constexpr const char* known[] = {
      "total_frames",      "fps",       "num_segments", "segment_frames_min",
      "segment_frames_max", "level_min", "level_max",    "base_level",
      "smoothing_half_life_seconds", "noise_std"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known)) {
      throw DataError("instance family: unknown key '" + key + "'");
    }
  }
  InstanceFamily f;
  try {
    f.total_frames = j.value("total_frames", f.total_frames);
    f.fps = j.value("fps", f.fps);
    f.num_segments = j.value("num_segments", f.num_segments);
    f.segment_frames_min = j.value("segment_frames_min", f.segment_frames_min);
    f.segment_frames_max = j.value("segment_frames_max", f.segment_frames_max);
    f.level_min = j.value("level_min", f.level_min);
    f.level_max = j.value("level_max", f.level_max);
    f.base_level = j.value("base_level", f.base_level);
    f.smoothing_half_life_seconds =
        j.value("smoothing_half_life_seconds", f.smoothing_half_life_seconds);
    f.noise_std = j.value("noise_std", f.noise_std);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("instance family: ") + e.what());
  }
  f.validate();
  return f;
}

nlohmann::json InstanceFamily::to_json() const {
  return nlohmann::json{{"total_frames", total_frames},
                        {"fps", fps},
                        {"num_segments", num_segments},
                        {"segment_frames_min", segment_frames_min},
                        {"segment_frames_max", segment_frames_max},
                        {"level_min", level_min},
                        {"level_max", level_max},
                        {"base_level", base_level},
                        {"smoothing_half_life_seconds", smoothing_half_life_seconds},
                        {"noise_std", noise_std}};
}

SyntheticSpec InstanceFamily::instantiate(std::uint64_t seed, std::uint64_t trial) const {
  validate();
  CounterRng rng(seed, Dom::instance, trial);
  SyntheticSpec spec;
  spec.total_frames = total_frames;
  spec.fps = fps;
  spec.base_level = base_level;
  spec.smoothing_half_life_seconds = smoothing_half_life_seconds;
  spec.noise_std = noise_std;

  for (int s = 0; s < num_segments; ++s) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const std::int64_t len =
          segment_frames_min +
          static_cast<std::int64_t>(rng.next_below(
              static_cast<std::uint64_t>(segment_frames_max - segment_frames_min + 1)));
      const std::int64_t start = static_cast<std::int64_t>(
          rng.next_below(static_cast<std::uint64_t>(total_frames - len + 1)));
      const std::int64_t end = start + len;
      placed = std::none_of(spec.segments.begin(), spec.segments.end(),
                            [&](const PlantedSegment& other) {
                              return start < other.end && other.start < end;
                            });
      if (placed) {
        const double level = level_min + rng.next_unit() * (level_max - level_min);
        spec.segments.push_back({start, end, level});
      }
    }
    if (!placed) throw DataError("instance family: could not place non-overlapping segments");
  }
  std::sort(spec.segments.begin(), spec.segments.end(),
            [](const PlantedSegment& a, const PlantedSegment& b) { return a.start < b.start; });
  spec.seed = rng.next_u64();
  spec.validate();
  return spec;
}

SyntheticSpec constant_arm_instance(std::span<const double> arm_means,
                                    std::int64_t frames_per_arm, double fps, double noise_std,
                                    std::uint64_t seed) {
  SyntheticSpec spec;
  spec.total_frames = static_cast<std::int64_t>(arm_means.size()) * frames_per_arm;
  spec.fps = fps;
  spec.noise_std = noise_std;
  spec.seed = seed;
  for (std::size_t a = 0; a < arm_means.size(); ++a) {
    const auto start = static_cast<std::int64_t>(a) * frames_per_arm;
    spec.segments.push_back({start, start + frames_per_arm, arm_means[a]});
  }
  spec.validate();
  return spec;
}

std::vector<TrialReport> run_trials(std::span<const Policy> policies,
                                    const InstanceFamily& family, int trials,
                                    const HarnessConfig& cfg, ExecMode mode) {
  if (trials < 1) throw ConfigError("run_trials: trials must be >= 1");
  if (policies.empty()) throw ConfigError("run_trials: no policies given");
  family.validate();

  std::vector<TrialReport> reports(static_cast<std::size_t>(trials) * policies.size());
  std::exception_ptr error;
  std::atomic<bool> errored{false};
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::parallel)
  for (int trial = 0; trial < trials; ++trial) {
    if (errored.load(std::memory_order_relaxed)) continue;
    try {
      const SyntheticProvider provider(
          family.instantiate(cfg.seed, static_cast<std::uint64_t>(trial)));
      const VideoMeta meta{family.total_frames, family.fps};
      for (std::size_t p = 0; p < policies.size(); ++p) {
        reports[static_cast<std::size_t>(trial) * policies.size() + p] =
            run_policy(policies[p], provider, meta, cfg, trial, ExecMode::serial);
      }
    } catch (...) {
#pragma omp critical(focus_run_trials_error)
      if (!errored.exchange(true)) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return reports;
}

std::vector<PolicySummary> summarize(std::span<const TrialReport> reports) {
  std::vector<PolicySummary> summaries;
  for (const TrialReport& report : reports) {
    auto it = std::find_if(summaries.begin(), summaries.end(),
                           [&](const PolicySummary& s) { return s.policy == report.policy; });
    if (it == summaries.end()) {
      summaries.push_back(PolicySummary{.policy = report.policy});
    }
  }

  for (PolicySummary& summary : summaries) {
    std::vector<double> captured, regret;
    double frames_seen = 0.0, pulls = 0.0, oracle = 0.0;
    std::int64_t hits = 0, with_arms = 0;
    for (const TrialReport& r : reports) {
      if (r.policy != summary.policy) continue;
      captured.push_back(r.captured_utility);
      regret.push_back(r.frame_regret);
      frames_seen += r.frames_seen_fraction;
      pulls += static_cast<double>(r.pulls);
      oracle += r.oracle_utility;
      if (r.arm_identification_hit) {
        ++with_arms;
        if (*r.arm_identification_hit) ++hits;
      }
    }
    const auto n = static_cast<double>(captured.size());
    summary.trials = static_cast<int>(captured.size());
    auto mean_of = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    auto ci95_of = [&](const std::vector<double>& v, double mean) {
      if (v.size() < 2) return 0.0;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0));
      return 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
    };
    summary.captured_mean = mean_of(captured);
    summary.captured_ci95 = ci95_of(captured, summary.captured_mean);
    summary.captured_median = quantile(captured, 0.5);
    summary.oracle_mean = oracle / n;
    summary.regret_mean = mean_of(regret);
    summary.regret_ci95 = ci95_of(regret, summary.regret_mean);
    summary.frames_seen_mean = frames_seen / n;
    summary.pulls_mean = pulls / n;
    summary.identification_rate =
        with_arms > 0 ? static_cast<double>(hits) / static_cast<double>(with_arms)
                      : std::numeric_limits<double>::quiet_NaN();
  }
  return summaries;
}

void write_summary_csv(std::ostream& out, std::span<const PolicySummary> summaries) {
  out << "policy,trials,captured_mean,captured_ci95,captured_median,oracle_mean,"
         "regret_mean,regret_ci95,frames_seen_mean,pulls_mean,identification_rate\n";
  char buf[512];
  for (const PolicySummary& s : summaries) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  s.policy.c_str(), s.trials, s.captured_mean, s.captured_ci95, s.captured_median,
                  s.oracle_mean, s.regret_mean, s.regret_ci95, s.frames_seen_mean, s.pulls_mean,
                  s.identification_rate);
    out << buf;
  }
}

IdentificationResult identification_rate(
    const std::function<SyntheticSpec(std::uint64_t trial)>& make_instance, double clip_seconds,
    const SelectionConfig& cfg, int trials, ExecMode mode) {
  if (trials < 1) throw ConfigError("identification_rate: trials must be >= 1");

  std::vector<char> hit(static_cast<std::size_t>(trials), 0);
  std::vector<double> jaccards(static_cast<std::size_t>(trials), 0.0);
  std::vector<std::int64_t> n_finals(static_cast<std::size_t>(trials), 0);
  std::vector<int> arm_counts(static_cast<std::size_t>(trials), 0);

#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::parallel)
  for (int trial = 0; trial < trials; ++trial) {
    const SyntheticSpec spec = make_instance(static_cast<std::uint64_t>(trial));
    const SyntheticProvider provider(spec);
    const VideoMeta meta{spec.total_frames, spec.fps};
    const auto arms = partition_timeline(meta, clip_seconds);

    SelectionConfig trial_cfg = cfg;
    trial_cfg.seed = stream_key(cfg.seed, Dom::trial, static_cast<std::uint64_t>(trial));
    const SelectionResult result = iterative_select(provider, arms, trial_cfg);
    const auto oracle = oracle_arm_set(provider.utility(), arms, cfg.m);

    hit[static_cast<std::size_t>(trial)] = result.selected == oracle ? 1 : 0;
    jaccards[static_cast<std::size_t>(trial)] = jaccard(result.selected, oracle);
    n_finals[static_cast<std::size_t>(trial)] = result.n_total;
    arm_counts[static_cast<std::size_t>(trial)] = static_cast<int>(arms.size());
  }

  IdentificationResult result;
  result.n_finals = n_finals;
  result.rate = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) /
                static_cast<double>(trials);
  result.mean_jaccard =
      std::accumulate(jaccards.begin(), jaccards.end(), 0.0) / static_cast<double>(trials);

  double worst = 1.0;
  for (int trial = 0; trial < trials; ++trial) {
    const double bound =
        1.0 - 6.0 * static_cast<double>(arm_counts[static_cast<std::size_t>(trial)]) /
                  static_cast<double>(n_finals[static_cast<std::size_t>(trial)]);
    worst = std::min(worst, bound);
  }
  result.theorem_bound = std::max(0.0, worst);
  return result;
}

double sign_test_p_greater(std::int64_t wins, std::int64_t losses) {
  internal_check(wins >= 0 && losses >= 0, "sign test: negative counts");
  const std::int64_t n = wins + losses;
  if (n == 0) return 1.0;
  const double log_half = std::log(0.5);
  double p = 0.0;
  for (std::int64_t i = wins; i <= n; ++i) {
    const double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(static_cast<double>(i) + 1.0) -
                            std::lgamma(static_cast<double>(n - i) + 1.0) +
                            static_cast<double>(n) * log_half;
    p += std::exp(log_term);
  }
  return std::min(1.0, p);
}

}  // namespace focus
