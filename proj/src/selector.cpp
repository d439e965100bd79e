#include "focus/selector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>

#include "focus/error.hpp"

namespace focus {

int coarse_set_size(double alpha, int num_arms) {
  return static_cast<int>(std::ceil(alpha * static_cast<double>(num_arms) - 1e-9));
}

SelectionConfig resolve_config(const SelectionConfig& cfg, int num_arms) {
  if (num_arms < 1) throw ConfigError("selection requires at least one arm");
  SelectionConfig r = cfg;
  if (r.max_iterations == 0) r.max_iterations = 50 * static_cast<std::int64_t>(num_arms);
  if (r.m < 1) throw ConfigError("m must be >= 1");
  if (r.m > num_arms) {
    throw ConfigError("m=" + std::to_string(r.m) + " exceeds arm count " + std::to_string(num_arms));
  }
  if (r.q < 1) throw ConfigError("q must be >= 1");
  if (r.z < 1) throw ConfigError("z must be >= 1");
  if (!(r.alpha > 0.0 && r.alpha <= 1.0)) throw ConfigError("alpha must be in (0,1]");
  if (r.pulls_per_iteration < 1) throw ConfigError("pulls_per_iteration must be >= 1");
  if (r.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (coarse_set_size(r.alpha, num_arms) < r.m) {
    throw ConfigError("coarse set ceil(alpha*M)=" +
                      std::to_string(coarse_set_size(r.alpha, num_arms)) +
                      " is smaller than m=" + std::to_string(r.m));
  }
  return r;
}

ArmSampler::ArmSampler(const Arm& arm, std::uint64_t seed)
    : arm_(arm), rng_(seed, Dom::arm_sampler, static_cast<std::uint64_t>(arm.id)) {}

ArmSampler::Draw ArmSampler::next() {
  if (!exhausted_ && remaining_.empty() && observed_.empty()) {
    remaining_.resize(static_cast<std::size_t>(arm_.size()));
    std::iota(remaining_.begin(), remaining_.end(), arm_.start);
  }
  if (!exhausted_) {
    // Fisher-Yates step: pick one of the not-yet-pulled frames.
    const auto pick = static_cast<std::size_t>(rng_.next_below(remaining_.size()));
    std::swap(remaining_[pick], remaining_.back());
    const std::int64_t frame = remaining_.back();
    remaining_.pop_back();
    if (remaining_.empty()) exhausted_ = true;
    return {frame, 0};
  }
  // Exhausted: re-observe uniformly with replacement.
  const std::int64_t frame = arm_.start + static_cast<std::int64_t>(
                                              rng_.next_below(static_cast<std::uint64_t>(arm_.size())));
  auto& count = observed_[frame];
  ++count;  // every frame was observed once during the without-replacement phase
  return {frame, count};
}

namespace {

struct Pull {
  int arm = 0;
  std::int64_t frame = 0;
  std::uint64_t ordinal = 0;
  double reward = 0.0;
};

std::vector<double> means_of(std::span<const ArmStats> stats) {
  std::vector<double> out(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) out[i] = stats[i].mean();
  return out;
}

std::vector<double> radii_of(std::span<const ArmStats> stats, std::int64_t n_total) {
  std::vector<double> out(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) out[i] = bernstein_radius(stats[i], n_total);
  return out;
}

void score_batch(const RewardProvider& provider, std::vector<Pull>& pulls, ExecMode mode) {
  const auto n = static_cast<std::int64_t>(pulls.size());
  // Exceptions may not escape an OpenMP region; capture and rethrow.
  std::exception_ptr error;
  std::atomic<bool> errored{false};
#pragma omp parallel for schedule(static) if (mode == ExecMode::parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    if (errored.load(std::memory_order_relaxed)) continue;
    try {
      pulls[static_cast<std::size_t>(i)].reward =
          provider.score(pulls[static_cast<std::size_t>(i)].frame,
                         pulls[static_cast<std::size_t>(i)].ordinal);
    } catch (...) {
#pragma omp critical(focus_score_batch_error)
      if (!errored.exchange(true)) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

// Applies a scored batch in (arm, frame, ordinal) order so the resulting
// stats do not depend on draw or evaluation order.
void apply_batch(std::vector<Pull>& pulls, std::vector<ArmStats>& stats, BudgetLedger& ledger,
                 SelectionTrace& trace, std::int64_t& n_total, const std::vector<int>& top_set) {
  std::sort(pulls.begin(), pulls.end(), [](const Pull& a, const Pull& b) {
    if (a.arm != b.arm) return a.arm < b.arm;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.ordinal < b.ordinal;
  });
  for (const Pull& p : pulls) {
    stats[static_cast<std::size_t>(p.arm)].update(p.frame, p.reward);
    ledger.record(p.arm, p.frame);
    ++n_total;
    trace.rounds.push_back({n_total, p.arm, p.frame, p.reward, top_set});
  }
}

std::vector<ArmSampler> make_samplers(std::span<const Arm> arms, std::uint64_t seed) {
  std::vector<ArmSampler> samplers;
  samplers.reserve(arms.size());
  for (const Arm& arm : arms) samplers.emplace_back(arm, seed);
  return samplers;
}

}  // namespace

bool check_separation(std::span<const ArmStats> stats, const std::vector<int>& current_top,
                      std::int64_t n_total) {
  internal_check(!current_top.empty(), "check_separation: empty top set");
  std::vector<bool> inside(stats.size(), false);
  for (int a : current_top) inside[static_cast<std::size_t>(a)] = true;

  double min_inside_lcb = std::numeric_limits<double>::infinity();
  double max_outside_ucb = -std::numeric_limits<double>::infinity();
  bool any_outside = false;
  for (std::size_t a = 0; a < stats.size(); ++a) {
    const ConfidenceBound cb = confidence_bounds(stats[a], n_total);
    if (inside[a]) {
      min_inside_lcb = std::min(min_inside_lcb, cb.lower);
    } else {
      any_outside = true;
      max_outside_ucb = std::max(max_outside_ucb, cb.upper);
    }
  }
  if (!any_outside) return true;
  return max_outside_ucb < min_inside_lcb;
}

SelectionResult iterative_select(const RewardProvider& provider, std::span<const Arm> arms,
                                 const SelectionConfig& raw_cfg) {
  const int num_arms = static_cast<int>(arms.size());
  const SelectionConfig cfg = resolve_config(raw_cfg, num_arms);

  SelectionResult result{.selected = {},
                         .trace = {},
                         .stats = std::vector<ArmStats>(arms.size()),
                         .ledger = BudgetLedger(arms.size()),
                         .n_total = 0};
  auto samplers = make_samplers(arms, cfg.seed);

  // Initialization: q pulls per arm, applied sequentially in arm order.
  for (int a = 0; a < num_arms; ++a) {
    for (int i = 0; i < cfg.q; ++i) {
      const auto draw = samplers[static_cast<std::size_t>(a)].next();
      const double reward = provider.score(draw.frame, draw.ordinal);
      result.stats[static_cast<std::size_t>(a)].update(draw.frame, reward);
      result.ledger.record(a, draw.frame);
      ++result.n_total;
      result.trace.rounds.push_back({result.n_total, a, draw.frame, reward, {}});
    }
  }

  for (std::int64_t iter = 0; iter < cfg.max_iterations; ++iter) {
    result.trace.iterations = iter + 1;
    const std::vector<double> means = means_of(result.stats);
    const std::vector<int> top = top_m(means, cfg.m);
    const std::vector<double> radii = radii_of(result.stats, result.n_total);

    std::vector<bool> inside(arms.size(), false);
    for (int a : top) inside[static_cast<std::size_t>(a)] = true;
    std::vector<double> perturbed(arms.size());
    for (std::size_t a = 0; a < arms.size(); ++a) {
      perturbed[a] = inside[a] ? means[a] - radii[a] : means[a] + radii[a];
    }
    const std::vector<int> perturbed_top = top_m(perturbed, cfg.m);

    if (perturbed_top == top) {
      result.selected = top;
      result.trace.terminated_by = StopReason::separation;
      return result;
    }

    // Most uncertain arm among those the perturbation would swap.
    int pull_arm = -1;
    double best_radius = -1.0;
    for (std::size_t a = 0; a < arms.size(); ++a) {
      const bool in_plain = inside[a];
      const bool in_perturbed =
          std::binary_search(perturbed_top.begin(), perturbed_top.end(), static_cast<int>(a));
      if (in_plain != in_perturbed && radii[a] > best_radius) {
        best_radius = radii[a];
        pull_arm = static_cast<int>(a);
      }
    }
    internal_check(pull_arm >= 0, "iterative_select: empty symmetric difference");

    for (int i = 0; i < cfg.pulls_per_iteration; ++i) {
      const auto draw = samplers[static_cast<std::size_t>(pull_arm)].next();
      const double reward = provider.score(draw.frame, draw.ordinal);
      result.stats[static_cast<std::size_t>(pull_arm)].update(draw.frame, reward);
      result.ledger.record(pull_arm, draw.frame);
      ++result.n_total;
      result.trace.rounds.push_back({result.n_total, pull_arm, draw.frame, reward, top});
    }
  }

  result.selected = top_m(means_of(result.stats), cfg.m);
  result.trace.terminated_by = StopReason::iteration_cap;
  return result;
}

SelectionResult two_stage_select(const RewardProvider& provider, std::span<const Arm> arms,
                                 const SelectionConfig& raw_cfg, ExecMode mode,
                                 CoarseRanking ranking) {
  const int num_arms = static_cast<int>(arms.size());
  const SelectionConfig cfg = resolve_config(raw_cfg, num_arms);

  SelectionResult result{.selected = {},
                         .trace = {},
                         .stats = std::vector<ArmStats>(arms.size()),
                         .ledger = BudgetLedger(arms.size()),
                         .n_total = 0};
  result.trace.terminated_by = StopReason::two_stage_complete;
  auto samplers = make_samplers(arms, cfg.seed);

  // Stage I: coarse exploration, q pulls on every arm.
  std::vector<Pull> batch;
  batch.reserve(static_cast<std::size_t>(num_arms) * static_cast<std::size_t>(cfg.q));
  for (int a = 0; a < num_arms; ++a) {
    for (int i = 0; i < cfg.q; ++i) {
      const auto draw = samplers[static_cast<std::size_t>(a)].next();
      batch.push_back({a, draw.frame, draw.ordinal, 0.0});
    }
  }
  score_batch(provider, batch, mode);
  apply_batch(batch, result.stats, result.ledger, result.trace, result.n_total, {});

  const std::vector<double> radii = radii_of(result.stats, result.n_total);
  std::vector<double> coarse_score = means_of(result.stats);
  if (ranking == CoarseRanking::optimistic_mean) {
    for (std::size_t a = 0; a < coarse_score.size(); ++a) coarse_score[a] += radii[a];
  }
  const std::vector<int> coarse = top_m(coarse_score, coarse_set_size(cfg.alpha, num_arms));

  // Stage II: fine-grained exploitation, z pulls on each coarse arm.
  batch.clear();
  batch.reserve(coarse.size() * static_cast<std::size_t>(cfg.z));
  for (int a : coarse) {
    for (int i = 0; i < cfg.z; ++i) {
      const auto draw = samplers[static_cast<std::size_t>(a)].next();
      batch.push_back({a, draw.frame, draw.ordinal, 0.0});
    }
  }
  score_batch(provider, batch, mode);
  apply_batch(batch, result.stats, result.ledger, result.trace, result.n_total, coarse);

  // Final recommendation by unbiased empirical means over all arms.
  result.selected = top_m(means_of(result.stats), cfg.m);
  return result;
}

}  // namespace focus
