#include "focus/frameselect.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "focus/error.hpp"

namespace focus {

std::vector<std::pair<int, std::int64_t>> allocate_quota(std::span<const ArmQuotaInput> arms,
                                                         std::int64_t k) {
  if (arms.empty()) throw ConfigError("allocate_quota: no arms selected");
  if (k < 0) throw ConfigError("allocate_quota: negative budget");

  std::vector<ArmQuotaInput> sorted(arms.begin(), arms.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ArmQuotaInput& a, const ArmQuotaInput& b) { return a.id < b.id; });
  for (const auto& arm : sorted) {
    if (arm.size < 1) throw ConfigError("allocate_quota: arm of size zero");
  }

  const auto n = static_cast<std::int64_t>(sorted.size());
  std::int64_t capacity = 0;
  for (const auto& arm : sorted) capacity += arm.size;
  const std::int64_t budget = std::min(k, capacity);

  std::vector<std::int64_t> quota(sorted.size(), 0);
  if (budget < n) {
    // Too few slots to give every arm one: the highest-mean arms win them.
    std::vector<std::size_t> order(sorted.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (sorted[a].mean != sorted[b].mean) return sorted[a].mean > sorted[b].mean;
      return sorted[a].id < sorted[b].id;
    });
    for (std::int64_t i = 0; i < budget; ++i) quota[order[static_cast<std::size_t>(i)]] = 1;
  } else {
    const std::int64_t base = budget / n;
    const std::int64_t extras = budget % n;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      quota[i] = base + (static_cast<std::int64_t>(i) < extras ? 1 : 0);
    }
    // Cap at arm size; hand surplus to the arms with the most remaining room.
    std::int64_t surplus = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (quota[i] > sorted[i].size) {
        surplus += quota[i] - sorted[i].size;
        quota[i] = sorted[i].size;
      }
    }
    while (surplus > 0) {
      std::size_t target = sorted.size();
      std::int64_t best_room = 0;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        const std::int64_t room = sorted[i].size - quota[i];
        if (room > best_room) {
          best_room = room;
          target = i;
        }
      }
      internal_check(target < sorted.size(), "allocate_quota: surplus without capacity");
      const std::int64_t give = std::min(surplus, best_room);
      quota[target] += give;
      surplus -= give;
    }
  }

  std::vector<std::pair<int, std::int64_t>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) out.emplace_back(sorted[i].id, quota[i]);
  return out;
}

InterpolatedScores interpolate_rewards(const Arm& arm, std::span<const Observation> observations) {
  InterpolatedScores result;
  result.scores.assign(static_cast<std::size_t>(arm.size()), 0.0);

  // Average duplicate observations per frame.
  std::map<std::int64_t, std::pair<double, std::int64_t>> by_frame;  // frame -> (sum, count)
  for (const Observation& obs : observations) {
    internal_check(arm.contains(obs.frame), "interpolate_rewards: observation outside arm");
    auto& acc = by_frame[obs.frame];
    acc.first += obs.reward;
    acc.second += 1;
  }

  if (by_frame.empty()) {
    const double uniform = 1.0 / static_cast<double>(arm.size());
    std::fill(result.scores.begin(), result.scores.end(), uniform);
    result.uniform_fallback = true;
    return result;
  }

  std::vector<std::int64_t> frames;
  std::vector<double> values;
  frames.reserve(by_frame.size());
  values.reserve(by_frame.size());
  for (const auto& [frame, acc] : by_frame) {
    frames.push_back(frame);
    values.push_back(acc.first / static_cast<double>(acc.second));
  }

  // Sweep: advance to the next observed frame only when it is strictly
  // closer, so equidistant frames keep the earlier observation's value.
  std::size_t j = 0;
  for (std::int64_t t = arm.start; t <= arm.end; ++t) {
    while (j + 1 < frames.size() &&
           std::llabs(frames[j + 1] - t) < std::llabs(frames[j] - t)) {
      ++j;
    }
    result.scores[static_cast<std::size_t>(t - arm.start)] = values[j];
  }
  return result;
}

namespace {

// Exponential-key weighted sampling without replacement: frame i gets key
// log(u_i)/w_i and the k largest keys win. Each frame's uniform comes from
// its own counter, so keys are order-independent.
void take_weighted(const Arm& arm, std::span<const double> scores,
                   const std::vector<std::size_t>& candidates, std::int64_t take,
                   const CounterRng& rng, std::vector<std::int64_t>& out) {
  std::vector<std::pair<double, std::int64_t>> keyed;
  keyed.reserve(candidates.size());
  for (std::size_t i : candidates) {
    const double w = scores.empty() ? 1.0 : scores[i];
    const double key = std::log(rng.unit_at(i)) / (scores.empty() ? 1.0 : w);
    keyed.emplace_back(key, arm.start + static_cast<std::int64_t>(i));
  }
  std::partial_sort(keyed.begin(), keyed.begin() + take, keyed.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  for (std::int64_t i = 0; i < take; ++i) out.push_back(keyed[static_cast<std::size_t>(i)].second);
}

}  // namespace

std::vector<std::int64_t> sample_frames(const Arm& arm, std::span<const double> scores,
                                        std::int64_t k_a, CounterRng& rng) {
  internal_check(static_cast<std::int64_t>(scores.size()) == arm.size(),
                 "sample_frames: score vector does not match arm size");
  if (k_a < 0 || k_a > arm.size()) {
    throw ConfigError("sample_frames: k_a=" + std::to_string(k_a) + " outside [0, " +
                      std::to_string(arm.size()) + "]");
  }
  std::vector<std::int64_t> out;
  if (k_a == 0) return out;
  out.reserve(static_cast<std::size_t>(k_a));

  std::vector<std::size_t> positive;
  std::vector<std::size_t> zero;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    internal_check(scores[i] >= 0.0, "sample_frames: negative score");
    (scores[i] > 0.0 ? positive : zero).push_back(i);
  }

  if (positive.empty()) {
    // All-zero scores: uniform fallback over the whole arm.
    take_weighted(arm, {}, zero, k_a, rng, out);
  } else if (k_a <= static_cast<std::int64_t>(positive.size())) {
    take_weighted(arm, scores, positive, k_a, rng, out);
  } else {
    take_weighted(arm, scores, positive, static_cast<std::int64_t>(positive.size()), rng, out);
    take_weighted(arm, {}, zero, k_a - static_cast<std::int64_t>(positive.size()), rng, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

KeyframeSelection assemble(std::span<const Arm> arms, std::span<const int> selected_arms,
                           std::span<const ArmStats> stats, std::int64_t k, std::uint64_t seed) {
  internal_check(!selected_arms.empty(), "assemble: no selected arms");
  if (k < 1) throw ConfigError("assemble: keyframe budget must be >= 1");

  KeyframeSelection result;
  result.selected_arms.assign(selected_arms.begin(), selected_arms.end());
  std::sort(result.selected_arms.begin(), result.selected_arms.end());

  std::vector<ArmQuotaInput> inputs;
  std::int64_t capacity = 0;
  for (int a : result.selected_arms) {
    const Arm& arm = arms[static_cast<std::size_t>(a)];
    inputs.push_back({a, arm.size(), stats[static_cast<std::size_t>(a)].mean()});
    capacity += arm.size();
  }
  if (capacity < k) {
    result.warnings.push_back("keyframe budget " + std::to_string(k) +
                              " exceeds the " + std::to_string(capacity) +
                              " frames available in the selected arms; returning all of them");
  }
  result.per_arm_quota = allocate_quota(inputs, k);

  for (const auto& [arm_id, quota] : result.per_arm_quota) {
    if (quota == 0) continue;
    const Arm& arm = arms[static_cast<std::size_t>(arm_id)];
    const auto interp =
        interpolate_rewards(arm, stats[static_cast<std::size_t>(arm_id)].observations());
    if (interp.uniform_fallback) {
      result.warnings.push_back("arm " + std::to_string(arm_id) +
                                " has no observations; sampling uniformly");
    }
    CounterRng rng(seed, Dom::frame_select, static_cast<std::uint64_t>(arm_id));
    const auto frames = sample_frames(arm, interp.scores, quota, rng);
    result.frames.insert(result.frames.end(), frames.begin(), frames.end());
  }
  std::sort(result.frames.begin(), result.frames.end());
  internal_check(std::adjacent_find(result.frames.begin(), result.frames.end()) ==
                     result.frames.end(),
                 "assemble: duplicate frame across arms");
  internal_check(static_cast<std::int64_t>(result.frames.size()) == std::min(k, capacity),
                 "assemble: frame count does not match budget");
  return result;
}

}  // namespace focus
