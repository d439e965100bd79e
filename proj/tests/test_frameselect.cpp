#include <algorithm>
#include <cmath>
#include <map>

#include <doctest.h>

#include "focus/error.hpp"
#include "focus/frameselect.hpp"
#include "focus/rng.hpp"
#include "oracle_utils.hpp"

using namespace focus;

namespace {

std::map<int, std::int64_t> quota_map(const std::vector<std::pair<int, std::int64_t>>& quotas) {
  return {quotas.begin(), quotas.end()};
}

}  // namespace

TEST_CASE("quota: even split") {
  std::vector<ArmQuotaInput> arms;
  for (int i = 0; i < 16; ++i) arms.push_back({i, 480, 0.5});
  const auto quotas = allocate_quota(arms, 64);
  for (const auto& [arm, quota] : quotas) CHECK(quota == 4);
}

TEST_CASE("quota: largest remainder, ties to the lower arm id") {
  std::vector<ArmQuotaInput> arms{{0, 100, 0.5}, {1, 100, 0.5}, {2, 100, 0.5}};
  const auto quotas = quota_map(allocate_quota(arms, 10));
  CHECK(quotas.at(0) == 4);
  CHECK(quotas.at(1) == 3);
  CHECK(quotas.at(2) == 3);
}

TEST_CASE("quota: capped at arm size with surplus redistributed") {
  std::vector<ArmQuotaInput> arms{{0, 2, 0.9}, {1, 100, 0.5}};
  const auto quotas = quota_map(allocate_quota(arms, 5));
  CHECK(quotas.at(0) == 2);
  CHECK(quotas.at(1) == 3);
}

TEST_CASE("quota: fewer slots than arms go to the highest means") {
  std::vector<ArmQuotaInput> arms{{0, 50, 0.2}, {1, 50, 0.9}, {2, 50, 0.5}, {3, 50, 0.9}};
  const auto quotas = quota_map(allocate_quota(arms, 2));
  CHECK(quotas.at(0) == 0);
  CHECK(quotas.at(1) == 1);  // tied 0.9s resolve to lower ids
  CHECK(quotas.at(3) == 1);
  CHECK(quotas.at(2) == 0);
}

TEST_CASE("quota: conservation under random shapes") {
  CounterRng rng(7, Dom::trial, 50);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + static_cast<int>(rng.next_below(12));
    std::vector<ArmQuotaInput> arms;
    std::int64_t capacity = 0;
    for (int i = 0; i < n; ++i) {
      const auto size = static_cast<std::int64_t>(1 + rng.next_below(30));
      capacity += size;
      arms.push_back({i, size, rng.next_unit()});
    }
    const auto k = static_cast<std::int64_t>(rng.next_below(80));
    const auto quotas = allocate_quota(arms, k);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < quotas.size(); ++i) {
      CHECK(quotas[i].second >= 0);
      CHECK(quotas[i].second <= arms[i].size);
      total += quotas[i].second;
    }
    CHECK(total == std::min(k, capacity));
    // With no caps binding and k >= n, the spread stays within one.
    if (k >= n) {
      std::int64_t lo = 1 << 30, hi = 0;
      bool capped = false;
      for (std::size_t i = 0; i < quotas.size(); ++i) {
        capped = capped || quotas[i].second == arms[i].size;
        lo = std::min(lo, quotas[i].second);
        hi = std::max(hi, quotas[i].second);
      }
      if (!capped) CHECK(hi - lo <= 1);
    }
  }
}

TEST_CASE("interpolate: nearest neighbor split") {
  const Arm arm{0, 0, 9};
  const std::vector<Observation> obs{{2, 0.8}, {7, 0.2}};
  const auto result = interpolate_rewards(arm, obs);
  REQUIRE(result.scores.size() == 10);
  for (int t = 0; t <= 4; ++t) CHECK(result.scores[static_cast<std::size_t>(t)] == 0.8);
  for (int t = 5; t <= 9; ++t) CHECK(result.scores[static_cast<std::size_t>(t)] == 0.2);
  CHECK_FALSE(result.uniform_fallback);
}

TEST_CASE("interpolate: equidistant tie goes to the earlier frame") {
  const Arm arm{0, 0, 8};
  const auto result = interpolate_rewards(arm, std::vector<Observation>{{2, 0.8}, {6, 0.2}});
  CHECK(result.scores[4] == 0.8);
}

TEST_CASE("interpolate: single observation gives a constant vector") {
  const Arm arm{0, 10, 19};
  const auto result = interpolate_rewards(arm, std::vector<Observation>{{13, 0.4}});
  for (double s : result.scores) CHECK(s == 0.4);
}

TEST_CASE("interpolate: duplicates averaged, observed frames exact") {
  const Arm arm{0, 0, 5};
  const std::vector<Observation> obs{{2, 0.2}, {2, 0.4}, {5, 1.0}};
  const auto result = interpolate_rewards(arm, obs);
  CHECK(result.scores[2] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(result.scores[5] == 1.0);
}

TEST_CASE("interpolate: no observations falls back to uniform with a flag") {
  const Arm arm{0, 0, 7};
  const auto result = interpolate_rewards(arm, {});
  CHECK(result.uniform_fallback);
  for (double s : result.scores) CHECK(s == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("interpolate: agrees with the quadratic brute force") {
  CounterRng rng(123, Dom::trial, 60);
  for (int rep = 0; rep < 100; ++rep) {
    const auto size = static_cast<std::int64_t>(2 + rng.next_below(60));
    const Arm arm{0, 100, 100 + size - 1};
    const int obs_count = 1 + static_cast<int>(rng.next_below(10));
    std::vector<Observation> obs;
    std::map<std::int64_t, std::pair<double, int>> grouped;
    for (int i = 0; i < obs_count; ++i) {
      const std::int64_t frame = arm.start + static_cast<std::int64_t>(rng.next_below(
                                                 static_cast<std::uint64_t>(size)));
      const double reward = rng.next_unit();
      obs.push_back({frame, reward});
      auto& acc = grouped[frame];
      acc.first += reward;
      acc.second += 1;
    }
    std::vector<std::int64_t> frames;
    std::vector<double> values;
    for (const auto& [frame, acc] : grouped) {
      frames.push_back(frame);
      values.push_back(acc.first / acc.second);
    }
    const auto expected = oracle::interpolate_nn_bruteforce(arm, frames, values);
    const auto got = interpolate_rewards(arm, obs);
    REQUIRE(got.scores.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      REQUIRE(got.scores[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sample: equal scores with full budget return the whole arm") {
  const Arm arm{0, 5, 12};
  const std::vector<double> scores(8, 0.3);
  CounterRng rng(1, Dom::frame_select, 0);
  const auto frames = sample_frames(arm, scores, 8, rng);
  CHECK(frames == std::vector<std::int64_t>{5, 6, 7, 8, 9, 10, 11, 12});
}

TEST_CASE("sample: all mass on one frame makes it certain") {
  const Arm arm{0, 0, 3};
  const std::vector<double> scores{1.0, 0.0, 0.0, 0.0};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CounterRng rng(seed, Dom::frame_select, 0);
    CHECK(sample_frames(arm, scores, 1, rng) == std::vector<std::int64_t>{0});
  }
}

TEST_CASE("sample: single-draw marginal matches the weights") {
  const Arm arm{0, 0, 1};
  const std::vector<double> scores{0.75, 0.25};
  int first = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(static_cast<std::uint64_t>(i), Dom::frame_select, 7);
    if (sample_frames(arm, scores, 1, rng)[0] == 0) ++first;
  }
  CHECK(static_cast<double>(first) / draws == doctest::Approx(0.75).epsilon(0.015));
}

TEST_CASE("sample: chi-squared test of single-draw marginals") {
  // Eight frames with distinct weights; 1e5 seeded draws; chi2 critical value
  // for df=7 at the 1% level is 18.475.
  const Arm arm{0, 0, 7};
  const std::vector<double> scores{0.02, 0.28, 0.05, 0.15, 0.2, 0.1, 0.08, 0.12};
  std::vector<int> counts(8, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(static_cast<std::uint64_t>(i), Dom::frame_select, 8);
    ++counts[static_cast<std::size_t>(sample_frames(arm, scores, 1, rng)[0])];
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const double expected = scores[i] * draws;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  CHECK(chi2 < 18.475);
}

TEST_CASE("sample: zero-score frames drawn only after positives run out") {
  const Arm arm{0, 0, 9};
  std::vector<double> scores(10, 0.0);
  scores[3] = 0.5;
  scores[8] = 0.1;
  CounterRng rng(42, Dom::frame_select, 1);
  const auto frames = sample_frames(arm, scores, 4, rng);
  CHECK(std::find(frames.begin(), frames.end(), 3) != frames.end());
  CHECK(std::find(frames.begin(), frames.end(), 8) != frames.end());
  CHECK(frames.size() == 4);
}

TEST_CASE("sample: all-zero scores fall back to uniform") {
  const Arm arm{0, 0, 19};
  const std::vector<double> scores(20, 0.0);
  CounterRng rng(9, Dom::frame_select, 2);
  const auto frames = sample_frames(arm, scores, 5, rng);
  CHECK(frames.size() == 5);
  CHECK(std::adjacent_find(frames.begin(), frames.end()) == frames.end());
}

TEST_CASE("sample: k_a bounds") {
  const Arm arm{0, 0, 4};
  const std::vector<double> scores(5, 0.2);
  CounterRng rng(3, Dom::frame_select, 3);
  CHECK(sample_frames(arm, scores, 0, rng).empty());
  CHECK_THROWS_AS(sample_frames(arm, scores, 6, rng), ConfigError);
}

TEST_CASE("assemble: full budget on one arm returns every frame") {
  const std::vector<Arm> arms{{0, 0, 9}};
  std::vector<ArmStats> stats(1);
  stats[0].update(4, 0.9);
  const std::vector<int> selected{0};
  const auto result = assemble(arms, selected, stats, 10, 5);
  CHECK(result.frames == std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("assemble: concentrated scores pick the argmax frames") {
  // Two arms, each with one observed hot frame and observed-zero elsewhere.
  const std::vector<Arm> arms{{0, 0, 9}, {1, 10, 19}};
  std::vector<ArmStats> stats(2);
  for (std::int64_t t = 0; t < 10; ++t) stats[0].update(t, t == 4 ? 1.0 : 0.0);
  for (std::int64_t t = 10; t < 20; ++t) stats[1].update(t, t == 17 ? 1.0 : 0.0);
  const std::vector<int> selected{0, 1};
  const auto result = assemble(arms, selected, stats, 2, 5);
  CHECK(result.frames == std::vector<std::int64_t>{4, 17});
}

TEST_CASE("assemble: invariants on a larger run") {
  const std::vector<Arm> arms{{0, 0, 19}, {1, 20, 39}, {2, 40, 49}};
  std::vector<ArmStats> stats(3);
  CounterRng rng(11, Dom::trial, 70);
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 6; ++i) {
      const std::int64_t frame =
          arms[static_cast<std::size_t>(a)].start +
          static_cast<std::int64_t>(rng.next_below(
              static_cast<std::uint64_t>(arms[static_cast<std::size_t>(a)].size())));
      stats[static_cast<std::size_t>(a)].update(frame, rng.next_unit());
    }
  }
  const std::vector<int> selected{0, 1, 2};
  const auto result = assemble(arms, selected, stats, 12, 77);
  CHECK(result.frames.size() == 12);
  CHECK(std::is_sorted(result.frames.begin(), result.frames.end()));
  CHECK(std::adjacent_find(result.frames.begin(), result.frames.end()) == result.frames.end());
  for (std::int64_t frame : result.frames) {
    bool inside = false;
    for (int a : selected) inside = inside || arms[static_cast<std::size_t>(a)].contains(frame);
    CHECK(inside);
  }
  std::int64_t quota_sum = 0;
  for (const auto& [arm, quota] : result.per_arm_quota) quota_sum += quota;
  CHECK(quota_sum == 12);
}

TEST_CASE("assemble: budget beyond capacity returns everything plus a warning") {
  const std::vector<Arm> arms{{0, 0, 4}, {1, 5, 9}};
  std::vector<ArmStats> stats(2);
  stats[0].update(1, 0.5);
  stats[1].update(6, 0.5);
  const std::vector<int> selected{0, 1};
  const auto result = assemble(arms, selected, stats, 64, 3);
  CHECK(result.frames.size() == 10);
  REQUIRE(!result.warnings.empty());
}

TEST_CASE("assemble: unobserved arm triggers the uniform-fallback warning") {
  const std::vector<Arm> arms{{0, 0, 9}};
  std::vector<ArmStats> stats(1);
  const std::vector<int> selected{0};
  const auto result = assemble(arms, selected, stats, 3, 3);
  CHECK(result.frames.size() == 3);
  REQUIRE(!result.warnings.empty());
}
