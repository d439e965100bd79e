#include <cmath>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "focus/error.hpp"
#include "focus/provider.hpp"
#include "focus/rng.hpp"
#include "oracle_utils.hpp"

using namespace focus;

TEST_CASE("generate_process: planted segment, no smoothing, no noise") {
  SyntheticSpec spec;
  spec.total_frames = 300;
  spec.segments = {{100, 200, 1.0}};
  spec.seed = 3;
  const SyntheticProvider provider(spec);
  CHECK(provider.score(150) == 1.0);
  CHECK(provider.score(50) == 0.0);
  CHECK(provider.score(199) == 1.0);
  CHECK(provider.score(200) == 0.0);
}

TEST_CASE("generate_process: noiseless scores equal the utility everywhere") {
  SyntheticSpec spec;
  spec.total_frames = 2000;
  spec.segments = {{100, 300, 0.8}, {900, 1000, 0.4}};
  spec.base_level = 0.1;
  spec.smoothing_half_life_seconds = 1.0;
  const SyntheticProvider provider(spec);
  for (std::int64_t t = 0; t < spec.total_frames; ++t) {
    REQUIRE(provider.score(t) == provider.ground_truth(t));
  }
}

TEST_CASE("generate_process: seed determinism") {
  SyntheticSpec spec;
  spec.total_frames = 500;
  spec.segments = {{50, 120, 0.9}};
  spec.noise_std = 0.1;
  spec.seed = 77;
  const SyntheticProvider a(spec);
  const SyntheticProvider b(spec);
  CHECK(a.utility() == b.utility());
  for (std::int64_t t = 0; t < spec.total_frames; ++t) {
    REQUIRE(a.score(t, 0) == b.score(t, 0));
    REQUIRE(a.score(t, 3) == b.score(t, 3));
  }
  // A different ordinal draws fresh noise.
  CHECK(a.score(60, 0) != a.score(60, 1));
}

TEST_CASE("generate_process: rejects overlapping segments") {
  SyntheticSpec spec;
  spec.total_frames = 100;
  spec.segments = {{10, 40, 0.5}, {30, 60, 0.7}};
  CHECK_THROWS_AS(spec.validate(), DataError);
}

TEST_CASE("ar1_sequence: empirical ACF matches the closed form phi^d") {
  const double phi = 0.9;
  const auto x = ar1_sequence(phi, 100000, 0.5, 0.15, 2024);
  for (std::int64_t d = 1; d <= 20; ++d) {
    const double expected = std::pow(phi, static_cast<double>(d));
    CHECK(std::abs(oracle::acf_direct(x, d) - expected) <= 0.05);
  }
}

TEST_CASE("ar1_sequence: stationary moments") {
  const auto x = ar1_sequence(0.95, 200000, 0.5, 0.1, 5);
  CHECK(oracle::batch_mean(x) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::sqrt(oracle::batch_population_variance(x)) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("smoothing_coefficient: half-life identity") {
  const double phi = smoothing_coefficient(5.0, 30.0);
  CHECK(std::pow(phi, 5.0 * 30.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(smoothing_coefficient(0.0, 30.0) == 0.0);
}

TEST_CASE("noise: unbiased in the interior") {
  SyntheticSpec spec;
  spec.total_frames = 10;
  spec.segments = {{3, 4, 0.63}};
  spec.noise_std = 0.08;
  spec.base_level = 0.3;
  spec.seed = 31;
  const SyntheticProvider provider(spec);

  const int draws = 100000;
  for (std::int64_t frame : {std::int64_t{3}, std::int64_t{7}}) {
    const double y = provider.ground_truth(frame);
    REQUIRE(y >= 3.0 * spec.noise_std);
    REQUIRE(y <= 1.0 - 3.0 * spec.noise_std);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double r = provider.score(frame, static_cast<std::uint64_t>(i));
      REQUIRE(r >= 0.0);
      REQUIRE(r <= 1.0);
      sum += r;
      sum_sq += r * r;
    }
    const double mean = sum / draws;
    const double sd = std::sqrt(sum_sq / draws - mean * mean);
    const double se = sd / std::sqrt(static_cast<double>(draws));
    CHECK(std::abs(mean - y) <= 3.0 * se);
  }
}

TEST_CASE("noise: bounded at the edges of [0,1]") {
  SyntheticSpec spec;
  spec.total_frames = 4;
  spec.segments = {{1, 2, 1.0}};
  spec.noise_std = 0.2;
  spec.seed = 9;
  const SyntheticProvider provider(spec);
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const double at_zero = provider.score(0, i);
    const double at_one = provider.score(1, i);
    REQUIRE(at_zero >= 0.0);
    REQUIRE(at_zero <= 1.0);
    REQUIRE(at_one >= 0.0);
    REQUIRE(at_one <= 1.0);
  }
}

TEST_CASE("spec json: round trip and unknown key rejection") {
  SyntheticSpec spec;
  spec.total_frames = 1000;
  spec.fps = 29.97;
  spec.segments = {{10, 50, 0.9}};
  spec.smoothing_half_life_seconds = 2.0;
  spec.noise_std = 0.05;
  spec.base_level = 0.2;
  spec.seed = 123;

  const SyntheticSpec parsed = SyntheticSpec::from_json(spec.to_json());
  CHECK(parsed.total_frames == spec.total_frames);
  CHECK(parsed.fps == spec.fps);
  CHECK(parsed.seed == spec.seed);
  REQUIRE(parsed.segments.size() == 1);
  CHECK(parsed.segments[0].level == 0.9);

  auto j = spec.to_json();
  j["typo_field"] = 1;
  CHECK_THROWS_AS(SyntheticSpec::from_json(j), DataError);

  auto j2 = spec.to_json();
  j2["segments"][0]["oops"] = 1;
  CHECK_THROWS_AS(SyntheticSpec::from_json(j2), DataError);
}

TEST_CASE("score file: basic parse") {
  std::istringstream in("frame_index,score\n0,0.1\n1,0.9\n2,0.5\n");
  const ScoreFileProvider provider(parse_scores(in, "mem"));
  CHECK(provider.total_frames() == 3);
  CHECK(provider.score(1) == 0.9);
  CHECK(provider.score(0) == 0.1);
  CHECK(provider.ground_truth(2) == 0.5);
}

TEST_CASE("score file: errors name the offending line") {
  {
    std::istringstream in("frame_index,score\n0,0.1\n1,1.2\n");
    CHECK_THROWS_WITH_AS(parse_scores(in, "mem"), doctest::Contains("mem:3"), DataError);
  }
  {
    std::istringstream in("frame_index,score\n0,0.1\n2,0.2\n");  // missing frame 1
    CHECK_THROWS_WITH_AS(parse_scores(in, "mem"), doctest::Contains("mem:3"), DataError);
  }
  {
    std::istringstream in("frame_index,score\n1,0.1\n0,0.2\n");  // non-monotone
    CHECK_THROWS_WITH_AS(parse_scores(in, "mem"), doctest::Contains("mem:2"), DataError);
  }
  {
    std::istringstream in("bad_header\n0,0.1\n");
    CHECK_THROWS_WITH_AS(parse_scores(in, "mem"), doctest::Contains("mem:1"), DataError);
  }
  {
    std::istringstream in("frame_index,score\n0,abc\n");
    CHECK_THROWS_WITH_AS(parse_scores(in, "mem"), doctest::Contains("mem:2"), DataError);
  }
}

TEST_CASE("score file: write/parse round trip is exact") {
  std::vector<double> scores;
  CounterRng rng(55, Dom::trial, 9);
  for (int i = 0; i < 500; ++i) scores.push_back(rng.next_unit());
  std::ostringstream out;
  write_scores(out, scores);
  std::istringstream in(out.str());
  CHECK(parse_scores(in, "mem") == scores);
}

TEST_CASE("score file: one-hour capacity with O(1) queries") {
  std::ostringstream out;
  std::vector<double> scores(108000, 0.25);
  scores[54321] = 0.75;
  write_scores(out, scores);
  std::istringstream in(out.str());
  const ScoreFileProvider provider(parse_scores(in, "mem"));
  REQUIRE(provider.total_frames() == 108000);
  CHECK(provider.score(54321) == 0.75);
  CHECK(provider.score(107999) == 0.25);
}
