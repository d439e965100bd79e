#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace focus {

// Reward source behind one pull. `ordinal` counts repeat queries of the same
// frame: noisy providers key fresh noise on (seed, frame, ordinal), so a
// given (frame, ordinal) pair always yields the same value no matter which
// thread or batch evaluates it. Implementations must be safe to call
// concurrently.
class RewardProvider {
 public:
  virtual ~RewardProvider() = default;

  virtual std::int64_t total_frames() const = 0;
  virtual double score(std::int64_t frame, std::uint64_t ordinal = 0) const = 0;

  virtual bool has_ground_truth() const { return false; }
  virtual double ground_truth(std::int64_t frame) const;
};

// Half-open frame range [start, end) planted at a fixed utility level.
struct PlantedSegment {
  std::int64_t start = 0;
  std::int64_t end = 0;
  double level = 0.0;
};

struct SyntheticSpec {
  std::int64_t total_frames = 0;
  double fps = 30.0;
  std::vector<PlantedSegment> segments;
  double smoothing_half_life_seconds = 0.0;
  double noise_std = 0.0;
  double base_level = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws DataError on overlapping or out-of-range segments

  // Strict schema: unknown keys are rejected.
  static SyntheticSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Per-frame smoothing coefficient phi such that an AR(1)-style process with
// that coefficient has autocorrelation 0.5 at lag half_life_seconds.
double smoothing_coefficient(double half_life_seconds, double fps);

// Ground-truth utility: planted segments over the base level, smoothed by a
// one-sided exponential kernel (coefficient from the spec half-life), clipped
// to [0,1]. Deterministic in the spec.
std::vector<double> generate_process(const SyntheticSpec& spec);

// Synthetic reward source. Noiseless queries return the utility exactly;
// noisy queries add zero-mean Gaussian noise truncated symmetrically at
// +/- min(y, 1-y), which keeps scores in [0,1] and the estimator unbiased
// wherever that truncation window is nonempty. At y in {0,1} the window is
// empty; such draws fall back to a clipped untruncated draw.
class SyntheticProvider final : public RewardProvider {
 public:
  explicit SyntheticProvider(SyntheticSpec spec);

  std::int64_t total_frames() const override { return spec_.total_frames; }
  double score(std::int64_t frame, std::uint64_t ordinal = 0) const override;
  bool has_ground_truth() const override { return true; }
  double ground_truth(std::int64_t frame) const override;

  const std::vector<double>& utility() const { return utility_; }
  const SyntheticSpec& spec() const { return spec_; }

 private:
  SyntheticSpec spec_;
  std::vector<double> utility_;
  std::uint64_t noise_key_;
};

// Precomputed scores served verbatim (noiseless). The scores double as the
// ground truth for evaluation purposes.
class ScoreFileProvider final : public RewardProvider {
 public:
  explicit ScoreFileProvider(std::vector<double> scores);

  std::int64_t total_frames() const override { return static_cast<std::int64_t>(scores_.size()); }
  double score(std::int64_t frame, std::uint64_t ordinal = 0) const override;
  bool has_ground_truth() const override { return true; }
  double ground_truth(std::int64_t frame) const override { return score(frame); }

  const std::vector<double>& scores() const { return scores_; }

 private:
  std::vector<double> scores_;
};

// Score file contract: UTF-8, LF line endings, header `frame_index,score`,
// frame_index dense from 0, scores in [0,1]. Parse errors name the line.
std::vector<double> parse_scores(std::istream& in, const std::string& origin);
ScoreFileProvider load_scores(const std::filesystem::path& path);
void write_scores(std::ostream& out, std::span<const double> scores);
void write_scores_file(const std::filesystem::path& path, std::span<const double> scores);

// Stationary AR(1) sequence around `mean`: x[t] - mean = phi*(x[t-1] - mean) + w[t].
// Unclipped; the Pearson autocorrelation at lag d is phi^d. Used by the ACF
// tooling, which needs a process with a closed-form correlation structure.
std::vector<double> ar1_sequence(double phi, std::int64_t length, double mean,
                                 double stationary_std, std::uint64_t seed,
                                 std::uint64_t sequence_id = 0);

}  // namespace focus
