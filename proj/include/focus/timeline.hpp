#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

namespace focus {

struct VideoMeta {
  std::int64_t total_frames = 0;
  double fps = 0.0;

  void validate() const;
};

// One temporal clip, treated as a bandit arm. Frame range is inclusive.
struct Arm {
  int id = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t size() const { return end - start + 1; }
  bool contains(std::int64_t t) const { return t >= start && t <= end; }
};

// Number of frames per clip: round(clip_seconds * fps) to nearest, ties up.
std::int64_t frames_per_clip(const VideoMeta& meta, double clip_seconds);

// Partition [0, total_frames) into consecutive fixed-length arms. The last
// arm keeps the remainder (>= 1 frame) rather than dropping tail frames.
// Throws ConfigError when the clip length rounds to zero frames.
std::vector<Arm> partition_timeline(const VideoMeta& meta, double clip_seconds);

// Running account of the sampling budget: total pulls, per-arm pulls, and the
// set of distinct frames scored so far.
class BudgetLedger {
 public:
  BudgetLedger() = default;
  explicit BudgetLedger(std::size_t num_arms) : pulls_per_arm_(num_arms, 0) {}

  void record(int arm, std::int64_t frame);

  std::int64_t pulls_total() const { return pulls_total_; }
  std::int64_t pulls_for(int arm) const { return pulls_per_arm_.at(static_cast<std::size_t>(arm)); }
  const std::vector<std::int64_t>& pulls_per_arm() const { return pulls_per_arm_; }
  std::int64_t distinct_frames() const { return static_cast<std::int64_t>(seen_.size()); }

 private:
  std::vector<std::int64_t> pulls_per_arm_;
  std::int64_t pulls_total_ = 0;
  std::unordered_set<std::int64_t> seen_;
};

struct FramesSeen {
  double raw_pull_fraction = 0.0;
  // Distinct frames scored over total frames; the headline efficiency number.
  double distinct_fraction = 0.0;
};

FramesSeen frames_seen_fraction(const BudgetLedger& ledger, const VideoMeta& meta);

}  // namespace focus
