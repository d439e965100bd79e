#include "focus/timeline.hpp"

#include <cmath>
#include <string>

#include "focus/error.hpp"

namespace focus {

void VideoMeta::validate() const {
  if (total_frames < 1) throw ConfigError("video must have at least one frame");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("fps must be positive and finite");
}

std::int64_t frames_per_clip(const VideoMeta& meta, double clip_seconds) {
  meta.validate();
  if (!(clip_seconds > 0.0) || !std::isfinite(clip_seconds)) {
    throw ConfigError("clip length must be positive and finite");
  }
  // floor(x + 0.5): nearest integer, ties rounded up. Stable for fps like 29.97.
  const auto frames = static_cast<std::int64_t>(std::floor(clip_seconds * meta.fps + 0.5));
  if (frames < 1) {
    throw ConfigError("clip length of " + std::to_string(clip_seconds) +
                      " s rounds to zero frames at " + std::to_string(meta.fps) + " fps");
  }
  return frames;
}

std::vector<Arm> partition_timeline(const VideoMeta& meta, double clip_seconds) {
  const std::int64_t per_clip = frames_per_clip(meta, clip_seconds);
  std::vector<Arm> arms;
  arms.reserve(static_cast<std::size_t>((meta.total_frames + per_clip - 1) / per_clip));
  for (std::int64_t start = 0; start < meta.total_frames; start += per_clip) {
    Arm arm;
    arm.id = static_cast<int>(arms.size());
    arm.start = start;
    arm.end = std::min(start + per_clip, meta.total_frames) - 1;
    arms.push_back(arm);
  }
  return arms;
}

void BudgetLedger::record(int arm, std::int64_t frame) {
  internal_check(arm >= 0 && static_cast<std::size_t>(arm) < pulls_per_arm_.size(),
                 "ledger: arm id out of range");
  ++pulls_per_arm_[static_cast<std::size_t>(arm)];
  ++pulls_total_;
  seen_.insert(frame);
}

FramesSeen frames_seen_fraction(const BudgetLedger& ledger, const VideoMeta& meta) {
  meta.validate();
  const double t = static_cast<double>(meta.total_frames);
  return FramesSeen{
      .raw_pull_fraction = static_cast<double>(ledger.pulls_total()) / t,
      .distinct_fraction = static_cast<double>(ledger.distinct_frames()) / t,
  };
}

}  // namespace focus
