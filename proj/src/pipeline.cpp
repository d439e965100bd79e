#include "focus/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "focus/error.hpp"

namespace focus {

int auto_target_arms(std::int64_t k, int num_arms) {
  const auto target = static_cast<int>((k + 3) / 4);
  return std::max(1, std::min(num_arms, target));
}

PipelineResult run_pipeline(const RewardProvider& provider, const VideoMeta& meta,
                            const PipelineConfig& cfg, ExecMode mode) {
  meta.validate();
  if (provider.total_frames() != meta.total_frames) {
    throw ConfigError("provider serves " + std::to_string(provider.total_frames()) +
                      " frames but the video has " + std::to_string(meta.total_frames));
  }
  if (cfg.k < 1) throw ConfigError("keyframe budget must be >= 1");

  PipelineResult result;
  result.meta = meta;
  result.arms = partition_timeline(meta, cfg.clip_seconds);

  SelectionConfig selection = cfg.selection;
  if (selection.m == 0) {
    selection.m = auto_target_arms(cfg.k, static_cast<int>(result.arms.size()));
  }

  result.selection = cfg.algorithm == PipelineConfig::Algorithm::iterative
                         ? iterative_select(provider, result.arms, selection)
                         : two_stage_select(provider, result.arms, selection, mode,
                                            cfg.coarse_ranking);

  result.keyframes = assemble(result.arms, result.selection.selected, result.selection.stats,
                              cfg.k, selection.seed);
  result.keyframes.pulls = result.selection.ledger.pulls_total();
  const FramesSeen seen = frames_seen_fraction(result.selection.ledger, meta);
  result.keyframes.frames_seen_fraction = seen.distinct_fraction;
  result.keyframes.raw_pull_fraction = seen.raw_pull_fraction;
  return result;
}

}  // namespace focus
