#pragma once

#include <cstdint>
#include <vector>

#include "focus/frameselect.hpp"
#include "focus/parallel.hpp"
#include "focus/provider.hpp"
#include "focus/selector.hpp"
#include "focus/timeline.hpp"

namespace focus {

struct PipelineConfig {
  double clip_seconds = 16.0;
  std::int64_t k = 64;  // keyframe budget
  SelectionConfig selection;
  enum class Algorithm { two_stage, iterative } algorithm = Algorithm::two_stage;
  CoarseRanking coarse_ranking = CoarseRanking::optimistic_mean;
};

// Default target arm count when the config leaves m at 0: about four
// keyframes per arm, clamped to [1, M].
int auto_target_arms(std::int64_t k, int num_arms);

struct PipelineResult {
  VideoMeta meta;
  std::vector<Arm> arms;
  SelectionResult selection;
  KeyframeSelection keyframes;
};

// End-to-end selection over one video: partition the timeline, run the
// configured arm-selection algorithm, and draw keyframes from the selected
// arms. Deterministic in (provider, config, seed).
PipelineResult run_pipeline(const RewardProvider& provider, const VideoMeta& meta,
                            const PipelineConfig& cfg, ExecMode mode = ExecMode::parallel);

}  // namespace focus
