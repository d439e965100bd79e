#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "focus/parallel.hpp"
#include "focus/provider.hpp"
#include "focus/rng.hpp"
#include "focus/stats.hpp"
#include "focus/timeline.hpp"

namespace focus {

struct SelectionConfig {
  int m = 0;                        // target arm count; 0 = derive from the frame budget
  int q = 4;                        // initialization pulls per arm
  int z = 15;                       // stage-II pulls per coarse arm
  double alpha = 0.25;              // coarse-set fraction of all arms, in (0,1]
  int pulls_per_iteration = 1;      // iterative refinement pulls per step
  std::int64_t max_iterations = 0;  // iterative cap; 0 = 50 * M
  std::uint64_t seed = 0;
};

// Size of the coarse set: ceil(alpha * M), evaluated with a small tolerance so
// decimal alphas like 0.1 do not tip over the next integer.
int coarse_set_size(double alpha, int num_arms);

// Validates the config against a concrete arm count and fills defaults.
// Throws ConfigError when m > M, ceil(alpha*M) < m, or any count is < 1.
SelectionConfig resolve_config(const SelectionConfig& cfg, int num_arms);

enum class StopReason {
  separation,
  iteration_cap,
  two_stage_complete,
};

struct TraceRound {
  std::int64_t n = 0;  // total pulls after this one
  int arm = 0;
  std::int64_t frame = 0;
  double reward = 0.0;
  std::vector<int> top_set;  // current top-m set; empty while initializing
};

struct SelectionTrace {
  std::vector<TraceRound> rounds;
  StopReason terminated_by = StopReason::two_stage_complete;
  std::int64_t iterations = 0;
};

struct SelectionResult {
  std::vector<int> selected;  // exactly m arm ids, sorted ascending
  SelectionTrace trace;
  std::vector<ArmStats> stats;
  BudgetLedger ledger;
  std::int64_t n_total = 0;
};

// Draws frames within one arm: uniform without replacement until the arm is
// exhausted, then uniform with replacement. The ordinal counts how many times
// the drawn frame has been observed before, which keys the provider's noise.
class ArmSampler {
 public:
  ArmSampler(const Arm& arm, std::uint64_t seed);

  struct Draw {
    std::int64_t frame = 0;
    std::uint64_t ordinal = 0;
  };

  Draw next();

 private:
  Arm arm_;
  CounterRng rng_;
  std::vector<std::int64_t> remaining_;
  bool exhausted_ = false;
  std::unordered_map<std::int64_t, std::uint64_t> observed_;  // used after exhaustion
};

// Fully sequential arm selection: initialize with q pulls per arm, then
// repeatedly compare the empirical top-m set against its perturbed
// counterpart (means deflated inside the set, inflated outside) and pull the
// highest-radius arm in their symmetric difference until the two sets agree
// or the iteration cap is hit.
SelectionResult iterative_select(const RewardProvider& provider, std::span<const Arm> arms,
                                 const SelectionConfig& cfg);

// Which score ranks arms for the coarse set in the two-stage algorithm.
enum class CoarseRanking {
  optimistic_mean,  // mean + radius
  empirical_mean,   // mean only
};

// Batched two-stage variant: q pulls on every arm, rank by optimistic means,
// then z more pulls on the top ceil(alpha*M) arms, returning the top-m by
// plain empirical means. Stage batches are pure maps over (arm, frame,
// ordinal) triples, so they parallelize without changing any result; stats
// updates are applied in (arm, frame, ordinal) order either way.
SelectionResult two_stage_select(const RewardProvider& provider, std::span<const Arm> arms,
                                 const SelectionConfig& cfg,
                                 ExecMode mode = ExecMode::parallel,
                                 CoarseRanking ranking = CoarseRanking::optimistic_mean);

// True iff every arm outside `current_top` has its upper confidence bound
// strictly below the smallest lower bound inside. A top set covering all arms
// is vacuously separated.
bool check_separation(std::span<const ArmStats> stats, const std::vector<int>& current_top,
                      std::int64_t n_total);

}  // namespace focus
