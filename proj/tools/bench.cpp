// Benchmark: serial reference vs OpenMP kernels for the three batch-parallel
// paths (stage scoring, trial fan-out, ACF lags). Results must match exactly
// between modes; the benchmark asserts that while timing both.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "focus/error.hpp"
#include "focus/harness.hpp"
#include "focus/pipeline.hpp"
#include "focus/provider.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(Clock::now() -
                                                                                start)
      .count();
}

struct Timing {
  double serial_ms = 0.0;
  double parallel_ms = 0.0;
};

void report(const char* name, const Timing& t) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name, t.serial_ms,
              t.parallel_ms, t.serial_ms / t.parallel_ms);
}

Timing bench_two_stage() {
  focus::InstanceFamily family;
  family.total_frames = 108000;
  family.num_segments = 8;
  const auto spec = family.instantiate(7, 0);
  const focus::SyntheticProvider provider(spec);
  const focus::VideoMeta meta{spec.total_frames, spec.fps};
  const auto arms = focus::partition_timeline(meta, 16.0);

  focus::SelectionConfig cfg;
  cfg.m = 16;
  cfg.q = 64;
  cfg.z = 256;
  cfg.seed = 7;

  Timing t;
  auto start = Clock::now();
  const auto serial = focus::two_stage_select(provider, arms, cfg, focus::ExecMode::serial);
  t.serial_ms = ms_since(start);

  start = Clock::now();
  const auto parallel = focus::two_stage_select(provider, arms, cfg, focus::ExecMode::parallel);
  t.parallel_ms = ms_since(start);

  focus::internal_check(serial.selected == parallel.selected &&
                            serial.ledger.pulls_total() == parallel.ledger.pulls_total(),
                        "two-stage: serial and parallel runs diverged");
  for (std::size_t a = 0; a < arms.size(); ++a) {
    focus::internal_check(serial.stats[a].mean() == parallel.stats[a].mean(),
                          "two-stage: per-arm means diverged");
  }
  return t;
}

Timing bench_trials() {
  focus::InstanceFamily family;
  family.total_frames = 27000;
  family.num_segments = 5;

  focus::HarnessConfig cfg;
  cfg.pipeline.k = 64;
  cfg.seed = 11;
  const focus::Policy policies[] = {focus::Policy::focus, focus::Policy::uniform};

  Timing t;
  auto start = Clock::now();
  const auto serial = focus::run_trials(policies, family, 40, cfg, focus::ExecMode::serial);
  t.serial_ms = ms_since(start);

  start = Clock::now();
  const auto parallel = focus::run_trials(policies, family, 40, cfg, focus::ExecMode::parallel);
  t.parallel_ms = ms_since(start);

  focus::internal_check(serial.size() == parallel.size(), "trials: report counts diverged");
  for (std::size_t i = 0; i < serial.size(); ++i) {
    focus::internal_check(serial[i].captured_utility == parallel[i].captured_utility &&
                              serial[i].pulls == parallel[i].pulls,
                          "trials: reports diverged");
  }
  return t;
}

Timing bench_acf() {
  const auto sequence = focus::ar1_sequence(0.99, 200000, 0.5, 0.15, 3);

  Timing t;
  auto start = Clock::now();
  const auto serial = focus::acf(sequence, 900, focus::ExecMode::serial);
  t.serial_ms = ms_since(start);

  start = Clock::now();
  const auto parallel = focus::acf(sequence, 900, focus::ExecMode::parallel);
  t.parallel_ms = ms_since(start);

  focus::internal_check(serial.rho == parallel.rho, "acf: serial and parallel curves diverged");
  return t;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both columns run serially\n");
#endif
  report("two-stage batch scoring", bench_two_stage());
  report("evaluation trial fan-out", bench_trials());
  report("acf lags", bench_acf());
  return 0;
}
