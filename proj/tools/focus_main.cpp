// Command-line front end: select | simulate | evaluate | acf.
//
// Exit codes: 0 success, 2 configuration error, 3 input-data error,
// 4 internal invariant violation. Errors are emitted as JSON on stderr.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "focus/error.hpp"
#include "focus/harness.hpp"
#include "focus/pipeline.hpp"
#include "focus/provider.hpp"

namespace {

using nlohmann::json;

struct ProviderFlags {
  std::string scores_path;
  std::string spec_path;
  double fps = 30.0;
  bool fps_given = false;
};

struct LoadedProvider {
  std::unique_ptr<focus::RewardProvider> provider;
  focus::VideoMeta meta;
  std::string source;
  std::string source_kind;
};

void add_provider_flags(CLI::App* cmd, ProviderFlags& flags) {
  auto* scores = cmd->add_option("--scores", flags.scores_path, "Score CSV file (frame_index,score)");
  auto* spec = cmd->add_option("--spec", flags.spec_path, "Synthetic process spec (JSON)");
  scores->excludes(spec);
  cmd->add_option("--fps", flags.fps, "Frames per second of a score file (default 30)")
      ->check(CLI::PositiveNumber)
      ->each([&flags](const std::string&) { flags.fps_given = true; });
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw focus::DataError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw focus::DataError(path + ": " + e.what());
  }
}

LoadedProvider load_provider(const ProviderFlags& flags) {
  if (flags.scores_path.empty() == flags.spec_path.empty()) {
    throw focus::ConfigError("exactly one of --scores or --spec is required");
  }
  LoadedProvider loaded;
  if (!flags.scores_path.empty()) {
    auto provider = std::make_unique<focus::ScoreFileProvider>(focus::load_scores(flags.scores_path));
    loaded.meta = focus::VideoMeta{provider->total_frames(), flags.fps};
    loaded.provider = std::move(provider);
    loaded.source = flags.scores_path;
    loaded.source_kind = "scores";
  } else {
    if (flags.fps_given) {
      throw focus::ConfigError("--fps applies to score files; a synthetic spec carries its own fps");
    }
    auto spec = focus::SyntheticSpec::from_json(read_json_file(flags.spec_path));
    auto provider = std::make_unique<focus::SyntheticProvider>(std::move(spec));
    loaded.meta = focus::VideoMeta{provider->total_frames(), provider->spec().fps};
    loaded.provider = std::move(provider);
    loaded.source = flags.spec_path;
    loaded.source_kind = "synthetic";
  }
  return loaded;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw focus::DataError("cannot write output file: " + path);
  out << text;
}

struct PipelineFlags {
  std::int64_t frames = 64;
  double clip_seconds = 16.0;
  double alpha = 0.25;
  int q = 4;
  int z = 15;
  int m = 0;
  int pulls_per_iteration = 1;
  std::int64_t max_iterations = 0;
  std::string algorithm = "two-stage";
  std::uint64_t seed = 0;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& flags) {
  cmd->add_option("--frames", flags.frames, "Keyframe budget k (default 64)");
  cmd->add_option("--clip-seconds", flags.clip_seconds, "Clip length in seconds (default 16)");
  cmd->add_option("--alpha", flags.alpha, "Coarse-set fraction of all arms (default 0.25)");
  cmd->add_option("--q", flags.q, "Initialization pulls per arm (default 4)");
  cmd->add_option("--z", flags.z, "Stage-II pulls per coarse arm (default 15)");
  cmd->add_option("--m", flags.m, "Arms to select; 0 derives it from the frame budget");
  cmd->add_option("--pulls-per-iteration", flags.pulls_per_iteration,
                  "Iterative refinement pulls per step (default 1)");
  cmd->add_option("--max-iterations", flags.max_iterations,
                  "Iterative iteration cap; 0 = 50 per arm");
  cmd->add_option("--algorithm", flags.algorithm, "two-stage | iterative")
      ->check(CLI::IsMember({"two-stage", "iterative"}));
  cmd->add_option("--seed", flags.seed, "Random seed (default 0)");
}

// Validates everything that does not require the provider, so bad flag
// combinations fail before any file I/O.
focus::PipelineConfig to_pipeline_config(const PipelineFlags& flags) {
  focus::PipelineConfig cfg;
  cfg.clip_seconds = flags.clip_seconds;
  cfg.k = flags.frames;
  cfg.algorithm = flags.algorithm == "iterative" ? focus::PipelineConfig::Algorithm::iterative
                                                 : focus::PipelineConfig::Algorithm::two_stage;
  cfg.selection.m = flags.m;
  cfg.selection.q = flags.q;
  cfg.selection.z = flags.z;
  cfg.selection.alpha = flags.alpha;
  cfg.selection.pulls_per_iteration = flags.pulls_per_iteration;
  cfg.selection.max_iterations = flags.max_iterations;
  cfg.selection.seed = flags.seed;
  if (cfg.k < 1) throw focus::ConfigError("--frames must be >= 1");
  if (!(cfg.clip_seconds > 0.0)) throw focus::ConfigError("--clip-seconds must be positive");
  if (!(cfg.selection.alpha > 0.0 && cfg.selection.alpha <= 1.0)) {
    throw focus::ConfigError("--alpha must be in (0,1]");
  }
  if (cfg.selection.q < 1) throw focus::ConfigError("--q must be >= 1");
  if (cfg.selection.z < 1) throw focus::ConfigError("--z must be >= 1");
  if (cfg.selection.m < 0) throw focus::ConfigError("--m must be >= 0");
  if (cfg.selection.pulls_per_iteration < 1) {
    throw focus::ConfigError("--pulls-per-iteration must be >= 1");
  }
  if (cfg.selection.max_iterations < 0) throw focus::ConfigError("--max-iterations must be >= 0");
  return cfg;
}

json config_json(const PipelineFlags& flags, const LoadedProvider& loaded) {
  return json{{"source", loaded.source},
              {"source_kind", loaded.source_kind},
              {"fps", loaded.meta.fps},
              {"frames", flags.frames},
              {"clip_seconds", flags.clip_seconds},
              {"alpha", flags.alpha},
              {"q", flags.q},
              {"z", flags.z},
              {"m", flags.m},
              {"pulls_per_iteration", flags.pulls_per_iteration},
              {"max_iterations", flags.max_iterations},
              {"algorithm", flags.algorithm},
              {"seed", flags.seed}};
}

int cmd_select(const ProviderFlags& provider_flags, const PipelineFlags& pipeline_flags,
               const std::string& output) {
  const focus::PipelineConfig cfg = to_pipeline_config(pipeline_flags);
  const LoadedProvider loaded = load_provider(provider_flags);
  const focus::PipelineResult result =
      focus::run_pipeline(*loaded.provider, loaded.meta, cfg, focus::ExecMode::serial);

  json out{{"video", {{"frames", loaded.meta.total_frames}, {"fps", loaded.meta.fps}}},
           {"config", config_json(pipeline_flags, loaded)},
           {"selected_frames", result.keyframes.frames},
           {"selected_arms", result.keyframes.selected_arms},
           {"per_arm_quota", json::object()},
           {"pulls", result.keyframes.pulls},
           {"frames_seen_fraction", result.keyframes.frames_seen_fraction},
           {"raw_pull_fraction", result.keyframes.raw_pull_fraction},
           {"seed", pipeline_flags.seed},
           {"warnings", result.keyframes.warnings}};
  for (const auto& [arm, quota] : result.keyframes.per_arm_quota) {
    out["per_arm_quota"][std::to_string(arm)] = quota;
  }
  write_text(output, out.dump(2) + "\n");
  return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_scores,
                 const std::string& out_truth, std::optional<std::uint64_t> seed_override) {
  auto spec = focus::SyntheticSpec::from_json(read_json_file(spec_path));
  if (seed_override) spec.seed = *seed_override;
  const focus::SyntheticProvider provider(spec);

  std::vector<double> rewards(static_cast<std::size_t>(provider.total_frames()));
  for (std::int64_t t = 0; t < provider.total_frames(); ++t) {
    rewards[static_cast<std::size_t>(t)] = provider.score(t, 0);
  }
  focus::write_scores_file(out_scores, rewards);
  focus::write_scores_file(out_truth, provider.utility());
  std::cerr << "wrote " << provider.total_frames() << " frames to " << out_scores << " and "
            << out_truth << "\n";
  return 0;
}

int cmd_evaluate(const std::string& family_path, const std::string& policies_csv, int trials,
                 const PipelineFlags& pipeline_flags, double prefilter_fps,
                 const std::string& output, const std::string& summary_path, bool serial) {
  focus::HarnessConfig cfg;
  cfg.pipeline = to_pipeline_config(pipeline_flags);
  cfg.prefilter_fps = prefilter_fps;
  cfg.seed = pipeline_flags.seed;
  if (trials < 1) throw focus::ConfigError("--trials must be >= 1");

  std::vector<focus::Policy> policies;
  std::stringstream ss(policies_csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) policies.push_back(focus::parse_policy(token));
  }
  if (policies.empty()) throw focus::ConfigError("--policies must name at least one policy");

  const auto family = focus::InstanceFamily::from_json(read_json_file(family_path));
  const auto reports =
      focus::run_trials(policies, family, trials, cfg,
                        serial ? focus::ExecMode::serial : focus::ExecMode::parallel);

  std::string lines;
  for (const auto& report : reports) {
    lines += report.to_json().dump();
    lines += '\n';
  }
  write_text(output, lines);

  if (!summary_path.empty()) {
    const auto summaries = focus::summarize(reports);
    std::ostringstream csv;
    focus::write_summary_csv(csv, summaries);
    write_text(summary_path, csv.str());
  }
  return 0;
}

int cmd_acf(const std::vector<std::string>& score_paths, const std::string& spec_path,
            int sequences, double phi, std::optional<double> half_life_seconds,
            std::int64_t ar1_frames, double max_lag_seconds, double fps,
            const std::string& output, std::uint64_t seed) {
  std::vector<focus::AcfResult> curves;
  double curve_fps = fps;

  const int source_count = (score_paths.empty() ? 0 : 1) + (spec_path.empty() ? 0 : 1) +
                           ((phi > 0.0 || half_life_seconds) ? 1 : 0);
  if (source_count != 1) {
    throw focus::ConfigError("give exactly one ACF source: --scores, --spec, or --phi/--half-life");
  }
  if (!(max_lag_seconds > 0.0)) throw focus::ConfigError("--max-lag-seconds must be positive");

  if (!score_paths.empty()) {
    for (const auto& path : score_paths) {
      const auto provider = focus::load_scores(path);
      const auto max_lag = static_cast<std::int64_t>(max_lag_seconds * curve_fps);
      curves.push_back(focus::acf(provider.scores(), max_lag, focus::ExecMode::serial));
    }
  } else if (!spec_path.empty()) {
    auto spec = focus::SyntheticSpec::from_json(read_json_file(spec_path));
    curve_fps = spec.fps;
    const auto max_lag = static_cast<std::int64_t>(max_lag_seconds * curve_fps);
    if (sequences < 1) throw focus::ConfigError("--sequences must be >= 1");
    for (int s = 0; s < sequences; ++s) {
      spec.seed = focus::stream_key(seed, focus::Dom::sequence, static_cast<std::uint64_t>(s));
      const focus::SyntheticProvider provider(spec);
      std::vector<double> rewards(static_cast<std::size_t>(provider.total_frames()));
      for (std::int64_t t = 0; t < provider.total_frames(); ++t) {
        rewards[static_cast<std::size_t>(t)] = provider.score(t, 0);
      }
      curves.push_back(focus::acf(rewards, max_lag, focus::ExecMode::serial));
    }
  } else {
    if (sequences < 1) throw focus::ConfigError("--sequences must be >= 1");
    if (ar1_frames < 2) throw focus::ConfigError("--frames must be >= 2");
    double coeff = phi;
    if (half_life_seconds) {
      coeff = focus::smoothing_coefficient(*half_life_seconds, curve_fps);
    }
    if (!(coeff > 0.0 && coeff < 1.0)) throw focus::ConfigError("phi must be in (0,1)");
    const auto max_lag = static_cast<std::int64_t>(max_lag_seconds * curve_fps);
    for (int s = 0; s < sequences; ++s) {
      const auto sequence =
          focus::ar1_sequence(coeff, ar1_frames, 0.5, 0.15, seed, static_cast<std::uint64_t>(s));
      curves.push_back(focus::acf(sequence, max_lag, focus::ExecMode::serial));
    }
  }

  const focus::AcfCurve curve = focus::aggregate_acf(curves, curve_fps);
  std::ostringstream csv;
  focus::write_acf_csv(csv, curve);
  write_text(output, csv.str());

  std::ostream& info = (output.empty() || output == "-") ? std::cerr : std::cout;
  info << "half_life_seconds=" << curve.half_life_seconds << "\n";
  return 0;
}

void print_error(const std::string& type, const std::string& message) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-constrained keyframe selection over temporal clip arms"};
  app.require_subcommand(1);

  // select
  auto* select = app.add_subcommand("select", "Select keyframes from a score file or synthetic spec");
  ProviderFlags select_provider;
  PipelineFlags select_pipeline;
  std::string select_output = "-";
  add_provider_flags(select, select_provider);
  add_pipeline_flags(select, select_pipeline);
  select->add_option("--output", select_output, "Output path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Materialize a synthetic process to CSV files");
  std::string sim_spec,
      sim_scores = "scores.csv", sim_truth = "truth.csv";
  std::optional<std::uint64_t> sim_seed;
  simulate->add_option("--spec", sim_spec, "Synthetic process spec (JSON)")->required();
  simulate->add_option("--out-scores", sim_scores, "Output CSV of noisy scores");
  simulate->add_option("--out-truth", sim_truth, "Output CSV of ground-truth utility");
  simulate->add_option("--seed", sim_seed, "Override the spec's seed");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run policies over synthetic instances");
  std::string eval_family, eval_policies = "focus,uniform";
  int eval_trials = 1;
  double eval_prefilter_fps = 1.0;
  std::string eval_output = "-", eval_summary;
  bool eval_serial = false;
  PipelineFlags eval_pipeline;
  evaluate->add_option("--family", eval_family, "Instance family spec (JSON)")->required();
  evaluate->add_option("--policies", eval_policies,
                       "Comma-separated policies: focus,focus-iterative,uniform,topk-full,"
                       "topk-prefilter,focus-c,focus-f,focus-m");
  evaluate->add_option("--trials", eval_trials, "Trials per policy");
  evaluate->add_option("--prefilter-fps", eval_prefilter_fps,
                       "Pre-filter sampling rate for topk-prefilter (default 1)");
  add_pipeline_flags(evaluate, eval_pipeline);
  evaluate->add_option("--output", eval_output, "JSON-lines output path (default stdout)");
  evaluate->add_option("--summary", eval_summary, "Optional summary CSV path");
  evaluate->add_flag("--serial", eval_serial, "Disable the parallel trial fan-out");

  // acf
  auto* acf_cmd = app.add_subcommand("acf", "Autocorrelation of relevance sequences");
  std::vector<std::string> acf_scores;
  std::string acf_spec, acf_output = "-";
  int acf_sequences = 1;
  double acf_phi = 0.0, acf_max_lag_seconds = 10.0, acf_fps = 30.0;
  std::optional<double> acf_half_life;
  std::int64_t acf_frames = 100000;
  std::uint64_t acf_seed = 0;
  acf_cmd->add_option("--scores", acf_scores, "Score CSV file(s)");
  acf_cmd->add_option("--spec", acf_spec, "Synthetic process spec (JSON)");
  acf_cmd->add_option("--sequences", acf_sequences, "Sequences to aggregate for --spec/--phi");
  acf_cmd->add_option("--phi", acf_phi, "Direct AR(1) coefficient per frame");
  acf_cmd->add_option("--half-life", acf_half_life, "AR(1) half-life in seconds (alternative to --phi)");
  acf_cmd->add_option("--frames", acf_frames, "Sequence length for the AR(1) source");
  acf_cmd->add_option("--max-lag-seconds", acf_max_lag_seconds, "Largest lag (default 10 s)");
  acf_cmd->add_option("--fps", acf_fps, "Frames per second for --scores/--phi inputs (default 30)");
  acf_cmd->add_option("--seed", acf_seed, "Random seed for generated sequences");
  acf_cmd->add_option("--output", acf_output, "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
    if (select->parsed()) {
      return cmd_select(select_provider, select_pipeline, select_output);
    }
    if (simulate->parsed()) {
      return cmd_simulate(sim_spec, sim_scores, sim_truth, sim_seed);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_family, eval_policies, eval_trials, eval_pipeline,
                          eval_prefilter_fps, eval_output, eval_summary, eval_serial);
    }
    if (acf_cmd->parsed()) {
      return cmd_acf(acf_scores, acf_spec, acf_sequences, acf_phi, acf_half_life, acf_frames,
                     acf_max_lag_seconds, acf_fps, acf_output, acf_seed);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("config", e.what());
    return 2;
  } catch (const focus::ConfigError& e) {
    print_error("config", e.what());
    return 2;
  } catch (const focus::DataError& e) {
    print_error("data", e.what());
    return 3;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 4;
  }
}
