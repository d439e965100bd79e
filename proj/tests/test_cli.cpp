// End-to-end tests against the built CLI binary (path injected by CMake).

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "focus/provider.hpp"
#include "focus/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("focus_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
  const fs::path err = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string command = std::string(FOCUS_CLI_PATH) + " " + args + " > " + out.string() +
                              " 2> " + err.string();
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

fs::path make_scores_csv(const std::string& name, int frames, std::uint64_t seed) {
  std::vector<double> scores;
  focus::CounterRng rng(seed, focus::Dom::sequence, 0);
  for (int i = 0; i < frames; ++i) scores.push_back(rng.next_unit());
  std::ostringstream ss;
  focus::write_scores(ss, scores);
  return write_file(name, ss.str());
}

}  // namespace

TEST_CASE("select: contract on a score file") {
  const auto scores = make_scores_csv("sel.csv", 6000, 1);
  const auto result = run_cli("select --scores " + scores.string() +
                              " --frames 64 --clip-seconds 4 --alpha 0.25 --q 4 --z 15 --seed 7");
  REQUIRE(result.exit_code == 0);
  const json j = json::parse(result.out);
  REQUIRE(j.at("selected_frames").size() == 64);
  std::vector<std::int64_t> frames = j.at("selected_frames");
  for (std::size_t i = 1; i < frames.size(); ++i) REQUIRE(frames[i] > frames[i - 1]);
  CHECK(j.at("video").at("frames") == 6000);
  CHECK(j.at("pulls").get<std::int64_t>() > 0);
  CHECK(j.at("frames_seen_fraction").get<double>() > 0.0);
  CHECK(j.at("frames_seen_fraction").get<double>() < 1.0);
  CHECK(j.at("seed") == 7);
}

TEST_CASE("select: byte-identical on repeated runs") {
  const auto scores = make_scores_csv("det.csv", 3000, 2);
  const std::string args = "select --scores " + scores.string() +
                           " --frames 32 --clip-seconds 8 --seed 99";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("select: frame budget beyond the video returns everything with a warning") {
  const auto scores = make_scores_csv("tiny.csv", 10, 3);
  const auto result = run_cli("select --scores " + scores.string() + " --frames 100 --seed 1");
  REQUIRE(result.exit_code == 0);
  const json j = json::parse(result.out);
  CHECK(j.at("selected_frames").size() == 10);
  CHECK(!j.at("warnings").empty());
}

TEST_CASE("select: config errors exit 2 before touching input files") {
  const auto result =
      run_cli("select --scores /nonexistent/file.csv --frames 64 --alpha 1.5 --seed 1");
  CHECK(result.exit_code == 2);
  const json err = json::parse(result.err);
  CHECK(err.at("error").at("type") == "config");
}

TEST_CASE("select: exclusive provider flags") {
  const auto scores = make_scores_csv("x.csv", 100, 4);
  const auto result =
      run_cli("select --scores " + scores.string() + " --spec whatever.json --frames 4");
  CHECK(result.exit_code == 2);
  CHECK(json::parse(result.err).at("error").at("type") == "config");
  const auto neither = run_cli("select --frames 4");
  CHECK(neither.exit_code == 2);
}

TEST_CASE("select: malformed score file exits 3 and names the line") {
  const auto bad = write_file("bad.csv", "frame_index,score\n0,0.5\n1,1.2\n");
  const auto result = run_cli("select --scores " + bad.string() + " --frames 4");
  CHECK(result.exit_code == 3);
  const json err = json::parse(result.err);
  CHECK(err.at("error").at("type") == "data");
  CHECK(err.at("error").at("message").get<std::string>().find("bad.csv:3") != std::string::npos);
}

TEST_CASE("select: output round-trips through its embedded config") {
  const auto scores = make_scores_csv("rt.csv", 2000, 5);
  const std::string args = "select --scores " + scores.string() +
                           " --frames 16 --clip-seconds 4 --alpha 0.5 --q 3 --z 9 --seed 43";
  const auto first = run_cli(args);
  REQUIRE(first.exit_code == 0);
  const json j = json::parse(first.out);
  const json cfg = j.at("config");
  std::ostringstream rebuilt;
  rebuilt << "select --scores " << cfg.at("source").get<std::string>()
          << " --fps " << cfg.at("fps").get<double>()
          << " --frames " << cfg.at("frames").get<std::int64_t>()
          << " --clip-seconds " << cfg.at("clip_seconds").get<double>()
          << " --alpha " << cfg.at("alpha").get<double>()
          << " --q " << cfg.at("q").get<int>()
          << " --z " << cfg.at("z").get<int>()
          << " --m " << cfg.at("m").get<int>()
          << " --pulls-per-iteration " << cfg.at("pulls_per_iteration").get<int>()
          << " --max-iterations " << cfg.at("max_iterations").get<std::int64_t>()
          << " --algorithm " << cfg.at("algorithm").get<std::string>()
          << " --seed " << cfg.at("seed").get<std::uint64_t>();
  const auto second = run_cli(rebuilt.str());
  REQUIRE(second.exit_code == 0);
  CHECK(second.out == first.out);
}

TEST_CASE("simulate: planted utility is exact and runs are deterministic") {
  const auto spec = write_file("sim.json", R"({
    "total_frames": 600, "fps": 30,
    "segments": [{"start": 100, "end": 200, "level": 1.0}],
    "smoothing_half_life_seconds": 0, "noise_std": 0.05, "base_level": 0, "seed": 5
  })");
  const fs::path scores = scratch_dir() / "sim_scores.csv";
  const fs::path truth = scratch_dir() / "sim_truth.csv";
  const std::string args = "simulate --spec " + spec.string() + " --out-scores " +
                           scores.string() + " --out-truth " + truth.string();
  REQUIRE(run_cli(args).exit_code == 0);

  std::ifstream truth_in(truth);
  const auto y = focus::parse_scores(truth_in, "truth");
  REQUIRE(y.size() == 600);
  for (int t = 100; t < 200; ++t) REQUIRE(y[static_cast<std::size_t>(t)] == 1.0);
  REQUIRE(y[99] == 0.0);

  const std::string scores_a = slurp(scores);
  REQUIRE(run_cli(args).exit_code == 0);
  CHECK(slurp(scores) == scores_a);

  // The emitted noisy scores load back as a valid provider.
  std::ifstream scores_in(scores);
  const auto r = focus::parse_scores(scores_in, "scores");
  CHECK(r.size() == 600);
}

TEST_CASE("simulate: ACF half-life of the emitted process tracks the spec") {
  // Telegraph-style structure: many short segments, smoothed at 2 s. The
  // emitted sequence's measured half-life should land within a second.
  std::ostringstream spec;
  spec << R"({"total_frames": 90000, "fps": 30, "smoothing_half_life_seconds": 2,)"
       << R"( "noise_std": 0, "base_level": 0.1, "seed": 12, "segments": [)";
  focus::CounterRng rng(3141, focus::Dom::instance, 0);
  std::int64_t cursor = 0;
  bool first = true;
  while (true) {
    const auto gap = static_cast<std::int64_t>(150 + rng.next_below(450));
    const auto len = static_cast<std::int64_t>(8 + rng.next_below(22));
    if (cursor + gap + len >= 90000) break;
    cursor += gap;
    if (!first) spec << ",";
    spec << "{\"start\":" << cursor << ",\"end\":" << cursor + len << ",\"level\":"
         << 0.5 + 0.5 * rng.next_unit() << "}";
    cursor += len;
    first = false;
  }
  spec << "]}";
  const auto spec_path = write_file("acfspec.json", spec.str());
  const fs::path scores = scratch_dir() / "acf_scores.csv";
  const fs::path truth = scratch_dir() / "acf_truth.csv";
  REQUIRE(run_cli("simulate --spec " + spec_path.string() + " --out-scores " + scores.string() +
                  " --out-truth " + truth.string())
              .exit_code == 0);

  const fs::path curve = scratch_dir() / "acf_curve.csv";
  const auto result = run_cli("acf --scores " + scores.string() +
                              " --max-lag-seconds 8 --fps 30 --output " + curve.string());
  REQUIRE(result.exit_code == 0);
  const std::string info = result.out;
  const auto pos = info.find("half_life_seconds=");
  REQUIRE(pos != std::string::npos);
  const double half_life = std::stod(info.substr(pos + 18));
  CHECK(half_life == doctest::Approx(2.0).epsilon(0.5));  // within +/- 1 s
}

TEST_CASE("evaluate: JSONL stream plus summary that recomputes") {
  const auto family = write_file("family.json", R"({
    "total_frames": 1800, "fps": 30, "num_segments": 2,
    "segment_frames_min": 60, "segment_frames_max": 120,
    "level_min": 0.7, "level_max": 1.0, "base_level": 0.05,
    "smoothing_half_life_seconds": 1.0, "noise_std": 0.05
  })");
  const fs::path out = scratch_dir() / "eval.jsonl";
  const fs::path summary = scratch_dir() / "eval_summary.csv";
  const auto result = run_cli("evaluate --family " + family.string() +
                              " --policies focus,uniform --trials 5 --frames 8"
                              " --clip-seconds 4 --seed 11 --output " +
                              out.string() + " --summary " + summary.string());
  REQUIRE(result.exit_code == 0);

  std::ifstream lines_in(out);
  std::string line;
  int lines = 0;
  double focus_sum = 0.0;
  int focus_count = 0;
  while (std::getline(lines_in, line)) {
    const json j = json::parse(line);
    ++lines;
    if (j.at("policy") == "focus") {
      focus_sum += j.at("captured_utility").get<double>();
      ++focus_count;
    }
  }
  CHECK(lines == 10);
  REQUIRE(focus_count == 5);

  const std::string csv = slurp(summary);
  REQUIRE(csv.find("policy,trials,") == 0);
  std::istringstream csv_in(csv);
  std::string row;
  std::getline(csv_in, row);  // header
  bool found = false;
  while (std::getline(csv_in, row)) {
    if (row.rfind("focus,", 0) == 0) {
      std::istringstream fields(row);
      std::string field;
      std::getline(fields, field, ',');  // policy
      std::getline(fields, field, ',');  // trials
      CHECK(field == "5");
      std::getline(fields, field, ',');  // captured_mean
      CHECK(std::stod(field) == doctest::Approx(focus_sum / 5).epsilon(1e-6));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("evaluate: unknown policy exits 2") {
  const auto family = write_file("family2.json", R"({"total_frames": 600, "fps": 30})");
  const auto result =
      run_cli("evaluate --family " + family.string() + " --policies focus,bogus --trials 1");
  CHECK(result.exit_code == 2);
}

TEST_CASE("evaluate: serial and parallel fan-out produce identical output") {
  const auto family = write_file("family3.json", R"({
    "total_frames": 1200, "fps": 30, "num_segments": 2,
    "segment_frames_min": 30, "segment_frames_max": 60
  })");
  const fs::path out_a = scratch_dir() / "eva.jsonl";
  const fs::path out_b = scratch_dir() / "evb.jsonl";
  const std::string base = "evaluate --family " + family.string() +
                           " --policies focus,focus-m,uniform --trials 6 --frames 8"
                           " --clip-seconds 4 --seed 3 --output ";
  REQUIRE(run_cli(base + out_a.string()).exit_code == 0);
  REQUIRE(run_cli(base + out_b.string() + " --serial").exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));
}

TEST_CASE("acf: AR(1) source emits the CSV contract") {
  const fs::path out = scratch_dir() / "ar1.csv";
  const auto result = run_cli(
      "acf --phi 0.87 --frames 20000 --sequences 3 --max-lag-seconds 1 --fps 30 --seed 4 "
      "--output " + out.string());
  REQUIRE(result.exit_code == 0);
  const std::string csv = slurp(out);
  REQUIRE(csv.rfind("lag_seconds,median,q25,q75\n", 0) == 0);
  int rows = 0;
  for (char c : csv) rows += c == '\n' ? 1 : 0;
  CHECK(rows == 32);  // header + lags 0..30
  CHECK(result.out.find("half_life_seconds=") != std::string::npos);
}

TEST_CASE("acf: requires exactly one source") {
  CHECK(run_cli("acf --max-lag-seconds 2").exit_code == 2);
  const auto scores = make_scores_csv("acfsrc.csv", 500, 6);
  CHECK(run_cli("acf --scores " + scores.string() + " --phi 0.5 --frames 100").exit_code == 2);
}
