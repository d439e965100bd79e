#include "focus/provider.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "focus/error.hpp"
#include "focus/rng.hpp"

namespace focus {

double RewardProvider::ground_truth(std::int64_t) const {
  throw InternalError("provider has no ground truth");
}

void SyntheticSpec::validate() const {
  if (total_frames < 1) throw DataError("synthetic spec: total_frames must be >= 1");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw DataError("synthetic spec: fps must be positive");
  if (!(noise_std >= 0.0)) throw DataError("synthetic spec: noise_std must be >= 0");
  if (!(smoothing_half_life_seconds >= 0.0)) {
    throw DataError("synthetic spec: smoothing half-life must be >= 0");
  }
  if (!(base_level >= 0.0 && base_level <= 1.0)) {
    throw DataError("synthetic spec: base_level outside [0,1]");
  }
  auto sorted = segments;
  std::sort(sorted.begin(), sorted.end(),
            [](const PlantedSegment& a, const PlantedSegment& b) { return a.start < b.start; });
  std::int64_t prev_end = 0;
  for (const auto& seg : sorted) {
    if (seg.start < 0 || seg.end > total_frames || seg.start >= seg.end) {
      throw DataError("synthetic spec: segment [" + std::to_string(seg.start) + "," +
                      std::to_string(seg.end) + ") out of bounds or empty");
    }
    if (!(seg.level >= 0.0 && seg.level <= 1.0)) {
      throw DataError("synthetic spec: segment level outside [0,1]");
    }
    if (seg.start < prev_end) {
      throw DataError("synthetic spec: segments overlap at frame " + std::to_string(seg.start));
    }
    prev_end = seg.end;
  }
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      throw DataError(where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("synthetic spec: expected a JSON object");
  reject_unknown_keys(j,
                      {"total_frames", "fps", "segments", "smoothing_half_life_seconds",
                       "noise_std", "base_level", "seed"},
                      "synthetic spec");
  SyntheticSpec spec;
  try {
    spec.total_frames = j.at("total_frames").get<std::int64_t>();
    spec.fps = j.at("fps").get<double>();
    if (j.contains("segments")) {
      for (const auto& s : j.at("segments")) {
        reject_unknown_keys(s, {"start", "end", "level"}, "synthetic spec segment");
        spec.segments.push_back({s.at("start").get<std::int64_t>(),
                                 s.at("end").get<std::int64_t>(),
                                 s.at("level").get<double>()});
      }
    }
    spec.smoothing_half_life_seconds = j.value("smoothing_half_life_seconds", 0.0);
    spec.noise_std = j.value("noise_std", 0.0);
    spec.base_level = j.value("base_level", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json SyntheticSpec::to_json() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : segments) {
    segs.push_back({{"start", s.start}, {"end", s.end}, {"level", s.level}});
  }
  return nlohmann::json{{"total_frames", total_frames},
                        {"fps", fps},
                        {"segments", segs},
                        {"smoothing_half_life_seconds", smoothing_half_life_seconds},
                        {"noise_std", noise_std},
                        {"base_level", base_level},
                        {"seed", seed}};
}

double smoothing_coefficient(double half_life_seconds, double fps) {
  if (half_life_seconds <= 0.0) return 0.0;
  // phi^(half_life * fps) = 0.5
  return std::exp(std::log(0.5) / (half_life_seconds * fps));
}

std::vector<double> generate_process(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<double> y(static_cast<std::size_t>(spec.total_frames), spec.base_level);
  for (const auto& seg : spec.segments) {
    std::fill(y.begin() + seg.start, y.begin() + seg.end, seg.level);
  }
  const double phi = smoothing_coefficient(spec.smoothing_half_life_seconds, spec.fps);
  if (phi > 0.0) {
    // One-sided exponential moving average; preserves constants and [0,1].
    double state = y.front();
    for (auto& v : y) {
      state = phi * state + (1.0 - phi) * v;
      v = state;
    }
  }
  for (auto& v : y) v = std::clamp(v, 0.0, 1.0);
  return y;
}

SyntheticProvider::SyntheticProvider(SyntheticSpec spec)
    : spec_(std::move(spec)),
      utility_(generate_process(spec_)),
      noise_key_(stream_key(spec_.seed, Dom::noise)) {}

double SyntheticProvider::ground_truth(std::int64_t frame) const {
  internal_check(frame >= 0 && frame < total_frames(), "synthetic provider: frame out of range");
  return utility_[static_cast<std::size_t>(frame)];
}

double SyntheticProvider::score(std::int64_t frame, std::uint64_t ordinal) const {
  const double y = ground_truth(frame);
  if (spec_.noise_std == 0.0) return y;
  const double u = CounterRng(fold_key(noise_key_, static_cast<std::uint64_t>(frame)))
                       .unit_at(ordinal);
  const double bound = std::min(y, 1.0 - y);
  double eps;
  if (bound > 0.0) {
    eps = truncated_normal(spec_.noise_std, bound, u);
  } else {
    eps = spec_.noise_std * inverse_normal_cdf(u);
  }
  return std::clamp(y + eps, 0.0, 1.0);
}

ScoreFileProvider::ScoreFileProvider(std::vector<double> scores) : scores_(std::move(scores)) {
  for (double s : scores_) {
    if (!(s >= 0.0 && s <= 1.0)) throw DataError("score outside [0,1]");
  }
}

double ScoreFileProvider::score(std::int64_t frame, std::uint64_t) const {
  internal_check(frame >= 0 && frame < total_frames(), "score provider: frame out of range");
  return scores_[static_cast<std::size_t>(frame)];
}

std::vector<double> parse_scores(std::istream& in, const std::string& origin) {
  auto fail = [&](std::size_t line, const std::string& what) -> void {
    throw DataError(origin + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail(1, "empty file; expected header 'frame_index,score'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame_index,score") fail(1, "expected header 'frame_index,score', got '" + line + "'");

  std::vector<double> scores;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) fail(line_no, "empty line");
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(line_no, "expected 'frame_index,score'");

    std::int64_t index = -1;
    const char* ib = line.data();
    const char* ie = line.data() + comma;
    auto ir = std::from_chars(ib, ie, index);
    if (ir.ec != std::errc{} || ir.ptr != ie) fail(line_no, "bad frame index '" + line.substr(0, comma) + "'");
    if (index != static_cast<std::int64_t>(scores.size())) {
      fail(line_no, "frame index " + std::to_string(index) + " is not dense (expected " +
                        std::to_string(scores.size()) + ")");
    }

    const std::string value = line.substr(comma + 1);
    std::size_t consumed = 0;
    double score = 0.0;
    try {
      score = std::stod(value, &consumed);
    } catch (const std::exception&) {
      fail(line_no, "bad score '" + value + "'");
    }
    if (consumed != value.size()) fail(line_no, "trailing characters after score '" + value + "'");
    if (!(score >= 0.0 && score <= 1.0)) {
      fail(line_no, "score " + value + " outside [0,1]");
    }
    scores.push_back(score);
  }
  if (scores.empty()) fail(line_no, "no score rows");
  return scores;
}

ScoreFileProvider load_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file: " + path.string());
  return ScoreFileProvider(parse_scores(in, path.filename().string()));
}

void write_scores(std::ostream& out, std::span<const double> scores) {
  out << "frame_index,score\n";
  char buf[64];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, scores[i]);
    out << buf;
  }
}

void write_scores_file(const std::filesystem::path& path, std::span<const double> scores) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw DataError("cannot write score file: " + path.string());
  write_scores(out, scores);
}

std::vector<double> ar1_sequence(double phi, std::int64_t length, double mean,
                                 double stationary_std, std::uint64_t seed,
                                 std::uint64_t sequence_id) {
  if (!(phi >= 0.0 && phi < 1.0)) throw ConfigError("ar1_sequence: phi must be in [0,1)");
  if (length < 1) throw ConfigError("ar1_sequence: length must be >= 1");
  CounterRng rng(seed, Dom::sequence, sequence_id);
  std::vector<double> x(static_cast<std::size_t>(length));
  const double innovation_std = stationary_std * std::sqrt(1.0 - phi * phi);
  double dev = stationary_std * rng.next_normal();
  x[0] = mean + dev;
  for (std::size_t t = 1; t < x.size(); ++t) {
    dev = phi * dev + innovation_std * rng.next_normal();
    x[t] = mean + dev;
  }
  return x;
}

}  // namespace focus
