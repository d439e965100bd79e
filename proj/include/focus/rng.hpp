#pragma once

#include <cmath>
#include <cstdint>

namespace focus {

// SplitMix64 output function. Bijective on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Named sub-stream domains. Every random decision in the library draws from a
// stream keyed on (seed, domain, ids...), so no two components share a stream
// and results do not depend on evaluation order or thread count.
enum class Dom : std::uint64_t {
  arm_sampler = 1,
  noise = 2,
  frame_select = 3,
  trial = 4,
  instance = 5,
  sequence = 6,
};

constexpr std::uint64_t fold_key(std::uint64_t key, std::uint64_t id) noexcept {
  return mix64(key + kGolden * (id + 1));
}

template <typename... Ids>
constexpr std::uint64_t stream_key(std::uint64_t seed, Dom domain, Ids... ids) noexcept {
  std::uint64_t k = mix64(seed + kGolden);
  k = fold_key(k, static_cast<std::uint64_t>(domain));
  ((k = fold_key(k, static_cast<std::uint64_t>(ids))), ...);
  return k;
}

double inverse_normal_cdf(double p);
double normal_cdf(double x);

// Counter-based generator: output i of a stream is a pure function of
// (key, i). Draws can therefore be evaluated out of order, in parallel, or
// re-derived later without replaying the stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  template <typename... Ids>
  CounterRng(std::uint64_t seed, Dom domain, Ids... ids)
      : key_(stream_key(seed, domain, ids...)) {}

  std::uint64_t at(std::uint64_t i) const noexcept { return mix64(key_ + kGolden * (i + 1)); }

  // Uniform on the open interval (0,1); never returns an exact 0 or 1.
  double unit_at(std::uint64_t i) const noexcept {
    return (static_cast<double>(at(i) >> 11) + 0.5) * 0x1p-53;
  }

  double normal_at(std::uint64_t i) const { return inverse_normal_cdf(unit_at(i)); }

  // Unbiased enough for bound <= 2^32 (modulo bias < 2^-32); used for swaps.
  std::uint64_t below_at(std::uint64_t i, std::uint64_t bound) const noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(at(i)) * bound) >> 64);
  }

  std::uint64_t next_u64() { return at(counter_++); }
  double next_unit() { return unit_at(counter_++); }
  double next_normal() { return normal_at(counter_++); }
  std::uint64_t next_below(std::uint64_t bound) { return below_at(counter_++, bound); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Zero-mean Gaussian with std `sigma` truncated symmetrically to [-bound, bound],
// sampled by inverse-CDF from one uniform. Symmetric truncation keeps the mean
// exactly zero. Requires sigma > 0 and bound > 0.
double truncated_normal(double sigma, double bound, double u);

}  // namespace focus
