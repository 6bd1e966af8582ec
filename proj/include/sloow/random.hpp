#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

namespace sloow {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based random stream keyed by (master seed, label).
///
/// The value at a given counter depends only on (seed, label, counter), so
/// streams never perturb each other and adding a new labelled stream to a
/// scenario leaves every existing draw unchanged.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::string label)
      : master_seed_(master_seed),
        label_(std::move(label)),
        key_(detail::splitmix64(master_seed ^ detail::splitmix64(detail::fnv1a(label_)))) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const std::string& label() const noexcept { return label_; }
  std::uint64_t counter() const noexcept { return counter_; }

  // Raw draw at an explicit counter; does not advance the stream.
  std::uint64_t at(std::uint64_t counter) const noexcept {
    return detail::splitmix64(key_ ^ detail::splitmix64(counter));
  }

  std::uint64_t next_u64() noexcept { return at(counter_++); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes two counters.
  double gaussian() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t master_seed_;
  std::string label_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sloow
