#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>

namespace buggin {

// PCG32 (XSH-RR, 64-bit state). All randomness in the toolkit goes through
// this generator so that results do not depend on the standard library's
// distribution implementations.
class Pcg32 {
 public:
  using result_type = std::uint32_t;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0xda3e39cb94b95bdbULL);

  std::uint32_t operator()() { return next_u32(); }
  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double next_double();
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t bounded(std::uint64_t bound);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

// Fisher-Yates shuffle driven by Pcg32::bounded.
template <typename T>
void shuffle(std::span<T> items, Pcg32& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

// Stable 64-bit hash (FNV-1a).
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Stage-local seed derived from the run seed and a stage name.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

// Derived seed for the i-th item of a stage (trees, folds, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage, std::uint64_t index);

}  // namespace buggin
