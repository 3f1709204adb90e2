#pragma once

#include <cstdint>

namespace wnms {

// Splittable counter-based generator. Every draw hashes (key, counter)
// through the SplitMix64 finalizer, so streams depend only on the 64-bit
// seed and are identical across platforms. Child streams are forked with
// split() and never touch the parent's counter.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed) {}

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();

  // Standard normal. Box-Muller; the second value of each pair is cached.
  double gaussian();

  // Independent child stream addressed by `stream`.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wnms
