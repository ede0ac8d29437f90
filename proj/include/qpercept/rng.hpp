#pragma once

#include <array>
#include <cstdint>

namespace qpercept {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
/// pure function of (counter, key), so any draw can be recomputed without
/// replaying a stream.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// Random numbers for one stochastic step of one channel slot.
struct StepDraw {
  double uniform;   // in [0, 1), 53-bit resolution
  double normal;    // N(0, 1)
  double normal2;   // N(0, 1), independent of `normal`
};

/// Noise for trajectory `trajectory` of an ensemble seeded with `seed`.
/// draw(step, slot) depends only on (seed, trajectory, step, slot), which
/// makes a trajectory bit-identical regardless of scheduling.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::uint64_t trajectory);

  StepDraw draw(std::uint64_t step, std::uint32_t slot) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t trajectory() const { return trajectory_; }

 private:
  std::uint64_t seed_;
  std::uint64_t trajectory_;
};

}  // namespace qpercept
