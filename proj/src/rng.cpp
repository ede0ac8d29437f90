#include "qpercept/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpercept {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Open interval (0, 1) from 32 bits.
inline double open_unit(std::uint32_t w) {
  return (static_cast<double>(w) + 0.5) * 0x1.0p-32;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t trajectory)
    : seed_(seed), trajectory_(trajectory) {}

StepDraw NoiseSource::draw(std::uint64_t step, std::uint32_t slot) const {
  if (step > 0xFFFFFFFFull) {
    throw std::out_of_range("step index exceeds 32-bit counter");
  }
  Philox4x32::Counter counter{static_cast<std::uint32_t>(step), slot,
                              static_cast<std::uint32_t>(trajectory_),
                              static_cast<std::uint32_t>(trajectory_ >> 32)};
  Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                      static_cast<std::uint32_t>(seed_ >> 32)};
  auto w = Philox4x32::block(counter, key);

  StepDraw d;
  std::uint64_t bits53 =
      ((static_cast<std::uint64_t>(w[0]) << 32) | w[1]) >> 11;
  d.uniform = static_cast<double>(bits53) * 0x1.0p-53;
  double radius = std::sqrt(-2.0 * std::log(open_unit(w[2])));
  double angle = 2.0 * std::numbers::pi * open_unit(w[3]);
  d.normal = radius * std::cos(angle);
  d.normal2 = radius * std::sin(angle);
  return d;
}

}  // namespace qpercept
