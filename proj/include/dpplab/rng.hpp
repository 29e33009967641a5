#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "vec.hpp"

namespace dpplab {

// Philox4x32-10 block function (Salmon et al.).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

// Random stream addressed by (seed, path, step). Each (path, step) pair owns an
// independent sequence, so the draws of one step never depend on how many numbers
// earlier steps consumed.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t path, std::uint64_t step = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_(path), step_(step) {}

  void set_step(std::uint64_t step) {
    step_ = step;
    sub_ = 0;
    avail_ = 0;
  }
  std::uint64_t step() const { return step_; }
  std::uint64_t path() const { return path_; }

  std::uint32_t next_u32() {
    if (avail_ == 0) refill();
    return buf_[4 - avail_--];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // uniform point of the open unit ball, by rejection from the cube
  template <std::size_t N>
  Vec<N> in_unit_ball() {
    for (;;) {
      Vec<N> z;
      for (auto& c : z) c = uniform(-1.0, 1.0);
      if (norm2(z) < 1.0) return z;
    }
  }

 private:
  void refill() {
    buf_ = philox4x32({static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32),
                       static_cast<std::uint32_t>(step_), sub_++},
                      key_);
    avail_ = 4;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t path_;
  std::uint64_t step_;
  std::uint32_t sub_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int avail_ = 0;
};

}  // namespace dpplab
