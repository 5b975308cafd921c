#pragma once

#include <array>
#include <cstdint>

namespace fkghost {

// xoshiro256++ with splitmix64 seeding. Chosen over std engines so that
// streams are bit-reproducible across platforms and easy to serialize.
class Rng {
 public:
  Rng() : Rng(0) {}

  explicit Rng(uint64_t seed) { reseed(seed); }

  // Independent stream k of a master seed (one per chain / grid point).
  static Rng stream(uint64_t seed, uint64_t k) {
    return Rng(seed ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
  }

  void reseed(uint64_t seed) {
    uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool coin(double p) { return uniform() < p; }

  bool fair_coin() { return (next_u64() >> 63) != 0; }

  // Uniform integer in [0, n).
  uint64_t pick(uint64_t n) {
    // Lemire-style rejection-free enough for n << 2^64; exact via rejection.
    uint64_t threshold = (-n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  std::array<uint64_t, 4> state() const { return s_; }
  void set_state(const std::array<uint64_t, 4>& s) { s_ = s; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::array<uint64_t, 4> s_{};
};

}  // namespace fkghost
