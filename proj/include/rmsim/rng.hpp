#pragma once

#include <cstdint>

namespace rmsim {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of replication `index` under `base_seed`.
inline constexpr std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t index) {
  return base_seed ^ splitmix64(index);
}

// Counter-based generator: draw i of stream `key` is a pure function of
// (key, i), so any period's uniform can be regenerated without replaying the
// stream. Two simulations keyed by the same seed see the same uniforms.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(splitmix64(key)) {}

  constexpr std::uint64_t at(std::uint64_t counter) const {
    return splitmix64(key_ ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform_at(std::uint64_t counter) const {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }

  double uniform() { return uniform_at(counter_++); }
  std::uint64_t next() { return at(counter_++); }

  std::uint64_t counter() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rmsim
