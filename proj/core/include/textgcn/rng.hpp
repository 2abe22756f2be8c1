#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace textgcn {

// Deterministic random source. std::mt19937_64 has a standard-specified
// output sequence; all derived draws below avoid the (unspecified)
// standard distributions, so results are bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1) with 53 bits of mantissa.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform index in [0,n); unbiased via rejection.
  std::size_t uniform_index(std::size_t n);

  // Textual engine state, round-trippable through load_state().
  std::string save_state() const;
  void load_state(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a base seed (splitmix64 step).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace textgcn
