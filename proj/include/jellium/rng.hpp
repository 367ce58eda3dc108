#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace jellium {

// Philox4x64-10 counter-based generator. A (seed, stream) pair selects the key,
// so independent tasks get statistically independent streams without any
// shared state; the counter simply walks 0, 1, 2, ...
class Philox4x64 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  Philox4x64(std::uint64_t seed, std::uint64_t stream = 0) : key_{seed, stream} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      buffer_ = block(counter_, key_);
      increment(counter_);
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  // One 10-round Philox bijection of `counter` under `key`.
  static Block block(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const auto [hi0, lo0] = mulhilo(kMul0, counter[0]);
      const auto [hi1, lo1] = mulhilo(kMul1, counter[2]);
      counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    }
    return counter;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to take the logarithm of.
  double uniform_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform_pos()); }

  const Key& key() const noexcept { return key_; }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static std::array<std::uint64_t, 2> mulhilo(std::uint64_t a, std::uint64_t b) {
    const unsigned __int128 product = static_cast<unsigned __int128>(a) * b;
    return {static_cast<std::uint64_t>(product >> 64), static_cast<std::uint64_t>(product)};
  }

  static void increment(Block& c) {
    for (auto& word : c) {
      if (++word != 0) return;
    }
  }

  Key key_;
  Block counter_{0, 0, 0, 0};
  Block buffer_{};
  int pos_ = 4;
};

using Rng = Philox4x64;

// Standard normal by inversion (deterministic given the stream).
double standard_normal(Rng& rng);

}  // namespace jellium
