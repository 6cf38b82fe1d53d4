#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sodium.h>

namespace moran {

/// Per-replicate random stream: the ChaCha20 keystream keyed by
/// (master seed, stream, substream). Distinct triples give distinct keys, so a
/// replicate's draws do not depend on which thread runs it or in which order,
/// and setting up a stream costs one block.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t master, std::uint64_t stream = 0, std::uint64_t substream = 0) {
    static const bool ready = sodium_init() >= 0;
    (void)ready;
    const std::uint64_t words[4] = {master, stream, substream, 0};
    for (std::size_t i = 0; i < 32; ++i) key_[i] = static_cast<unsigned char>(words[i / 8] >> (8 * (i % 8)));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (next_ == buffer_.size()) refill();
    return buffer_[next_++];
  }

 private:
  static constexpr std::uint64_t blocks_per_refill = sizeof(std::uint64_t) * 32 / 64;

  void refill() {
    unsigned char bytes[sizeof(std::uint64_t) * 32] = {};
    const unsigned char nonce[crypto_stream_chacha20_NONCEBYTES] = {};
    crypto_stream_chacha20_xor_ic(bytes, bytes, sizeof bytes, nonce, counter_, key_.data());
    counter_ += blocks_per_refill;
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      std::uint64_t w = 0;
      for (std::size_t b = 0; b < 8; ++b) w |= static_cast<std::uint64_t>(bytes[8 * i + b]) << (8 * b);
      buffer_[i] = w;
    }
    next_ = 0;
  }

  std::array<unsigned char, crypto_stream_chacha20_KEYBYTES> key_{};
  std::array<std::uint64_t, 32> buffer_{};
  std::size_t next_ = 32;
  std::uint64_t counter_ = 0;
};

/// Uniform integer in [0, bound), bound > 0. Lemire's multiply-and-reject, unbiased.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Exp(rate) by inversion.
inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open01(rng)) / rate; }

}  // namespace moran
