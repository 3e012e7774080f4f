#pragma once

#include <array>
#include <cstdint>

namespace knnmi {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is identified by (seed, stream_a, stream_b); the 64-bit seed is
/// the key and the stream ids occupy the upper half of the 128-bit counter,
/// so distinct (trial, size) pairs never share a counter block.
class PhiloxStream {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit PhiloxStream(std::uint64_t seed, std::uint32_t stream_a = 0,
                        std::uint32_t stream_b = 0);

  static Block apply(Block counter, Key key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1], safe as a log argument.
  double uniform_positive() { return 1.0 - uniform(); }
  /// Uniform on [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang, with the shape < 1 boost.
  double gamma(double shape);
  double beta(double a, double b);

 private:
  void refill();

  Key key_;
  Block counter_;
  Block buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace knnmi
