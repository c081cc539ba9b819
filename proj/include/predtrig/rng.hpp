#pragma once

#include <array>
#include <cstdint>

namespace predtrig {

/// What a stream is used for. Part of the stream id so that, for a fixed run
/// index, every consumer draws from its own independent sequence.
enum class StreamPurpose : std::uint64_t {
  Trajectory = 0,
  ConditionalRollout = 1,
  Sampling = 2,
};

/// Counter-based Gaussian/uniform source (Philox4x32-10 keyed by the seed).
/// The sequence depends only on (seed, stream id), never on the platform's
/// <random> distributions or on thread scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static RngStream for_run(std::uint64_t seed, std::uint64_t run_index, StreamPurpose purpose) {
    return RngStream(seed, (run_index << 8) | static_cast<std::uint64_t>(purpose));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via the Box-Muller transform.
  double standard_normal();

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t index) const;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace predtrig
