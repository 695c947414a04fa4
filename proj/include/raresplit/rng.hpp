#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace raresplit {

/// Identifies one independent random stream. Every simulation owns the stream
/// (experiment seed, client, simulation slot, replacement generation); protocol-level
/// choices use reserved slots below.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t client = 0;
  std::uint64_t simulation = 0;
  std::uint64_t generation = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Reserved simulation slots for non-simulation streams.
inline constexpr std::uint64_t kDonorStream = ~std::uint64_t{0};       // client picks among its successes
inline constexpr std::uint64_t kServerStream = ~std::uint64_t{0} - 1;  // server picks donor clients
inline constexpr std::uint64_t kSplitStream = ~std::uint64_t{0} - 2;   // adaptive restart choice

/// Hashes a stream id to a 64-bit seed (splitmix64 finaliser over each field).
std::uint64_t stream_seed(const StreamId& id);

/// Derives the seed of a child experiment (repeat, instance) from a parent seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

class Rng {
 public:
  explicit Rng(const StreamId& id);

  const StreamId& id() const { return id_; }

  /// Uniform double in [0, 1) from the top 53 bits of one draw.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n); n must be positive.
  std::size_t index(std::size_t n);

  std::uint64_t next() { return engine_(); }

 private:
  StreamId id_;
  std::mt19937_64 engine_;
};

}  // namespace raresplit
