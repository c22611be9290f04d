#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace mpls {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Pure: the same (counter, key) always yields the
// same block.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Bijective 64-bit mixer (the splitmix64 finaliser).
std::uint64_t mix64(std::uint64_t x);

// 64-bit FNV-1a, used to turn stream names into stream ids.
std::uint64_t hash_name(std::string_view name);

// Seed for the `index`-th child of `seed`. For a fixed parent the map
// index -> child is injective.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Counter-based generator keyed by (seed, stream id). The high half of the
// Philox counter holds the stream id and the low half the block index, so
// distinct streams of one seed never share a block. Satisfies
// UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}
  Stream(std::uint64_t seed, std::string_view name) : Stream(seed, hash_name(name)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Skip `n` 64-bit outputs.
  void discard(std::uint64_t n);

  // Independent child stream: same seed, stream id mixed with `name`.
  [[nodiscard]] Stream split(std::string_view name) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;  // next block to generate
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace mpls
