#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace fbmlab {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
/// Stateless: the same (counter, key) always yields the same block.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Identifies one independent random substream. Streams for different
/// (replicate, component) pairs never overlap, whatever order they are drawn in.
struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t replicate = 0;
  std::uint32_t component = 0;

  StreamKey with_replicate(std::uint64_t r) const noexcept { return {master, r, component}; }
  StreamKey with_component(std::uint32_t c) const noexcept { return {master, replicate, c}; }
};

/// Standard normal variates from a Philox substream (Box-Muller on 53-bit uniforms).
/// Cheap to construct; a value type that can move between threads.
class NormalStream {
public:
  explicit NormalStream(StreamKey key) noexcept;

  double next() noexcept;
  double uniform() noexcept;
  void fill(std::span<double> out) noexcept;

private:
  void refill() noexcept;

  Philox4x32::Key key_{};
  std::uint64_t replicate_ = 0;
  std::uint64_t block_ = 0;
  std::array<double, 2> cache_{};
  int cached_ = 0;
};

}  // namespace fbmlab
