#include "fbmlab/rng.h"

#include <cmath>
#include <numbers>

namespace fbmlab {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53U;
constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Maps 64 random bits to (0,1), never 0 so log() in Box-Muller is finite.
inline double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

NormalStream::NormalStream(StreamKey key) noexcept : replicate_(key.replicate) {
  const std::uint64_t k = splitmix64(key.master ^ splitmix64(0xC0FFEEULL + key.component));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void NormalStream::refill() noexcept {
  const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                   static_cast<std::uint32_t>(replicate_),
                                   static_cast<std::uint32_t>(replicate_ >> 32)};
  ++block_;
  const auto out = Philox4x32::block(ctr, key_);
  const double u1 = to_open_unit((static_cast<std::uint64_t>(out[0]) << 32) | out[1]);
  const double u2 = to_open_unit((static_cast<std::uint64_t>(out[2]) << 32) | out[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phase = 2.0 * std::numbers::pi * u2;
  cache_ = {r * std::cos(phase), r * std::sin(phase)};
  cached_ = 2;
}

double NormalStream::next() noexcept {
  if (cached_ == 0) refill();
  return cache_[2 - cached_--];
}

double NormalStream::uniform() noexcept {
  const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                   static_cast<std::uint32_t>(replicate_),
                                   static_cast<std::uint32_t>(replicate_ >> 32)};
  ++block_;
  const auto out = Philox4x32::block(ctr, key_);
  return to_open_unit((static_cast<std::uint64_t>(out[0]) << 32) | out[1]);
}

void NormalStream::fill(std::span<double> out) noexcept {
  for (double& x : out) x = next();
}

}  // namespace fbmlab
