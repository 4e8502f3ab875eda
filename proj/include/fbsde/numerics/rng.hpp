#pragma once

#include <array>
#include <cstdint>

namespace fbsde {

//! Philox4x32-10 block function (Salmon et al.).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/*!
 * Counter-based stream: every variate is a pure function of
 * (seed, stream, index), so paths can be generated in any order or on any
 * thread and still reproduce bit for bit.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  //! Uniform on the open interval (0,1).
  double uniform(std::uint64_t index) const;
  //! Standard normal (Box-Muller on one Philox block).
  double normal(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace fbsde
