#pragma once

// Per-trajectory random streams. A stream is keyed by (master seed,
// trajectory index, channel) so that parallel scheduling never changes the
// numbers a trajectory sees.

#include <cstdint>
#include <random>
#include <string>

namespace pcl {

std::uint64_t splitmix64(std::uint64_t x);

// Mixes the key parts into a single 64-bit engine seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trajectory, std::uint64_t channel);

class RandomStream {
 public:
  RandomStream() : RandomStream(0, 0, 0) {}
  RandomStream(std::uint64_t master, std::uint64_t trajectory, std::uint64_t channel);

  // Uniform on (0, 1), 53 bits, never exactly 0 or 1.
  double uniform();
  double exponential();
  double normal();
  // Poisson with the given mean; mean <= 0 yields 0.
  std::int64_t poisson(double mean);
  double uniform_angle();

  std::string serialize() const;
  void deserialize(const std::string& text);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pcl
