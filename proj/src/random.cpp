#include "pcl/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pcl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trajectory, std::uint64_t channel) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ splitmix64(trajectory + 0x632be59bd9b4e019ULL));
  return splitmix64(h ^ splitmix64(channel + 0x85157af5ULL));
}

RandomStream::RandomStream(std::uint64_t master, std::uint64_t trajectory, std::uint64_t channel)
    : engine_(derive_seed(master, trajectory, channel)) {}

double RandomStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::exponential() { return -std::log(uniform()); }

double RandomStream::normal() {
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

std::int64_t RandomStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(engine_);
}

double RandomStream::uniform_angle() { return 2.0 * std::numbers::pi * uniform(); }

std::string RandomStream::serialize() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void RandomStream::deserialize(const std::string& text) {
  std::istringstream is(text);
  is >> engine_;
  if (!is) throw std::runtime_error("corrupt random stream state");
}

}  // namespace pcl
