#include "wiener/signals.hpp"

#include <cmath>
#include <random>

#include "wiener/error.hpp"

namespace wiener {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

double Distribution::uniform_half_width() const { return std::sqrt(3.0 * variance); }

Seed derive_seed(Seed master, std::uint64_t realization, StreamRole role,
                 std::uint64_t index) {
  std::uint64_t h = splitmix64(master.value);
  h = splitmix64(h ^ realization);
  h = splitmix64(h ^ static_cast<std::uint64_t>(role));
  h = splitmix64(h ^ index);
  return Seed{h};
}

std::vector<double> gen_white(const Distribution& dist, std::size_t n, Seed seed) {
  if (n == 0) throw InvalidArgument("gen_white: n must be at least 1");
  if (!(dist.variance >= 0.0) || !std::isfinite(dist.variance))
    throw InvalidArgument("gen_white: variance must be finite and non-negative");

  std::vector<double> out(n, 0.0);
  if (dist.variance == 0.0) return out;

  std::mt19937_64 engine(seed.value);
  switch (dist.kind) {
    case DistributionKind::GaussianWhite: {
      std::normal_distribution<double> normal(0.0, std::sqrt(dist.variance));
      for (auto& x : out) x = normal(engine);
      break;
    }
    case DistributionKind::UniformWhite: {
      const double half = dist.uniform_half_width();
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      for (auto& x : out) x = half * unit(engine);
      break;
    }
  }
  return out;
}

}  // namespace wiener
