#pragma once

#include <cstdint>
#include <vector>

namespace wiener {

enum class DistributionKind { GaussianWhite, UniformWhite };

/// Zero-mean white distribution described by its variance (signal power).
struct Distribution {
  DistributionKind kind = DistributionKind::GaussianWhite;
  double variance = 0.0;

  static Distribution gaussian(double variance) {
    return {DistributionKind::GaussianWhite, variance};
  }
  static Distribution uniform(double variance) {
    return {DistributionKind::UniformWhite, variance};
  }

  /// Half-width L of the uniform support [-L, L]; L = sqrt(3 * variance).
  double uniform_half_width() const;
};

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(Seed, Seed) = default;
};

/// Which random stream of a Monte Carlo realization a seed feeds.
enum class StreamRole : std::uint64_t {
  Input = 1,
  ProcessNoise = 2,
  MeasurementNoise = 3,
  SimulationNoise = 4,
  SimulationInput = 5,
};

/// Derives an independent, reproducible substream seed from
/// (master, realization, role, index) by SplitMix64 mixing.
Seed derive_seed(Seed master, std::uint64_t realization, StreamRole role,
                 std::uint64_t index = 0);

/// n i.i.d. zero-mean draws with the given distribution. Identical arguments
/// give bit-identical output. Throws InvalidArgument on negative variance or
/// n == 0.
std::vector<double> gen_white(const Distribution& dist, std::size_t n, Seed seed);

}  // namespace wiener
