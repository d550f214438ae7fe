#pragma once

#include <cstdint>
#include <utility>

#include "wiener/signals.hpp"
#include "wiener/system.hpp"

namespace wiener::testing {

/// Simulates spec over fresh white input and noises drawn from
/// (seed, realization); the input carries `history` extra leading samples.
inline DataRecord make_record(const SystemSpec& spec, std::size_t N, std::uint64_t seed,
                              std::uint64_t realization = 0, std::size_t history = 1) {
  const Seed master{seed};
  DataRecord data;
  data.history = history;
  data.u = gen_white(spec.input_dist, N + history, derive_seed(master, realization, StreamRole::Input));
  const auto v = gen_white(Distribution::gaussian(spec.sigma_v2), N, derive_seed(master, realization, StreamRole::ProcessNoise));
  const auto e =
      gen_white(Distribution::gaussian(spec.sigma_e2), N, derive_seed(master, realization, StreamRole::MeasurementNoise));
  data.y = simulate(spec, data.u, v, e, history).y;
  return data;
}

inline SystemSpec cubic_example(DistributionKind input = DistributionKind::GaussianWhite) {
  SystemSpec spec;
  spec.input_dist = {input, 1.0 / 3.0};
  return spec;
}

}  // namespace wiener::testing
