#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "clickcount/click_kernel.hpp"
#include "clickcount/photon_states.hpp"

namespace clickcount {

struct SimOptions {
  std::uint64_t samples = 1;
  std::uint64_t seed = 0;
  int shards = 1;  // results are independent of shard count
};

struct SimResult {
  std::vector<std::uint64_t> counts;  // index k = 0..N
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  ClickDistribution empirical() const;
};

/// Stochastic simulation of the physical detection process: draw n from the
/// state, route each photon to a detector (uniform or per weights), register
/// it with probability eta, add independent dark clicks with probability
/// 1 - e^{-nu}, and count clicking detectors. The generator is mt19937_64;
/// shard s uses a stream seeded with splitmix64(seed, s), so a fixed
/// (seed, shards) pair is bitwise reproducible and shard-merge order free.
SimResult simulate_clicks(const PhotonNumberDistribution& pnd,
                          const DetectorConfig& cfg, const SimOptions& opts);

/// Exact click distribution by sequential conditioning: detector i of the
/// remaining r receives Binomial(r, 1/remaining) photons and clicks with
/// probability 1 - (1-eta)^m e^{-nu}. No alternating sums; every
/// intermediate is a probability. Uniform splitting only.
/// Throws ResourceError when N * n_max^2 exceeds work_budget.
ClickDistribution exact_dp_oracle(const PhotonNumberDistribution& pnd,
                                  const DetectorConfig& cfg,
                                  std::uint64_t work_budget = 1'000'000'000ULL);

/// Total-variation distance and a chi-square statistic between two click
/// distributions over the same N. When samples > 0, a is treated as
/// empirical: chi2 = samples * sum (a_k - b_k)^2 / b_k with cells whose
/// expected count samples*b_k < 5 pooled into their neighbor.
std::pair<double, double> compare_distributions(const ClickDistribution& a,
                                                const ClickDistribution& b,
                                                std::uint64_t samples = 0);

}  // namespace clickcount
