#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace clickcount {

/// Truncated photon-number distribution P(n), n = 0..n_max.
/// tail_bound is a guaranteed upper bound on the probability mass omitted
/// beyond n_max, so sum(probs) lies in [1 - tail_bound, 1 + eps_norm].
struct PhotonNumberDistribution {
  std::vector<double> probs;
  double tail_bound = 0.0;

  int n_max() const { return static_cast<int>(probs.size()) - 1; }
  double mean() const;
};

inline constexpr double kNormEps = 1e-12;
inline constexpr double kDefaultTruncTol = 1e-12;

/// Fock state |n>: a delta distribution at n.
PhotonNumberDistribution fock_pnd(int n);

/// Coherent state with mean photon number alpha2 = |alpha|^2 (Poisson).
PhotonNumberDistribution coherent_pnd(double alpha2,
                                      double trunc_tol = kDefaultTruncTol);

/// Squeezed vacuum with squeeze parameter xi; even photon numbers only.
PhotonNumberDistribution squeezed_vacuum_pnd(double xi,
                                             double trunc_tol = kDefaultTruncTol);

/// Odd coherent state (|alpha> - |-alpha>)/norm; odd photon numbers only.
/// Undefined at alpha2 = 0 where the normalization diverges.
PhotonNumberDistribution odd_coherent_pnd(double alpha2,
                                          double trunc_tol = kDefaultTruncTol);

/// Validate and load a distribution from a structured document:
///   { "probabilities": [ ... ], "tail_bound": 0.0 }
/// tail_bound is optional (default 0); unknown fields are rejected.
/// A top-level "distribution" object wrapper (as written by the CLI) is
/// unwrapped first. Throws std::invalid_argument naming the offending entry.
PhotonNumberDistribution load_pnd(const nlohmann::json& doc,
                                  double norm_tol = 1e-9);
PhotonNumberDistribution load_pnd_file(const std::string& path,
                                       double norm_tol = 1e-9);

nlohmann::json to_json(const PhotonNumberDistribution& pnd);

/// Throws std::invalid_argument if the invariants do not hold.
void validate(const PhotonNumberDistribution& pnd);

}  // namespace clickcount
