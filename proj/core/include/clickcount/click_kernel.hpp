#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "clickcount/errors.hpp"
#include "clickcount/photon_states.hpp"

namespace clickcount {

/// N on/off detectors with quantum efficiency eta and per-detector noise
/// exponent nu (dark-click probability 1 - exp(-nu)). Optional non-uniform
/// splitting weights |u_i|^2; absent means uniform 1/N.
struct DetectorConfig {
  int n_detectors = 1;
  double eta = 1.0;
  double nu = 0.0;
  std::optional<std::vector<double>> weights;

  bool uniform() const;
  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

/// Probability vector over the total click count k = 0..N.
struct ClickDistribution {
  std::vector<double> probs;  // size n_detectors + 1
  int n_detectors = 0;
};

/// Fock-diagonal POVM: coeffs[k][n] = P(k clicks | Fock state n).
/// Columns are normalized: sum_k coeffs[k][n] = 1.
struct PovmDiagonal {
  std::vector<std::vector<double>> coeffs;  // [k][n], k = 0..N, n = 0..n_max
  int n_detectors = 0;
  int n_max = 0;
};

/// Conditional click probability c_{k|n} for uniform splitting:
///   c_{k|n} = C(N,k) sum_j C(k,j) (-1)^j e^{-(N-k+j)nu} (1 - (N-k+j)eta/N)^n.
/// The alternating sum is evaluated in log domain with sign tracking and
/// compensated summation; when its estimated cancellation error exceeds the
/// result scale the kernel switches to an equivalent all-nonnegative
/// factorization (photon survival x bin occupancy x dark counts), so the
/// value is reliable for any (N, n, eta, nu). Clamped to [0, 1].
double fock_click_prob(int n, int k, const DetectorConfig& cfg,
                       StabilityDiagnostics* diag = nullptr);

/// Full POVM matrix c_{k|n} for k = 0..N, n = 0..n_max.
PovmDiagonal povm_fock_matrix(const DetectorConfig& cfg, int n_max,
                              StabilityDiagnostics* diag = nullptr);

/// Click statistics of an arbitrary photon-number-diagonal state:
/// probs[k] = sum_n P(n) c_{k|n}. Uniform splitting only.
ClickDistribution click_distribution(const PhotonNumberDistribution& pnd,
                                     const DetectorConfig& cfg,
                                     StabilityDiagnostics* diag = nullptr);

/// Coherent-state click statistics: exactly Binomial(N, q) with
/// q = 1 - e^{-(eta*alpha2/N + nu)}; no truncation error.
ClickDistribution coherent_click_distribution(double alpha2,
                                              const DetectorConfig& cfg);

/// Coherent-state clicks with arbitrary splitting weights: the
/// Poisson-binomial distribution of per-detector probabilities
/// q_i = 1 - e^{-(eta*w_i*alpha2 + nu)}, by the O(N^2) convolution DP.
ClickDistribution coherent_click_nonuniform(double alpha2,
                                            const std::vector<double>& weights,
                                            double eta, double nu);

/// Mandel photo-counting statistics of an ideal counter with efficiency eta
/// and total noise nu: Poisson(nu) noise convolved with Binomial(n, eta)
/// survival, averaged over the state. k_max < 0 selects the default
/// n_max + ceil(nu + 10 sqrt(nu) + 10); throws ResourceError if the omitted
/// mass exceeds 1e-9.
std::vector<double> mandel_distribution(const PhotonNumberDistribution& pnd,
                                        double eta, double nu, int k_max = -1);

/// Mandel Q = variance/mean - 1 of a probability sequence.
/// Throws std::domain_error when the mean is zero.
double mandel_q(const std::vector<double>& probs);

/// Closed form Q = e^{-alpha2/N} - 1 for coherent clicks.
double coherent_click_q_closed(double alpha2, int n_detectors);

/// (mean, variance) by direct summation.
std::pair<double, double> moments(const ClickDistribution& dist);

/// For each N in the list: total-variation distance between the click
/// distribution with per-detector noise nu_total/N and the Mandel
/// distribution with total noise nu_total.
std::vector<std::pair<int, double>> limit_compare(
    const PhotonNumberDistribution& pnd, double eta, double nu_total,
    const std::vector<int>& n_detectors_list);

namespace detail {

/// Raw alternating-sum evaluation of c_{k|n}; returns the unclamped value
/// and an absolute error estimate for the cancellation. Test hook and first
/// route of fock_click_prob.
std::pair<double, double> fock_click_prob_alternating(int n, int k,
                                                      const DetectorConfig& cfg);

/// log S(n,k), Stirling numbers of the second kind, by the stable recurrence
/// S(n,k) = k S(n-1,k) + S(n-1,k-1) carried in log domain.
/// Returns a triangular table t[n][k], 0 <= k <= n <= n_max.
std::vector<std::vector<double>> log_stirling2_table(int n_max);

}  // namespace detail

}  // namespace clickcount
