#include "clickcount/click_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace clickcount {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kClampFloor = -1e-12;  // below this is a stability failure
constexpr double kFailureFloor = -1e-9;

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double clamp_probability(double raw, StabilityDiagnostics* diag) {
  if (raw < kFailureFloor) {
    std::ostringstream os;
    os << "stability failure: probability evaluated to " << raw;
    throw StabilityError(os.str());
  }
  if (raw < 0.0) {
    if (diag) {
      ++diag->clamped;
      diag->worst_negative = std::min(diag->worst_negative, raw);
    }
    return 0.0;
  }
  return std::min(raw, 1.0);
}

// Loss-degraded photon-number distribution: each photon independently
// survives with probability eta, so P~(m) = sum_n P(n) C(n,m) eta^m (1-eta)^{n-m}.
std::vector<double> survival_mix(const std::vector<double>& probs, double eta) {
  int n_max = static_cast<int>(probs.size()) - 1;
  if (eta == 1.0) return probs;
  std::vector<double> mixed(probs.size(), 0.0);
  if (eta == 0.0) {
    mixed[0] = 0.0;
    for (double p : probs) mixed[0] += p;
    return mixed;
  }
  double log_eta = std::log(eta);
  double log_1me = std::log1p(-eta);
  for (int n = 0; n <= n_max; ++n) {
    if (probs[std::size_t(n)] == 0.0) continue;
    for (int m = 0; m <= n; ++m) {
      mixed[std::size_t(m)] +=
          probs[std::size_t(n)] *
          std::exp(log_choose(n, m) + m * log_eta + (n - m) * log_1me);
    }
  }
  return mixed;
}

// P(a of N bins occupied | m photons thrown uniformly) as a log-domain
// matrix occ[a][m] = C(N,a) a! S(m,a) / N^m, a <= min(m, N).
std::vector<std::vector<double>> occupancy_matrix(
    int n_detectors, int m_max,
    const std::vector<std::vector<double>>& log_s2) {
  double log_n = std::log(double(n_detectors));
  int a_max = std::min(m_max, n_detectors);
  std::vector<std::vector<double>> occ(
      std::size_t(a_max) + 1, std::vector<double>(std::size_t(m_max) + 1, 0.0));
  for (int a = 0; a <= a_max; ++a) {
    double prefix = log_choose(n_detectors, a) + std::lgamma(double(a) + 1.0);
    for (int m = a; m <= m_max; ++m) {
      double ls = log_s2[std::size_t(m)][std::size_t(a)];
      if (ls == kNegInf) continue;
      occ[std::size_t(a)][std::size_t(m)] =
          std::exp(prefix + ls - double(m) * log_n);
    }
  }
  return occ;
}

// Fold independent dark clicks (probability d = 1 - e^{-nu} on each detector
// without a photon click) into the occupied-bin weights b[a]:
// p[k] = sum_a b[a] C(N-a, k-a) d^{k-a} e^{-nu (N-k)}.
std::vector<double> dark_convolve(const std::vector<double>& b, int n_detectors,
                                  double nu) {
  std::vector<double> p(std::size_t(n_detectors) + 1, 0.0);
  int a_max = static_cast<int>(b.size()) - 1;
  if (nu == 0.0) {
    for (int a = 0; a <= a_max && a <= n_detectors; ++a)
      p[std::size_t(a)] = b[std::size_t(a)];
    return p;
  }
  double log_d = std::log(-std::expm1(-nu));
  for (int a = 0; a <= a_max && a <= n_detectors; ++a) {
    if (b[std::size_t(a)] == 0.0) continue;
    for (int k = a; k <= n_detectors; ++k) {
      p[std::size_t(k)] += b[std::size_t(a)] *
                           std::exp(log_choose(n_detectors - a, k - a) +
                                    (k - a) * log_d - nu * (n_detectors - k));
    }
  }
  return p;
}

// All-nonnegative factorization of the click kernel for one Fock column:
// weights over the number of photon-clicking detectors for |n>.
std::vector<double> photon_click_weights(
    int n, const DetectorConfig& cfg,
    const std::vector<std::vector<double>>& log_s2) {
  std::vector<double> delta(std::size_t(n) + 1, 0.0);
  delta[std::size_t(n)] = 1.0;
  std::vector<double> mixed = survival_mix(delta, cfg.eta);
  auto occ = occupancy_matrix(cfg.n_detectors, n, log_s2);
  int a_max = static_cast<int>(occ.size()) - 1;
  std::vector<double> b(std::size_t(a_max) + 1, 0.0);
  for (int a = 0; a <= a_max; ++a)
    for (int m = a; m <= n; ++m)
      b[std::size_t(a)] += mixed[std::size_t(m)] * occ[std::size_t(a)][std::size_t(m)];
  return b;
}

void require_uniform(const DetectorConfig& cfg, const char* who) {
  if (!cfg.uniform())
    throw std::invalid_argument(
        std::string(who) +
        ": non-uniform splitting weights are only supported for coherent "
        "input (coherent_click_nonuniform)");
}

double total_variation(const std::vector<double>& a,
                       const std::vector<double>& b) {
  std::size_t len = std::max(a.size(), b.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    double ai = i < a.size() ? a[i] : 0.0;
    double bi = i < b.size() ? b[i] : 0.0;
    tv += std::abs(ai - bi);
  }
  return 0.5 * tv;
}

}  // namespace

bool DetectorConfig::uniform() const {
  if (!weights) return true;
  double w0 = 1.0 / double(n_detectors);
  for (double w : *weights)
    if (std::abs(w - w0) > 1e-15) return false;
  return true;
}

void DetectorConfig::validate() const {
  if (n_detectors < 1)
    throw std::invalid_argument("n_detectors must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(nu >= 0.0)) throw std::invalid_argument("nu must be non-negative");
  if (weights) {
    if (static_cast<int>(weights->size()) != n_detectors)
      throw std::invalid_argument("weights length must equal n_detectors");
    double sum = 0.0;
    for (double w : *weights) {
      if (!(w >= 0.0))
        throw std::invalid_argument("weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("weights must sum to 1");
  }
}

namespace detail {

std::vector<std::vector<double>> log_stirling2_table(int n_max) {
  if (n_max < 0) throw std::domain_error("n_max must be non-negative");
  if (n_max > 200000)
    throw ResourceError("log_stirling2_table: n_max too large");
  std::vector<std::vector<double>> t(std::size_t(n_max) + 1);
  t[0] = {0.0};  // S(0,0) = 1
  for (int n = 1; n <= n_max; ++n) {
    t[std::size_t(n)].assign(std::size_t(n) + 1, kNegInf);
    auto& row = t[std::size_t(n)];
    const auto& prev = t[std::size_t(n) - 1];
    for (int k = 1; k <= n; ++k) {
      double a = k < n ? std::log(double(k)) + prev[std::size_t(k)] : kNegInf;
      double b = prev[std::size_t(k) - 1];
      if (a == kNegInf)
        row[std::size_t(k)] = b;
      else if (b == kNegInf)
        row[std::size_t(k)] = a;
      else {
        double hi = std::max(a, b), lo = std::min(a, b);
        row[std::size_t(k)] = hi + std::log1p(std::exp(lo - hi));
      }
    }
  }
  return t;
}

std::pair<double, double> fock_click_prob_alternating(
    int n, int k, const DetectorConfig& cfg) {
  const int n_det = cfg.n_detectors;
  const double log_cnk = log_choose(n_det, k);
  // Collect log magnitudes of all terms, then sum shifted by the maximum
  // with Kahan compensation in extended precision.
  std::vector<double> log_terms(std::size_t(k) + 1, kNegInf);
  double max_log = kNegInf;
  for (int j = 0; j <= k; ++j) {
    double base = 1.0 - double(n_det - k + j) * cfg.eta / double(n_det);
    double lt;
    if (base <= 0.0) {
      if (n == 0 && base == 0.0)
        lt = log_cnk + log_choose(k, j) - double(n_det - k + j) * cfg.nu;
      else
        continue;  // base < 0 cannot occur (n_det-k+j <= n_det, eta <= 1)
    } else {
      lt = log_cnk + log_choose(k, j) - double(n_det - k + j) * cfg.nu +
           double(n) * std::log(base);
    }
    log_terms[std::size_t(j)] = lt;
    max_log = std::max(max_log, lt);
  }
  if (max_log == kNegInf) return {0.0, 0.0};
  long double sum = 0.0L, comp = 0.0L, abs_sum = 0.0L;
  for (int j = 0; j <= k; ++j) {
    if (log_terms[std::size_t(j)] == kNegInf) continue;
    long double term = expl((long double)(log_terms[std::size_t(j)] - max_log));
    abs_sum += term;
    if (j % 2 != 0) term = -term;
    long double y = term - comp;
    long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  long double scale = expl((long double)max_log);
  double value = double(sum * scale);
  // Each log term carries an absolute error of a few ulp of its magnitude
  // (lgamma at large arguments), so the dominant error of the signed sum is
  // a small relative fraction of the sum of magnitudes, not of the result.
  double err = double(abs_sum * scale * 3e-14L);
  return {value, err};
}

}  // namespace detail

double fock_click_prob(int n, int k, const DetectorConfig& cfg,
                       StabilityDiagnostics* diag) {
  cfg.validate();
  require_uniform(cfg, "fock_click_prob");
  if (n < 0) throw std::domain_error("fock_click_prob: n must be >= 0");
  if (k < 0 || k > cfg.n_detectors)
    throw std::domain_error("fock_click_prob: k outside 0..N");
  if (cfg.nu == 0.0 && k > n) return 0.0;  // clicks cannot exceed photons
  if (cfg.nu == 0.0 && k == 0 && n > 0 && cfg.eta == 1.0) return 0.0;

  auto [raw, err] = detail::fock_click_prob_alternating(n, k, cfg);
  if (std::isfinite(raw) && std::isfinite(err) &&
      err <= 1e-15 + 1e-13 * std::abs(raw) && raw >= kClampFloor)
    return clamp_probability(raw, diag);

  // The alternating sum cancelled below its own noise floor; use the
  // equivalent nonnegative factorization instead.
  if (diag) ++diag->fallback_evals;
  auto log_s2 = detail::log_stirling2_table(n);
  auto b = photon_click_weights(n, cfg, log_s2);
  auto p = dark_convolve(b, cfg.n_detectors, cfg.nu);
  return clamp_probability(p[std::size_t(k)], diag);
}

PovmDiagonal povm_fock_matrix(const DetectorConfig& cfg, int n_max,
                              StabilityDiagnostics* diag) {
  cfg.validate();
  require_uniform(cfg, "povm_fock_matrix");
  if (n_max < 0) throw std::domain_error("n_max must be non-negative");
  if (n_max > 100000) {
    std::ostringstream os;
    os << "povm_fock_matrix: n_max = " << n_max
       << " exceeds the representable work range (offending entry k="
       << cfg.n_detectors << ", n=" << n_max << ")";
    throw ResourceError(os.str());
  }
  auto log_s2 = detail::log_stirling2_table(n_max);
  PovmDiagonal povm;
  povm.n_detectors = cfg.n_detectors;
  povm.n_max = n_max;
  povm.coeffs.assign(std::size_t(cfg.n_detectors) + 1,
                     std::vector<double>(std::size_t(n_max) + 1, 0.0));
  for (int n = 0; n <= n_max; ++n) {
    auto b = photon_click_weights(n, cfg, log_s2);
    auto p = dark_convolve(b, cfg.n_detectors, cfg.nu);
    for (int k = 0; k <= cfg.n_detectors; ++k)
      povm.coeffs[std::size_t(k)][std::size_t(n)] =
          clamp_probability(p[std::size_t(k)], diag);
  }
  return povm;
}

ClickDistribution click_distribution(const PhotonNumberDistribution& pnd,
                                     const DetectorConfig& cfg,
                                     StabilityDiagnostics* diag) {
  cfg.validate();
  require_uniform(cfg, "click_distribution");
  validate(pnd);
  int n_max = pnd.n_max();
  auto log_s2 = detail::log_stirling2_table(n_max);
  // Average over the state before the dark-count fold: survival-mixed photon
  // distribution, then occupancy weights b[a], then dark clicks.
  std::vector<double> mixed = survival_mix(pnd.probs, cfg.eta);
  auto occ = occupancy_matrix(cfg.n_detectors, n_max, log_s2);
  int a_max = static_cast<int>(occ.size()) - 1;
  std::vector<double> b(std::size_t(a_max) + 1, 0.0);
  for (int a = 0; a <= a_max; ++a)
    for (int m = a; m <= n_max; ++m)
      b[std::size_t(a)] += mixed[std::size_t(m)] * occ[std::size_t(a)][std::size_t(m)];
  auto p = dark_convolve(b, cfg.n_detectors, cfg.nu);
  ClickDistribution dist;
  dist.n_detectors = cfg.n_detectors;
  dist.probs.resize(p.size());
  for (std::size_t k = 0; k < p.size(); ++k)
    dist.probs[k] = clamp_probability(p[k], diag);
  return dist;
}

ClickDistribution coherent_click_distribution(double alpha2,
                                              const DetectorConfig& cfg) {
  cfg.validate();
  require_uniform(cfg, "coherent_click_distribution");
  if (alpha2 < 0.0)
    throw std::domain_error("alpha2 must be non-negative");
  const int n_det = cfg.n_detectors;
  double rate = cfg.eta * alpha2 / double(n_det) + cfg.nu;
  ClickDistribution dist;
  dist.n_detectors = n_det;
  dist.probs.assign(std::size_t(n_det) + 1, 0.0);
  if (rate == 0.0) {
    dist.probs[0] = 1.0;
    return dist;
  }
  double q = -std::expm1(-rate);
  double log_q = std::log(q);
  double log_1mq = -rate;  // log(1-q) exactly
  for (int k = 0; k <= n_det; ++k)
    dist.probs[std::size_t(k)] = std::exp(
        log_choose(n_det, k) + k * log_q + (n_det - k) * log_1mq);
  return dist;
}

ClickDistribution coherent_click_nonuniform(double alpha2,
                                            const std::vector<double>& weights,
                                            double eta, double nu) {
  DetectorConfig cfg;
  cfg.n_detectors = static_cast<int>(weights.size());
  cfg.eta = eta;
  cfg.nu = nu;
  cfg.weights = weights;
  cfg.validate();
  if (alpha2 < 0.0)
    throw std::domain_error("alpha2 must be non-negative");
  const int n_det = cfg.n_detectors;
  // Poisson-binomial over per-detector click probabilities, O(N^2) DP.
  std::vector<double> p(std::size_t(n_det) + 1, 0.0);
  p[0] = 1.0;
  for (int i = 0; i < n_det; ++i) {
    double q = -std::expm1(-(eta * weights[std::size_t(i)] * alpha2 + nu));
    for (int k = i + 1; k >= 1; --k)
      p[std::size_t(k)] = p[std::size_t(k)] * (1.0 - q) +
                          p[std::size_t(k) - 1] * q;
    p[0] *= 1.0 - q;
  }
  ClickDistribution dist;
  dist.n_detectors = n_det;
  dist.probs = std::move(p);
  return dist;
}

std::vector<double> mandel_distribution(const PhotonNumberDistribution& pnd,
                                        double eta, double nu, int k_max) {
  validate(pnd);
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(nu >= 0.0)) throw std::invalid_argument("nu must be non-negative");
  int n_max = pnd.n_max();
  if (k_max < 0)
    k_max = n_max + static_cast<int>(
                        std::ceil(nu + 10.0 * std::sqrt(nu) + 10.0));
  std::vector<double> mixed = survival_mix(pnd.probs, eta);
  std::vector<double> p(std::size_t(k_max) + 1, 0.0);
  if (nu == 0.0) {
    for (int m = 0; m <= n_max && m <= k_max; ++m)
      p[std::size_t(m)] = mixed[std::size_t(m)];
  } else {
    double log_nu = std::log(nu);
    for (int m = 0; m <= n_max; ++m) {
      if (mixed[std::size_t(m)] == 0.0) continue;
      for (int k = m; k <= k_max; ++k) {
        p[std::size_t(k)] += mixed[std::size_t(m)] *
                             std::exp((k - m) * log_nu - nu -
                                      std::lgamma(double(k - m) + 1.0));
      }
    }
  }
  double sum = 0.0;
  for (double v : p) sum += v;
  if (sum < 1.0 - pnd.tail_bound - 1e-9) {
    std::ostringstream os;
    os << "mandel_distribution: k_max = " << k_max
       << " leaves probability mass " << 1.0 - sum << " unaccounted";
    throw ResourceError(os.str());
  }
  return p;
}

double mandel_q(const std::vector<double>& probs) {
  double mean = 0.0, second = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    mean += double(k) * probs[k];
    second += double(k) * double(k) * probs[k];
  }
  if (mean <= 0.0)
    throw std::domain_error("mandel_q is undefined for zero mean");
  double variance = second - mean * mean;
  return variance / mean - 1.0;
}

double coherent_click_q_closed(double alpha2, int n_detectors) {
  if (!(alpha2 > 0.0)) throw std::domain_error("alpha2 must be positive");
  if (n_detectors < 1)
    throw std::domain_error("n_detectors must be >= 1");
  return std::expm1(-alpha2 / double(n_detectors));
}

std::pair<double, double> moments(const ClickDistribution& dist) {
  double mean = 0.0, second = 0.0;
  for (std::size_t k = 0; k < dist.probs.size(); ++k) {
    mean += double(k) * dist.probs[k];
    second += double(k) * double(k) * dist.probs[k];
  }
  return {mean, second - mean * mean};
}

std::vector<std::pair<int, double>> limit_compare(
    const PhotonNumberDistribution& pnd, double eta, double nu_total,
    const std::vector<int>& n_detectors_list) {
  std::vector<std::pair<int, double>> out;
  out.reserve(n_detectors_list.size());
  std::vector<double> mandel = mandel_distribution(pnd, eta, nu_total);
  for (int n_det : n_detectors_list) {
    DetectorConfig cfg;
    cfg.n_detectors = n_det;
    cfg.eta = eta;
    cfg.nu = nu_total / double(n_det);
    ClickDistribution clicks = click_distribution(pnd, cfg);
    out.emplace_back(n_det, total_variation(clicks.probs, mandel));
  }
  return out;
}

}  // namespace clickcount
