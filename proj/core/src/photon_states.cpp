#include "clickcount/photon_states.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "clickcount/errors.hpp"

namespace clickcount {

namespace {
// Largest truncation any constructor will materialize.
constexpr int kMaxEntries = 2'000'000;

[[noreturn]] void truncation_overflow(const char* who) {
  throw ResourceError(std::string(who) +
                      ": reaching the requested truncation tolerance would "
                      "need more than 2e6 entries");
}
}  // namespace

double PhotonNumberDistribution::mean() const {
  double m = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) m += double(n) * probs[n];
  return m;
}

void validate(const PhotonNumberDistribution& pnd) {
  if (pnd.probs.empty())
    throw std::invalid_argument("photon distribution is empty");
  if (pnd.tail_bound < 0.0)
    throw std::invalid_argument("tail_bound must be non-negative");
  double sum = 0.0;
  for (std::size_t i = 0; i < pnd.probs.size(); ++i) {
    if (!(pnd.probs[i] >= 0.0)) {
      std::ostringstream os;
      os << "negative probability at n=" << i << ": " << pnd.probs[i];
      throw std::invalid_argument(os.str());
    }
    sum += pnd.probs[i];
  }
  if (sum < 1.0 - pnd.tail_bound - kNormEps || sum > 1.0 + kNormEps) {
    std::ostringstream os;
    os << "distribution sums to " << sum << ", outside [1 - tail_bound, 1]";
    throw std::invalid_argument(os.str());
  }
}

PhotonNumberDistribution fock_pnd(int n) {
  if (n < 0) throw std::domain_error("fock_pnd: n must be non-negative");
  PhotonNumberDistribution pnd;
  pnd.probs.assign(std::size_t(n) + 1, 0.0);
  pnd.probs[std::size_t(n)] = 1.0;
  pnd.tail_bound = 0.0;
  return pnd;
}

namespace {

double log_poisson_pmf(double mean, int n) {
  return -mean + double(n) * std::log(mean) - std::lgamma(double(n) + 1.0);
}

// Geometric bound on the Poisson tail beyond n: the term ratio past n is at
// most mean/(n+1), so P(X > n) <= p(n+1) / (1 - mean/(n+2)) once n+2 > mean.
double poisson_tail_bound(double mean, int n) {
  double r = mean / (double(n) + 2.0);
  if (r >= 1.0) return 1.0;
  return std::exp(log_poisson_pmf(mean, n + 1)) / (1.0 - r);
}

}  // namespace

PhotonNumberDistribution coherent_pnd(double alpha2, double trunc_tol) {
  if (alpha2 < 0.0)
    throw std::domain_error("coherent_pnd: alpha2 must be non-negative");
  if (!(trunc_tol > 0.0))
    throw std::domain_error("coherent_pnd: trunc_tol must be positive");
  PhotonNumberDistribution pnd;
  if (alpha2 == 0.0) {
    pnd.probs = {1.0};
    return pnd;
  }
  int n_max = 0;
  while (poisson_tail_bound(alpha2, n_max) > trunc_tol) {
    if (++n_max > kMaxEntries) truncation_overflow("coherent_pnd");
  }
  pnd.probs.resize(std::size_t(n_max) + 1);
  for (int n = 0; n <= n_max; ++n)
    pnd.probs[std::size_t(n)] = std::exp(log_poisson_pmf(alpha2, n));
  pnd.tail_bound = poisson_tail_bound(alpha2, n_max);
  return pnd;
}

PhotonNumberDistribution squeezed_vacuum_pnd(double xi, double trunc_tol) {
  if (xi < 0.0)
    throw std::domain_error("squeezed_vacuum_pnd: xi must be non-negative");
  if (!(trunc_tol > 0.0))
    throw std::domain_error("squeezed_vacuum_pnd: trunc_tol must be positive");
  PhotonNumberDistribution pnd;
  if (xi == 0.0) {
    pnd.probs = {1.0};
    return pnd;
  }
  double t2 = tanh(xi) * tanh(xi);
  double log_t2 = std::log(t2);
  double log_cosh = std::log(std::cosh(xi));
  // P(2m) = tanh^{2m} (2m)! / (cosh xi (2^m m!)^2); the ratio
  // P(2m+2)/P(2m) = tanh^2 (2m+1)/(2m+2) < tanh^2, giving a geometric tail.
  auto log_p = [&](int m) {
    return double(m) * log_t2 - log_cosh + std::lgamma(2.0 * m + 1.0) -
           2.0 * (double(m) * std::log(2.0) + std::lgamma(double(m) + 1.0));
  };
  int m_max = 0;
  auto tail = [&](int m) { return std::exp(log_p(m + 1)) / (1.0 - t2); };
  while (tail(m_max) > trunc_tol) {
    if (++m_max > kMaxEntries / 2) truncation_overflow("squeezed_vacuum_pnd");
  }
  pnd.probs.assign(std::size_t(2 * m_max) + 1, 0.0);
  for (int m = 0; m <= m_max; ++m)
    pnd.probs[std::size_t(2 * m)] = std::exp(log_p(m));
  pnd.tail_bound = tail(m_max);
  return pnd;
}

PhotonNumberDistribution odd_coherent_pnd(double alpha2, double trunc_tol) {
  if (!(alpha2 > 0.0))
    throw std::domain_error(
        "odd_coherent_pnd: alpha2 must be positive (normalization diverges "
        "at alpha2 = 0)");
  if (!(trunc_tol > 0.0))
    throw std::domain_error("odd_coherent_pnd: trunc_tol must be positive");
  // P(n) = 4 Nsq e^{-a} a^n / n! on odd n, Nsq = 1/(2(1 - e^{-2a})).
  double nsq = 1.0 / (2.0 * (-std::expm1(-2.0 * alpha2)));
  double log_scale = std::log(4.0 * nsq);
  // The odd-n tail is bounded by 4 Nsq times the Poisson tail.
  int n_max = 1;
  auto tail = [&](int n) {
    return 4.0 * nsq * poisson_tail_bound(alpha2, n);
  };
  while (tail(n_max) > trunc_tol) {
    if (++n_max > kMaxEntries) truncation_overflow("odd_coherent_pnd");
  }
  if (n_max % 2 == 0) ++n_max;  // end on an odd entry
  PhotonNumberDistribution pnd;
  pnd.probs.assign(std::size_t(n_max) + 1, 0.0);
  for (int n = 1; n <= n_max; n += 2)
    pnd.probs[std::size_t(n)] =
        std::exp(log_scale + log_poisson_pmf(alpha2, n));
  pnd.tail_bound = tail(n_max);
  return pnd;
}

namespace {

PhotonNumberDistribution pnd_from_object(const nlohmann::json& obj,
                                         double norm_tol) {
  if (!obj.is_object())
    throw std::invalid_argument("photon distribution document must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it.key() != "probabilities" && it.key() != "tail_bound")
      throw std::invalid_argument("unknown field '" + it.key() +
                                  "' in photon distribution document");
  }
  if (!obj.contains("probabilities") || !obj["probabilities"].is_array())
    throw std::invalid_argument("missing 'probabilities' array");
  const auto& arr = obj["probabilities"];
  if (arr.empty())
    throw std::invalid_argument("'probabilities' must not be empty");
  PhotonNumberDistribution pnd;
  pnd.probs.reserve(arr.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      std::ostringstream os;
      os << "entry " << i << " is not a number";
      throw std::invalid_argument(os.str());
    }
    double p = arr[i].get<double>();
    if (p < 0.0) {
      std::ostringstream os;
      os << "negative probability at index " << i << ": " << p;
      throw std::invalid_argument(os.str());
    }
    pnd.probs.push_back(p);
    sum += p;
  }
  double declared_tail = obj.value("tail_bound", 0.0);
  if (declared_tail < 0.0)
    throw std::invalid_argument("tail_bound must be non-negative");
  pnd.tail_bound = declared_tail;
  if (std::abs(sum + declared_tail - 1.0) > norm_tol) {
    std::ostringstream os;
    os << "probabilities sum to " << sum << " (tail_bound " << declared_tail
       << "), deviating from 1 by more than " << norm_tol;
    throw std::invalid_argument(os.str());
  }
  return pnd;
}

}  // namespace

PhotonNumberDistribution load_pnd(const nlohmann::json& doc, double norm_tol) {
  if (doc.is_object() && doc.contains("distribution"))
    return pnd_from_object(doc["distribution"], norm_tol);
  return pnd_from_object(doc, norm_tol);
}

PhotonNumberDistribution load_pnd_file(const std::string& path,
                                       double norm_tol) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  nlohmann::json doc;
  in >> doc;
  return load_pnd(doc, norm_tol);
}

nlohmann::json to_json(const PhotonNumberDistribution& pnd) {
  return nlohmann::json{{"probabilities", pnd.probs},
                        {"tail_bound", pnd.tail_bound}};
}

}  // namespace clickcount
