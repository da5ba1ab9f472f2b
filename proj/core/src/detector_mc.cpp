#include "clickcount/detector_mc.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace clickcount {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform double in [0,1) with fully specified bit usage, so results do not
// depend on library distribution internals.
double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

std::size_t draw_index(const std::vector<double>& cdf, double total,
                       std::mt19937_64& rng) {
  double u = uniform01(rng) * total;
  std::size_t lo = 0, hi = cdf.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cdf[mid] > u)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace

ClickDistribution SimResult::empirical() const {
  ClickDistribution dist;
  dist.n_detectors = static_cast<int>(counts.size()) - 1;
  dist.probs.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    dist.probs[k] = double(counts[k]) / double(samples);
  return dist;
}

SimResult simulate_clicks(const PhotonNumberDistribution& pnd,
                          const DetectorConfig& cfg, const SimOptions& opts) {
  cfg.validate();
  validate(pnd);
  if (opts.samples < 1)
    throw std::invalid_argument("samples must be >= 1");
  if (opts.shards < 1)
    throw std::invalid_argument("shards must be >= 1");
  const int n_det = cfg.n_detectors;

  std::vector<double> pnd_cdf(pnd.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pnd.probs.size(); ++i) {
    acc += pnd.probs[i];
    pnd_cdf[i] = acc;
  }
  const double pnd_total = acc;

  std::vector<double> weight_cdf;
  double weight_total = 0.0;
  if (cfg.weights) {
    weight_cdf.resize(cfg.weights->size());
    for (std::size_t i = 0; i < cfg.weights->size(); ++i) {
      weight_total += (*cfg.weights)[i];
      weight_cdf[i] = weight_total;
    }
  }

  const double dark_prob = -std::expm1(-cfg.nu);

  SimResult result;
  result.samples = opts.samples;
  result.seed = opts.seed;
  result.counts.assign(std::size_t(n_det) + 1, 0);

  std::vector<std::uint8_t> clicked;
  clicked.resize(std::size_t(n_det));
  const std::uint64_t base = opts.samples / std::uint64_t(opts.shards);
  const std::uint64_t rem = opts.samples % std::uint64_t(opts.shards);
  for (int shard = 0; shard < opts.shards; ++shard) {
    std::uint64_t shard_samples = base + (std::uint64_t(shard) < rem ? 1 : 0);
    std::mt19937_64 rng(splitmix64(opts.seed ^ splitmix64(std::uint64_t(shard))));
    for (std::uint64_t s = 0; s < shard_samples; ++s) {
      std::fill(clicked.begin(), clicked.end(), std::uint8_t(0));
      auto n = static_cast<int>(draw_index(pnd_cdf, pnd_total, rng));
      for (int ph = 0; ph < n; ++ph) {
        if (cfg.eta < 1.0 && uniform01(rng) >= cfg.eta) continue;
        std::size_t det;
        if (cfg.weights)
          det = draw_index(weight_cdf, weight_total, rng);
        else
          det = std::min(std::size_t(n_det) - 1,
                         std::size_t(uniform01(rng) * n_det));
        clicked[det] = 1;
      }
      if (dark_prob > 0.0) {
        for (int i = 0; i < n_det; ++i)
          if (!clicked[std::size_t(i)] && uniform01(rng) < dark_prob)
            clicked[std::size_t(i)] = 1;
      }
      int k = 0;
      for (int i = 0; i < n_det; ++i) k += clicked[std::size_t(i)];
      ++result.counts[std::size_t(k)];
    }
  }
  return result;
}

ClickDistribution exact_dp_oracle(const PhotonNumberDistribution& pnd,
                                  const DetectorConfig& cfg,
                                  std::uint64_t work_budget) {
  cfg.validate();
  validate(pnd);
  if (!cfg.uniform())
    throw std::invalid_argument(
        "exact_dp_oracle: uniform splitting weights required");
  const int n_det = cfg.n_detectors;
  const int n_max = pnd.n_max();
  const std::uint64_t work = std::uint64_t(n_det) * std::uint64_t(n_max + 1) *
                             std::uint64_t(n_max + 1);
  if (work > work_budget) {
    std::ostringstream os;
    os << "exact_dp_oracle: required work " << work << " exceeds budget "
       << work_budget;
    throw ResourceError(os.str());
  }
  const double no_reg = 1.0 - cfg.eta;
  const double no_dark = std::exp(-cfg.nu);

  // f[r][c]: probability of r photons still unrouted and c clicks so far.
  auto idx = [&](int r, int c) {
    return std::size_t(r) * std::size_t(n_det + 1) + std::size_t(c);
  };
  std::vector<double> f(std::size_t(n_max + 1) * std::size_t(n_det + 1), 0.0);
  std::vector<double> g(f.size());
  for (int r = 0; r <= n_max; ++r) f[idx(r, 0)] = pnd.probs[std::size_t(r)];

  std::vector<double> binom;  // pmf of Binomial(r, 1/remaining)
  for (int i = 0; i < n_det; ++i) {
    const int remaining = n_det - i;
    const double p = 1.0 / double(remaining);
    std::fill(g.begin(), g.end(), 0.0);
    for (int r = 0; r <= n_max; ++r) {
      // Binomial(r, p) by the stable ratio recurrence.
      binom.assign(std::size_t(r) + 1, 0.0);
      binom[0] = std::pow(1.0 - p, r);
      if (remaining == 1) {
        std::fill(binom.begin(), binom.end(), 0.0);
        binom[std::size_t(r)] = 1.0;
      } else {
        for (int m = 1; m <= r; ++m)
          binom[std::size_t(m)] = binom[std::size_t(m) - 1] *
                                  double(r - m + 1) / double(m) * p /
                                  (1.0 - p);
      }
      for (int c = 0; c <= n_det; ++c) {
        const double fr = f[idx(r, c)];
        if (fr == 0.0) continue;
        for (int m = 0; m <= r; ++m) {
          const double pm = fr * binom[std::size_t(m)];
          if (pm == 0.0) continue;
          const double silent = std::pow(no_reg, m) * no_dark;
          g[idx(r - m, c)] += pm * silent;
          if (c + 1 <= n_det) g[idx(r - m, c + 1)] += pm * (1.0 - silent);
        }
      }
    }
    f.swap(g);
  }

  ClickDistribution dist;
  dist.n_detectors = n_det;
  dist.probs.assign(std::size_t(n_det) + 1, 0.0);
  for (int c = 0; c <= n_det; ++c) dist.probs[std::size_t(c)] = f[idx(0, c)];
  return dist;
}

std::pair<double, double> compare_distributions(const ClickDistribution& a,
                                                const ClickDistribution& b,
                                                std::uint64_t samples) {
  if (a.n_detectors != b.n_detectors)
    throw std::invalid_argument(
        "compare_distributions: detector counts differ");
  double tv = 0.0;
  for (std::size_t k = 0; k < a.probs.size(); ++k)
    tv += std::abs(a.probs[k] - b.probs[k]);
  tv *= 0.5;

  double chi2 = 0.0;
  if (samples == 0) {
    for (std::size_t k = 0; k < a.probs.size(); ++k) {
      if (b.probs[k] > 0.0) {
        double d = a.probs[k] - b.probs[k];
        chi2 += d * d / b.probs[k];
      }
    }
  } else {
    // Pool adjacent cells until the expected count reaches 5.
    double obs = 0.0, exp_p = 0.0;
    double last_obs = 0.0, last_exp = 0.0;
    bool have_cell = false;
    for (std::size_t k = 0; k < a.probs.size(); ++k) {
      obs += a.probs[k];
      exp_p += b.probs[k];
      if (double(samples) * exp_p >= 5.0) {
        double d = (obs - exp_p) * double(samples);
        chi2 += d * d / (exp_p * double(samples));
        last_obs = obs;
        last_exp = exp_p;
        have_cell = true;
        obs = 0.0;
        exp_p = 0.0;
      }
    }
    if (exp_p > 0.0 || obs > 0.0) {
      if (have_cell) {
        // fold the undersized remainder into the previous cell
        double d = (last_obs + obs - last_exp - exp_p) * double(samples);
        double dd = (last_obs - last_exp) * double(samples);
        chi2 -= dd * dd / (last_exp * double(samples));
        chi2 += d * d / ((last_exp + exp_p) * double(samples));
      } else if (exp_p > 0.0) {
        double d = (obs - exp_p) * double(samples);
        chi2 += d * d / (exp_p * double(samples));
      }
    }
  }
  return {tv, chi2};
}

}  // namespace clickcount
