// clickstat: click-counting statistics of photon-number-resolving detectors
// built from N on/off detectors, and their comparison against ideal Mandel
// photo-counting statistics.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clickcount/click_kernel.hpp"
#include "clickcount/detector_mc.hpp"
#include "clickcount/errors.hpp"
#include "clickcount/photon_states.hpp"

namespace cc = clickcount;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
  }
  void add(const std::string& key, double value) { add(key, fmt(value)); }
  void add(const std::string& key, long long value) {
    add(key, std::to_string(value));
  }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_output(const std::string& path, const std::string& format,
                  const Manifest& manifest, const Table& table,
                  const cc::PhotonNumberDistribution* dist_for_json) {
  std::ostringstream out;
  if (format == "json") {
    nlohmann::json doc;
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : manifest.entries) m[k] = v;
    doc["manifest"] = m;
    doc["columns"] = table.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) rows.push_back(row);
    doc["rows"] = rows;
    if (dist_for_json) doc["distribution"] = cc::to_json(*dist_for_json);
    out << doc.dump(2) << "\n";
  } else {
    for (const auto& [k, v] : manifest.entries) out << "# " << k << "=" << v << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << row[i];
      out << "\n";
    }
  }
  if (path.empty() || path == "-") {
    std::cout << out.str();
  } else {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot write output file: " + path);
    f << out.str();
  }
}

struct StateSpec {
  std::string raw;
  std::string kind;
  double param = 0.0;
  std::string path;
};

StateSpec parse_state(const std::string& raw) {
  StateSpec s;
  s.raw = raw;
  auto pos = raw.find(':');
  if (pos == std::string::npos)
    throw std::invalid_argument("state spec must be kind:param, got '" + raw + "'");
  s.kind = raw.substr(0, pos);
  std::string arg = raw.substr(pos + 1);
  if (s.kind == "file") {
    s.path = arg;
    return s;
  }
  if (s.kind != "fock" && s.kind != "coherent" && s.kind != "squeezed" &&
      s.kind != "odd")
    throw std::invalid_argument("unknown state kind '" + s.kind +
                                "' (expected fock/coherent/squeezed/odd/file)");
  try {
    s.param = std::stod(arg);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad state parameter '" + arg + "'");
  }
  return s;
}

cc::PhotonNumberDistribution make_state(const StateSpec& s, double trunc_tol) {
  if (s.kind == "fock") {
    double ip;
    if (std::modf(s.param, &ip) != 0.0 || s.param < 0)
      throw std::invalid_argument("fock state needs a non-negative integer n");
    return cc::fock_pnd(static_cast<int>(s.param));
  }
  if (s.kind == "coherent") return cc::coherent_pnd(s.param, trunc_tol);
  if (s.kind == "squeezed") return cc::squeezed_vacuum_pnd(s.param, trunc_tol);
  if (s.kind == "odd") return cc::odd_coherent_pnd(s.param, trunc_tol);
  return cc::load_pnd_file(s.path);
}

struct DetectorOpts {
  int detectors = 0;
  int steps = -1;
  int array = -1;
  double eta = 1.0;
  double nu = 0.0;
  std::optional<double> nu_total;

  int resolve_n() const {
    int given = (detectors > 0) + (steps >= 0) + (array > 0);
    if (given != 1)
      throw std::invalid_argument(
          "give exactly one of --detectors, --steps, --array");
    if (detectors > 0) return detectors;
    if (steps >= 0) {
      if (steps > 30) throw std::invalid_argument("--steps too large");
      return 1 << steps;
    }
    return array * array;
  }

  cc::DetectorConfig config() const {
    cc::DetectorConfig cfg;
    cfg.n_detectors = resolve_n();
    cfg.eta = eta;
    cfg.nu = nu_total ? *nu_total / double(cfg.n_detectors) : nu;
    cfg.validate();
    return cfg;
  }

  // Total noise exponent for the Mandel reference: N detectors at nu each.
  double mandel_nu(int n) const { return nu_total ? *nu_total : nu * n; }
};

void add_detector_opts(CLI::App* cmd, DetectorOpts& d) {
  cmd->add_option("--detectors", d.detectors, "number of on/off detectors N");
  cmd->add_option("--steps", d.steps, "multiplexing steps s, N = 2^s");
  cmd->add_option("--array", d.array, "array side d, N = d^2");
  cmd->add_option("--eta", d.eta, "quantum efficiency in [0,1]");
  auto* nu_opt = cmd->add_option("--nu", d.nu, "per-detector noise exponent");
  cmd->add_option("--nu-total", d.nu_total,
                  "total noise exponent, split as nu/N per detector")
      ->excludes(nu_opt);
}

void add_manifest_common(Manifest& m, const std::string& command) {
  m.add("command", command);
  m.add("version", std::string(cc::kVersion));
}

void add_diag(Manifest& m, const cc::StabilityDiagnostics& diag) {
  m.add("clamped_entries", (long long)diag.clamped);
  m.add("worst_negative", diag.worst_negative);
  m.add("fallback_evals", (long long)diag.fallback_evals);
}

// ---- subcommand drivers ----

struct CommonOpts {
  std::string output;
  std::string format = "csv";
  double trunc_tol = 1e-12;
};

void run_clicks(const CommonOpts& common, const std::string& state_raw,
                const DetectorOpts& det, const std::string& preset) {
  Manifest m;
  add_manifest_common(m, "clicks");
  Table t;
  cc::StabilityDiagnostics diag;
  cc::PhotonNumberDistribution json_dist;

  if (!preset.empty()) {
    m.add("preset", preset);
    if (preset.rfind("fig2", 0) == 0) {
      int n_det = 0;
      if (preset == "fig2a") n_det = 10;
      else if (preset == "fig2b") n_det = 100;
      else if (preset == "fig2c") n_det = 1000;
      else if (preset == "fig2d") n_det = 10000;
      else throw std::invalid_argument("unknown preset '" + preset + "'");
      cc::DetectorConfig cfg{n_det, 1.0, 0.0, {}};
      m.add("state", std::string("fock:8,fock:9"));
      m.add("n_detectors", (long long)n_det);
      m.add("eta", 1.0);
      m.add("nu", 0.0);
      auto p8 = cc::click_distribution(cc::fock_pnd(8), cfg, &diag);
      auto p9 = cc::click_distribution(cc::fock_pnd(9), cfg, &diag);
      t.columns = {"k", "p_k_n8", "p_k_n9"};
      for (int k = 0; k <= n_det; ++k)
        t.rows.push_back({std::to_string(k), fmt(p8.probs[std::size_t(k)]),
                          fmt(p9.probs[std::size_t(k)])});
      add_diag(m, diag);
      write_output(common.output, common.format, m, t, nullptr);
      return;
    }
    if (preset == "fig3a") {
      auto pnd = cc::squeezed_vacuum_pnd(1.0, common.trunc_tol);
      m.add("state", std::string("squeezed:1"));
      t.columns = {"n", "p_n"};
      for (int n = 0; n <= pnd.n_max(); ++n)
        t.rows.push_back({std::to_string(n), fmt(pnd.probs[std::size_t(n)])});
      write_output(common.output, common.format, m, t, &pnd);
      return;
    }
    if (preset.rfind("fig3", 0) == 0) {
      int steps = 0;
      if (preset == "fig3b") steps = 3;
      else if (preset == "fig3c") steps = 4;
      else if (preset == "fig3d") steps = 5;
      else throw std::invalid_argument("unknown preset '" + preset + "'");
      int n_det = 1 << steps;
      cc::DetectorConfig cfg{n_det, 1.0, 0.0, {}};
      m.add("state", std::string("squeezed:1"));
      m.add("n_detectors", (long long)n_det);
      m.add("eta", 1.0);
      m.add("nu", 0.0);
      auto pnd = cc::squeezed_vacuum_pnd(1.0, common.trunc_tol);
      auto dist = cc::click_distribution(pnd, cfg, &diag);
      t.columns = {"k", "p_k"};
      for (int k = 0; k <= n_det; ++k)
        t.rows.push_back({std::to_string(k), fmt(dist.probs[std::size_t(k)])});
      add_diag(m, diag);
      write_output(common.output, common.format, m, t, nullptr);
      return;
    }
    throw std::invalid_argument("unknown preset '" + preset + "'");
  }

  if (state_raw.empty())
    throw std::invalid_argument("--state is required (or use --preset)");
  auto spec = parse_state(state_raw);
  auto pnd = make_state(spec, common.trunc_tol);
  auto cfg = det.config();
  m.add("state", state_raw);
  m.add("n_detectors", (long long)cfg.n_detectors);
  m.add("eta", cfg.eta);
  m.add("nu", cfg.nu);
  m.add("tail_bound", pnd.tail_bound);
  cc::ClickDistribution dist;
  if (spec.kind == "coherent")
    dist = cc::coherent_click_distribution(spec.param, cfg);
  else
    dist = cc::click_distribution(pnd, cfg, &diag);
  t.columns = {"k", "p_k"};
  for (int k = 0; k <= cfg.n_detectors; ++k)
    t.rows.push_back({std::to_string(k), fmt(dist.probs[std::size_t(k)])});
  add_diag(m, diag);
  json_dist.probs = dist.probs;
  json_dist.tail_bound = pnd.tail_bound;
  write_output(common.output, common.format, m, t, &json_dist);
}

void run_compare(const CommonOpts& common, const std::string& state_raw,
                 const DetectorOpts& det, const std::string& preset,
                 std::optional<double> alpha2) {
  Manifest m;
  add_manifest_common(m, "compare");
  Table t;
  cc::StabilityDiagnostics diag;

  if (preset == "fig4") {
    if (!alpha2)
      throw std::invalid_argument(
          "--preset fig4 requires --alpha2: the odd-coherent amplitude is a "
          "free parameter");
    m.add("preset", preset);
    m.add("state", "odd:" + fmt(*alpha2));
    const int n_det = 25;
    m.add("n_detectors", (long long)n_det);
    auto pnd = cc::odd_coherent_pnd(*alpha2, common.trunc_tol);
    struct Scenario { const char* name; double eta; double nu; };
    const Scenario scenarios[] = {{"perfect", 1.0, 0.0},
                                  {"loss", 0.8, 0.0},
                                  {"noise", 1.0, 0.008},
                                  {"loss+noise", 0.8, 0.008}};
    t.columns = {"scenario", "k", "p_click", "p_mandel"};
    for (const auto& sc : scenarios) {
      cc::DetectorConfig cfg{n_det, sc.eta, sc.nu, {}};
      auto click = cc::click_distribution(pnd, cfg, &diag);
      auto mandel = cc::mandel_distribution(pnd, sc.eta, sc.nu * n_det);
      std::size_t len = std::max(click.probs.size(), mandel.size());
      for (std::size_t k = 0; k < len; ++k) {
        double pc = k < click.probs.size() ? click.probs[k] : 0.0;
        double pm = k < mandel.size() ? mandel[k] : 0.0;
        t.rows.push_back({sc.name, std::to_string(k), fmt(pc), fmt(pm)});
      }
    }
    add_diag(m, diag);
    write_output(common.output, common.format, m, t, nullptr);
    return;
  }
  if (!preset.empty())
    throw std::invalid_argument("unknown preset '" + preset + "'");

  if (state_raw.empty()) throw std::invalid_argument("--state is required");
  auto spec = parse_state(state_raw);
  auto pnd = make_state(spec, common.trunc_tol);
  auto cfg = det.config();
  double nu_total = det.mandel_nu(cfg.n_detectors);
  m.add("state", state_raw);
  m.add("n_detectors", (long long)cfg.n_detectors);
  m.add("eta", cfg.eta);
  m.add("nu", cfg.nu);
  m.add("mandel_nu_total", nu_total);
  auto click = cc::click_distribution(pnd, cfg, &diag);
  auto mandel = cc::mandel_distribution(pnd, cfg.eta, nu_total);
  t.columns = {"k", "p_click", "p_mandel"};
  std::size_t len = std::max(click.probs.size(), mandel.size());
  for (std::size_t k = 0; k < len; ++k) {
    double pc = k < click.probs.size() ? click.probs[k] : 0.0;
    double pm = k < mandel.size() ? mandel[k] : 0.0;
    t.rows.push_back({std::to_string(k), fmt(pc), fmt(pm)});
  }
  add_diag(m, diag);
  write_output(common.output, common.format, m, t, nullptr);
}

void run_qscan(const CommonOpts& common, double alpha2, int n_max_det,
               const std::string& preset) {
  if (preset == "fig5") {
    alpha2 = 20.0;
    n_max_det = 1024;
  } else if (!preset.empty()) {
    throw std::invalid_argument("unknown preset '" + preset + "'");
  }
  if (!(alpha2 > 0.0))
    throw std::invalid_argument("--alpha2 must be positive");
  Manifest m;
  add_manifest_common(m, "qscan");
  if (!preset.empty()) m.add("preset", preset);
  m.add("alpha2", alpha2);
  m.add("n_max", (long long)n_max_det);
  Table t;
  t.columns = {"N", "q_closed", "q_dist"};
  for (int n = 1; n <= n_max_det; ++n) {
    cc::DetectorConfig cfg{n, 1.0, 0.0, {}};
    auto dist = cc::coherent_click_distribution(alpha2, cfg);
    double qd = cc::mandel_q(dist.probs);
    double qc = cc::coherent_click_q_closed(alpha2, n);
    t.rows.push_back({std::to_string(n), fmt(qc), fmt(qd)});
  }
  write_output(common.output, common.format, m, t, nullptr);
}

void run_simulate(const CommonOpts& common, const std::string& state_raw,
                  const DetectorOpts& det, std::uint64_t samples,
                  std::uint64_t seed, int shards) {
  if (state_raw.empty()) throw std::invalid_argument("--state is required");
  auto spec = parse_state(state_raw);
  auto pnd = make_state(spec, common.trunc_tol);
  auto cfg = det.config();
  cc::SimOptions opts{samples, seed, shards};
  cc::StabilityDiagnostics diag;
  auto sim = cc::simulate_clicks(pnd, cfg, opts);
  auto analytic = cc::click_distribution(pnd, cfg, &diag);
  auto empirical = sim.empirical();
  auto [tv, chi2] = cc::compare_distributions(empirical, analytic, samples);

  Manifest m;
  add_manifest_common(m, "simulate");
  m.add("state", state_raw);
  m.add("n_detectors", (long long)cfg.n_detectors);
  m.add("eta", cfg.eta);
  m.add("nu", cfg.nu);
  m.add("samples", (long long)samples);
  m.add("seed", (long long)seed);
  m.add("shards", (long long)shards);
  m.add("tv_distance", tv);
  m.add("chi2", chi2);
  add_diag(m, diag);
  Table t;
  t.columns = {"k", "count", "p_empirical", "p_analytic"};
  for (int k = 0; k <= cfg.n_detectors; ++k)
    t.rows.push_back({std::to_string(k),
                      std::to_string(sim.counts[std::size_t(k)]),
                      fmt(empirical.probs[std::size_t(k)]),
                      fmt(analytic.probs[std::size_t(k)])});
  write_output(common.output, common.format, m, t, nullptr);
}

void run_povm(const CommonOpts& common, const DetectorOpts& det, int n_max) {
  auto cfg = det.config();
  if (n_max < 0) throw std::invalid_argument("--n-max must be >= 0");
  cc::StabilityDiagnostics diag;
  auto povm = cc::povm_fock_matrix(cfg, n_max, &diag);
  Manifest m;
  add_manifest_common(m, "povm");
  m.add("n_detectors", (long long)cfg.n_detectors);
  m.add("eta", cfg.eta);
  m.add("nu", cfg.nu);
  m.add("n_max", (long long)n_max);
  add_diag(m, diag);
  Table t;
  t.columns = {"k"};
  for (int n = 0; n <= n_max; ++n) t.columns.push_back("n" + std::to_string(n));
  for (int k = 0; k <= cfg.n_detectors; ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (int n = 0; n <= n_max; ++n)
      row.push_back(fmt(povm.coeffs[std::size_t(k)][std::size_t(n)]));
    t.rows.push_back(std::move(row));
  }
  write_output(common.output, common.format, m, t, nullptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"click-counting statistics of multiplexed on/off detectors"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string state_raw;
  std::string preset;
  DetectorOpts det;
  std::optional<double> alpha2_opt;
  double alpha2 = 0.0;
  int n_max_det = 1024;
  int n_max = 10;
  std::uint64_t samples = 100000, seed = 0;
  int shards = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-o,--output", common.output, "output file (default stdout)");
    cmd->add_option("--format", common.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--trunc-tol", common.trunc_tol,
                    "photon-number truncation tolerance");
  };

  auto* clicks = app.add_subcommand("clicks", "click-counting distribution p_k");
  clicks->add_option("--state", state_raw, "state spec kind:param");
  add_detector_opts(clicks, det);
  clicks->add_option("--preset", preset, "fig2a..fig2d, fig3a..fig3d");
  add_common(clicks);

  auto* compare = app.add_subcommand(
      "compare", "click distribution vs Mandel photo-counting reference");
  compare->add_option("--state", state_raw, "state spec kind:param");
  add_detector_opts(compare, det);
  compare->add_option("--preset", preset, "fig4 (requires --alpha2)");
  compare->add_option("--alpha2", alpha2_opt, "odd-coherent amplitude for fig4");
  add_common(compare);

  auto* qscan = app.add_subcommand(
      "qscan", "Mandel Q of coherent clicks vs number of detectors");
  qscan->add_option("--alpha2", alpha2, "coherent mean photon number");
  qscan->add_option("--n-max", n_max_det, "scan N = 1..n-max");
  qscan->add_option("--preset", preset, "fig5");
  add_common(qscan);

  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo detector simulation vs analytic distribution");
  simulate->add_option("--state", state_raw, "state spec kind:param");
  add_detector_opts(simulate, det);
  simulate->add_option("--samples", samples, "number of samples");
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--shards", shards, "number of sample shards");
  add_common(simulate);

  auto* povm = app.add_subcommand("povm", "Fock-diagonal POVM matrix c_{k|n}");
  add_detector_opts(povm, det);
  povm->add_option("--n-max", n_max, "largest Fock state column");
  add_common(povm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (clicks->parsed()) run_clicks(common, state_raw, det, preset);
    else if (compare->parsed()) run_compare(common, state_raw, det, preset, alpha2_opt);
    else if (qscan->parsed()) run_qscan(common, alpha2, n_max_det, preset);
    else if (simulate->parsed()) run_simulate(common, state_raw, det, samples, seed, shards);
    else if (povm->parsed()) run_povm(common, det, n_max);
  } catch (const cc::StabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cc::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
