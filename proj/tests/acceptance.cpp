// Acceptance suite: one line per criterion, exit code = number of failures.
// Heavy ensembles are cached under the work directory and reused on reruns.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mqc/ensemble.hpp"
#include "mqc/gme.hpp"
#include "mqc/graph.hpp"
#include "mqc/io.hpp"
#include "mqc/steiner.hpp"
#include "support/testutil.hpp"

namespace fs = std::filesystem;
using namespace mqc;
using clock_type = std::chrono::steady_clock;

namespace {

int g_threads = 1;
fs::path g_workdir = "acceptance_work";

double elapsed(const clock_type::time_point& t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// cached ensembles

struct EnsembleSpec {
  std::string tag;
  CircuitConfig cfg;
  std::vector<ObservableRequest> requests;
  long n = 0;
  bool records = false;
};

fs::path dataset_dir(const EnsembleSpec& spec) { return g_workdir / spec.tag; }

bool dataset_cached(const EnsembleSpec& spec) {
  const fs::path dir = dataset_dir(spec);
  if (!fs::exists(dir / "manifest.json")) return false;
  try {
    Manifest manifest = Manifest::open_or_create(dir);
    for (const json& step : manifest.doc().at("steps")) {
      if (step.value("command", "") != "simulate") continue;
      if (!step.value("completed", false)) continue;
      if (step.value("n_realizations", -1L) != spec.n) continue;
      if (config_from_json(step.at("config")) == spec.cfg) return true;
    }
  } catch (const std::exception&) {
    return false;
  }
  return false;
}

void ensure_dataset(const EnsembleSpec& spec) {
  if (dataset_cached(spec)) {
    std::cerr << "  [" << spec.tag << "] cached\n";
    return;
  }
  const fs::path dir = dataset_dir(spec);
  fs::remove_all(dir);
  const auto t0 = clock_type::now();
  DatasetWriter writer(dir, spec.cfg, spec.records);
  EnsembleOptions options;
  options.n_realizations = spec.n;
  options.n_threads = g_threads;
  options.store_records = spec.records;
  long done = 0;
  run_ensemble(spec.cfg, spec.requests, options,
               [&](long, const RealizationPayload& payload) {
                 writer.write(payload);
                 if (++done % 500 == 0) {
                   const double dt = elapsed(t0);
                   std::cerr << "  [" << spec.tag << "] " << done << "/" << spec.n << "  "
                             << fmt(dt) << "s elapsed, ~"
                             << fmt(dt / done * (spec.n - done)) << "s left\n";
                 }
               });
  writer.close();
  Manifest manifest = Manifest::open_or_create(dir);
  manifest.add_step("simulate",
                    {{"config", config_to_json(spec.cfg)}, {"n_realizations", spec.n}},
                    elapsed(t0), true);
  for (const std::string& f : writer.output_files()) manifest.add_output(f);
  manifest.save();
  std::cerr << "  [" << spec.tag << "] done in " << fmt(elapsed(t0)) << "s\n";
}

// Ensemble-scale optimizer budgets; the measured value loss against the full
// defaults is below 1.5% for W and 5% for I2 at a 10-18x speedup.
OptimizerConfig ensemble_w_opt() { return {6, 150, 1e-9, true}; }
OptimizerConfig ensemble_i2_opt() { return {8, 200, 1e-9, true}; }

EnsembleSpec spec_l14(double p, bool records) {
  EnsembleSpec spec;
  std::ostringstream tag;
  tag << "l14_p" << static_cast<int>(p * 100 + 0.5);
  spec.tag = tag.str();
  spec.cfg = {14, Boundary::Open, p, 49, UnitaryFamily::Haar, {},
              1400000 + static_cast<std::uint64_t>(p * 100 + 0.5)};
  ObservableRequest w = make_request(Observable::W, 3);
  w.opt = ensemble_w_opt();
  spec.requests = {w};
  spec.n = 5000;
  spec.records = records;
  return spec;
}

EnsembleSpec spec_l16() {
  EnsembleSpec spec;
  spec.tag = "l16_p17";
  spec.cfg = {16, Boundary::Periodic, 0.17, 49, UnitaryFamily::Haar, {}, 1600017};
  ObservableRequest e = make_request(Observable::LogNegativity, 2);
  ObservableRequest w = make_request(Observable::W, 3);
  w.opt = ensemble_w_opt();
  ObservableRequest i2 = make_request(Observable::I2, 3);
  i2.opt = ensemble_i2_opt();
  spec.requests = {e, w, i2};
  spec.n = 10000;
  spec.records = false;
  return spec;
}

// ---------------------------------------------------------------------------
// criteria

bool criterion_1(std::string& detail) {
  std::ostringstream log;
  bool pass = true;

  const double e_bell = log_negativity(density_from_state(testutil::bell_pair()), {0});
  pass &= std::abs(e_bell - 1.0) <= 1e-10;
  log << "E(bell)=" << fmt(e_bell);

  Rng rng_w(1001);
  const double w_ghz =
      w_criterion(density_from_state(testutil::ghz3()), default_w_opt(), rng_w).value;
  pass &= std::abs(w_ghz - 0.5) <= 1e-6;
  log << " W(GHZ)=" << fmt(w_ghz);

  Rng rng_w4(1002);
  const double w4 =
      w4_criterion(density_from_state(testutil::w4_state()), default_w4_opt(), rng_w4).value;
  pass &= w4 >= 0.5 - 1e-6;
  log << " W4(Wstate)=" << fmt(w4);

  Rng rng_d(1003);
  const double d_prod = geometric_entanglement(
                            density_from_state(testutil::basis_state(3, 0b010)), 7,
                            default_d_opt(), rng_d)
                            .value;
  pass &= d_prod <= 1e-6;
  log << " D(|010>)=" << fmt(d_prod);

  // product / maximally mixed states give zero for every criterion
  Rng rng_z(1004);
  pass &= w_criterion(density_from_state(testutil::basis_state(3, 0)), default_w_opt(), rng_z)
              .value == 0.0;
  pass &= i2_criterion(density_from_state(testutil::basis_state(3, 0)), default_i2_opt(), rng_z)
              .value == 0.0;
  pass &= w_criterion(testutil::maximally_mixed(3), default_w_opt(), rng_z).value == 0.0;
  pass &= i2_criterion(testutil::maximally_mixed(3), default_i2_opt(), rng_z).value == 0.0;
  pass &= w4_criterion(density_from_state(testutil::basis_state(4, 0)), default_w4_opt(), rng_z)
              .value == 0.0;
  const double d_mixed =
      geometric_entanglement(testutil::maximally_mixed(3), 7, default_d_opt(), rng_z).value;
  pass &= d_mixed <= 1e-6;
  Eigen::MatrixXcd prod = kron(random_density_matrix(2, rng_z), random_density_matrix(2, rng_z));
  pass &= log_negativity({2, prod}, {0}) <= 1e-10;
  log << " D(I/8)=" << fmt(d_mixed);

  detail = log.str();
  return pass;
}

bool criterion_2(std::string& detail) {
  const int n = 1000;
  Rng sampler3(2001), sampler4(2002), opt_rng(2003);
  int w_positives = 0, i2_positives = 0, w4_positives = 0;

  for (int i = 0; i < n; ++i) {
    const ReducedDensityMatrix rho = sample_biseparable_3(sampler3);
    if (w_criterion(rho, default_w_opt(), opt_rng).value > 0.0) ++w_positives;
    if (i2_criterion(rho, default_i2_opt(), opt_rng).value > 0.0) ++i2_positives;
    if ((i + 1) % 200 == 0) std::cerr << "  [validity-3] " << i + 1 << "/" << n << "\n";
  }
  OptimizerConfig w4_opt{16, 600, 1e-9, true};  // validity only bounds from below
  for (int i = 0; i < n; ++i) {
    const ReducedDensityMatrix rho = sample_biseparable_4(sampler4);
    if (w4_criterion(rho, w4_opt, opt_rng).value > 0.0) ++w4_positives;
    if ((i + 1) % 200 == 0) std::cerr << "  [validity-4] " << i + 1 << "/" << n << "\n";
  }
  std::ostringstream log;
  log << "false positives over " << n << " samples: W=" << w_positives
      << " I2=" << i2_positives << " W4=" << w4_positives;
  detail = log.str();
  return w_positives == 0 && i2_positives == 0 && w4_positives == 0;
}

bool criterion_3(std::string& detail) {
  const int n = 100000;
  Rng rng(3001);
  double purity_sum = 0.0;
  Eigen::Matrix4d sq_mean = Eigen::Matrix4d::Zero();
  for (int s = 0; s < n; ++s) {
    const TwoQubitGate gate = sample_haar_unitary(rng);
    StateVector psi(2);
    psi.apply_two_qubit_gate(gate, 0, 1);
    const Eigen::MatrixXcd rho = partial_trace(psi, {0}).matrix;
    purity_sum += (rho * rho).trace().real();
    sq_mean += gate.matrix().cwiseAbs2();
  }
  const double purity = purity_sum / n;
  sq_mean /= n;
  const double sigma = std::sqrt(3.0 / 80.0 / n);  // var(|U_ij|^2) = 3/80
  double worst = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) worst = std::max(worst, std::abs(sq_mean(r, c) - 0.25));
  }
  std::ostringstream log;
  log << "purity=" << fmt(purity) << " (target 0.800 +- 0.005), max ||U_ij|^2 - 1/4| = "
      << fmt(worst) << " (5 sigma = " << fmt(5 * sigma) << ")";
  detail = log.str();
  return std::abs(purity - 0.800) <= 0.005 && worst <= 5 * sigma;
}

bool criterion_4(std::string& detail) {
  Rng rng(4001);
  double worst_pt = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const StateVector psi = testutil::random_state(4, rng);
    const ReducedDensityMatrix rho = partial_trace(psi, {1, 3});
    const Eigen::MatrixXcd oracle = testutil::partial_trace_oracle(psi, {1, 3});
    worst_pt = std::max(worst_pt, (rho.matrix - oracle).cwiseAbs().maxCoeff());
  }

  double worst_ln = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const StateVector psi = testutil::random_state(4, rng);
    const ReducedDensityMatrix rho = partial_trace(psi, {0, 1});
    const Eigen::MatrixXcd pt = partial_transpose(rho, {0});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt, Eigen::EigenvaluesOnly);
    double negativity = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()(i) < 0.0) negativity += 2.0 * std::abs(es.eigenvalues()(i));
    }
    worst_ln = std::max(worst_ln,
                        std::abs(log_negativity(rho, {0}) - std::log2(1.0 + negativity)));
  }

  // exact Steiner via the median-vertex oracle on 3 terminals
  int matched = 0, instances = 0;
  std::uint64_t seed = 4100;
  while (instances < 100) {
    CircuitConfig cfg{8, Boundary::Open, 0.25, 8, UnitaryFamily::Haar, {}, seed++};
    const auto res = run_realization(cfg, 0);
    const SpacetimeGraph g = SpacetimeGraph::build(res.record);
    Rng pick(seed);
    std::set<int> targets;
    while (targets.size() < 3) targets.insert(static_cast<int>(pick.below(8)));
    const std::vector<int> target_list(targets.begin(), targets.end());
    const SpanningGraph gmin = minimal_spanning_graph(g, target_list);
    if (!gmin.connected) continue;
    ++instances;

    std::vector<std::vector<int>> dist;
    for (int s : target_list) {
      std::vector<int> d(g.n_vertices(), -1);
      std::vector<int> queue{g.vertex(s, g.n_columns() - 1)};
      d[queue[0]] = 0;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        for (const auto& [nbr, edge] : g.neighbors(queue[head])) {
          if (d[nbr] == -1) {
            d[nbr] = d[queue[head]] + 1;
            queue.push_back(nbr);
          }
        }
      }
      dist.push_back(std::move(d));
    }
    int best = -1;
    for (int v = 0; v < g.n_vertices(); ++v) {
      if (dist[0][v] < 0 || dist[1][v] < 0 || dist[2][v] < 0) continue;
      const int total = dist[0][v] + dist[1][v] + dist[2][v];
      if (best == -1 || total < best) best = total;
    }
    if (gmin.edge_count == best) ++matched;
  }

  std::ostringstream log;
  log << "partial trace max dev " << fmt(worst_pt) << " (<=1e-12), negativity max dev "
      << fmt(worst_ln) << " (<=1e-10), steiner " << matched << "/100";
  detail = log.str();
  return worst_pt <= 1e-12 && worst_ln <= 1e-10 && matched == 100;
}

bool criterion_5(std::string& detail) {
  const std::vector<double> rates{0.1, 0.3, 0.7};
  std::map<double, std::map<int, SeriesPoint>> series;
  for (double p : rates) {
    const EnsembleSpec spec = spec_l14(p, p == 0.3);
    ensure_dataset(spec);
    const auto table = aggregate_values_file(dataset_dir(spec) / "values.jsonl");
    for (const auto& [key, pt] : table) {
      if (key.first == "W") series[p][key.second] = pt;
    }
  }
  const auto mean_at = [&](double p, int x) {
    const auto& m = series[p];
    const auto it = m.find(x);
    return it == m.end() ? 0.0 : it->second.mean;
  };
  const auto max_hit = [&](double p) {
    int best = 0;
    for (const auto& [x, pt] : series[p]) {
      if (pt.n_positive > 0) best = std::max(best, x);
    }
    return best;
  };

  const bool x2 = mean_at(0.3, 2) > mean_at(0.1, 2) && mean_at(0.3, 2) > mean_at(0.7, 2);
  const bool x3 = mean_at(0.3, 3) > mean_at(0.1, 3) && mean_at(0.3, 3) > mean_at(0.7, 3);
  const bool range = max_hit(0.3) > max_hit(0.1);

  std::ostringstream log;
  log << "<W>(x=2): p0.1=" << fmt(mean_at(0.1, 2)) << " p0.3=" << fmt(mean_at(0.3, 2))
      << " p0.7=" << fmt(mean_at(0.7, 2)) << "; <W>(x=3): p0.1=" << fmt(mean_at(0.1, 3))
      << " p0.3=" << fmt(mean_at(0.3, 3)) << " p0.7=" << fmt(mean_at(0.7, 3))
      << "; max hit x: p0.1=" << max_hit(0.1) << " p0.3=" << max_hit(0.3);
  detail = log.str();
  return x2 && x3 && range;
}

bool criterion_6(std::string& detail) {
  const EnsembleSpec spec = spec_l16();
  ensure_dataset(spec);
  const auto table = aggregate_values_file(dataset_dir(spec) / "values.jsonl");

  std::vector<SeriesPoint> e_series, w_series, i2_series;
  for (const auto& [key, pt] : table) {
    if (key.first == "E") e_series.push_back(pt);
    if (key.first == "W") w_series.push_back(pt);
    if (key.first == "I2") i2_series.push_back(pt);
  }

  // negativity: even separations, drop x=2 and the periodic upturn at x=8
  FitOptions e_opt;
  e_opt.parity = 0;
  e_opt.exclude_x = {2};
  e_opt.exclude_last = true;
  const FitResult e_fit = fit_power_law(e_series, e_opt);

  std::optional<FitResult> w_fit, i2_fit;
  FitOptions tri_opt;
  tri_opt.exclude_last = true;  // the largest separation is rare-event dominated
  try {
    w_fit = fit_power_law(w_series, tri_opt);
  } catch (const config_error&) {
  }
  try {
    i2_fit = fit_power_law(i2_series, tri_opt);
  } catch (const config_error&) {
  }

  std::ostringstream log;
  log << "alpha_E=" << fmt(e_fit.alpha) << " (band [4.3, 6.3], points";
  for (const FitPoint& p : e_fit.used) log << " x=" << p.x;
  log << ")";
  bool pass = e_fit.alpha >= 4.3 && e_fit.alpha <= 6.3;
  if (w_fit && i2_fit) {
    log << ", alpha_W=" << fmt(w_fit->alpha) << ", alpha_I2=" << fmt(i2_fit->alpha);
    pass = pass && w_fit->alpha >= e_fit.alpha && i2_fit->alpha >= e_fit.alpha;
  } else {
    log << ", W/I2 fits undefined";
    pass = false;
  }
  detail = log.str();
  return pass;
}

bool criterion_7(std::string& detail) {
  const EnsembleSpec spec = spec_l14(0.3, true);
  ensure_dataset(spec);
  const fs::path dir = dataset_dir(spec);

  // W rows grouped by realization
  std::map<long, std::vector<ValueRow>> rows_by_realization;
  for_each_value_row(dir / "values.jsonl", [&](ValueRow row) {
    if (row.obs == Observable::W) rows_by_realization[row.realization].push_back(std::move(row));
  });

  double sum_c = 0.0, sum_d = 0.0, sq_c = 0.0, sq_d = 0.0;
  long n_c = 0, n_d = 0;
  std::ifstream records(dir / "records.jsonl");
  if (!records) throw io_error("missing records for the graph predictivity check");
  std::string line;
  long k = 0;
  while (std::getline(records, line)) {
    const CircuitRecord record = record_from_json(json::parse(line), spec.cfg);
    const SpacetimeGraph g = SpacetimeGraph::build(record);

    // component labels once per realization
    std::vector<int> component(g.n_vertices(), -1);
    int n_components = 0;
    for (int v = 0; v < g.n_vertices(); ++v) {
      if (component[v] != -1) continue;
      std::vector<int> queue{v};
      component[v] = n_components;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        for (const auto& [nbr, edge] : g.neighbors(queue[head])) {
          if (component[nbr] == -1) {
            component[nbr] = n_components;
            queue.push_back(nbr);
          }
        }
      }
      ++n_components;
    }
    const int last = g.n_columns() - 1;
    for (const ValueRow& row : rows_by_realization[record.realization_index]) {
      bool connected = true;
      for (int s : row.positions) {
        if (!g.final_alive(s)) connected = false;
      }
      if (connected) {
        const int c0 = component[g.vertex(row.positions[0], last)];
        for (int s : row.positions) {
          if (component[g.vertex(s, last)] != c0) connected = false;
        }
      }
      if (connected) {
        sum_c += row.value;
        sq_c += row.value * row.value;
        ++n_c;
      } else {
        sum_d += row.value;
        sq_d += row.value * row.value;
        ++n_d;
      }
    }
    if (++k % 1000 == 0) std::cerr << "  [graphs] " << k << "/" << spec.n << "\n";
  }

  const double mean_c = sum_c / n_c;
  const double mean_d = sum_d / n_d;
  const double var_c = (sq_c - n_c * mean_c * mean_c) / (n_c - 1);
  const double var_d = (sq_d - n_d * mean_d * mean_d) / (n_d - 1);
  const double t = (mean_c - mean_d) / std::sqrt(var_c / n_c + var_d / n_d);

  std::ostringstream log;
  log << "<W|connected>=" << fmt(mean_c) << " (n=" << n_c << "), <W|disconnected>="
      << fmt(mean_d) << " (n=" << n_d << "), one-sided t=" << fmt(t) << " (>1.645)";
  detail = log.str();
  return mean_c > mean_d && t > 1.645;
}

bool criterion_8(std::string& detail) {
  const fs::path base = g_workdir / "determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path cfg_path = base / "config.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << json{{"n_qubits", 10},   {"boundary", "periodic"},
                {"measurement_rate", 0.3}, {"n_unitary_layers", 20},
                {"unitary_family", "haar"}, {"master_seed", 808}}
               .dump(2);
  }
  const std::string cli = MQC_CLI_PATH;
  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >> " + (base / "cli.log").string() + " 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  for (int threads : {1, 4}) {
    const fs::path data = base / ("t" + std::to_string(threads));
    if (!run("simulate --config " + cfg_path.string() + " --n 60 --out " + data.string() +
             " --threads " + std::to_string(threads) +
             " --observable \"E:(i,i+x)\" --observable \"W:(i,i+x,i+2x):1,2,3\""
             " --restarts 4 --max-iter 150")) {
      detail = "simulate failed (see " + (base / "cli.log").string() + ")";
      return false;
    }
    if (!run("fit --data " + data.string() + " --observable E --parity even") ||
        !run("fit --data " + data.string() + " --observable W")) {
      detail = "fit failed (see " + (base / "cli.log").string() + ")";
      return false;
    }
  }
  const bool csv = slurp(base / "t1" / "aggregate.csv") == slurp(base / "t4" / "aggregate.csv");
  const bool fit_e =
      slurp(base / "t1" / "fit_E_x_even.json") == slurp(base / "t4" / "fit_E_x_even.json");
  const bool fit_w = slurp(base / "t1" / "fit_W_x.json") == slurp(base / "t4" / "fit_W_x.json");
  const bool values =
      slurp(base / "t1" / "values.jsonl") == slurp(base / "t4" / "values.jsonl");
  std::ostringstream log;
  log << "bytes identical across 1 vs 4 threads: csv=" << csv << " fit_E=" << fit_e
      << " fit_W=" << fit_w << " values=" << values;
  detail = log.str();
  return csv && fit_e && fit_w && values;
}

struct Criterion {
  int id;
  std::string name;
  bool (*run)(std::string&);
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workdir" && i + 1 < argc) {
      g_workdir = argv[++i];
    } else if (arg == "--threads" && i + 1 < argc) {
      g_threads = std::atoi(argv[++i]);
    } else if (arg == "--only" && i + 1 < argc) {
      std::istringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--workdir DIR] [--threads N] [--only 1,2,...]\n";
      return 64;
    }
  }
  if (g_threads <= 0) {
    if (const char* env = std::getenv("MQC_THREADS")) g_threads = std::atoi(env);
  }
  if (g_threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    g_threads = hw > 0 ? static_cast<int>(hw) : 1;
  }
  fs::create_directories(g_workdir);

  const std::vector<Criterion> criteria{
      {1, "analytic unit oracles", criterion_1},
      {2, "biseparable validity suites (no false positives)", criterion_2},
      {3, "haar moments", criterion_3},
      {4, "oracle equivalences (partial trace, negativity, steiner)", criterion_4},
      {5, "qualitative W scan at L=14 (p=0.3 dominates)", criterion_5},
      {6, "critical exponents at L=16 (alpha_E band and ordering)", criterion_6},
      {7, "graph predictivity (connected spanning graph implies higher W)", criterion_7},
      {8, "pipeline determinism across thread counts", criterion_8},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = clock_type::now();
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << " ["
              << fmt(elapsed(t0)) << "s]\n      " << detail << "\n";
    std::cout.flush();
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << "\n";
  return failures;
}
