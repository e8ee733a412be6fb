#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "mqc/ensemble.hpp"
#include "mqc/graph.hpp"
#include "mqc/io.hpp"
#include "mqc/steiner.hpp"
#include "mqc/version.hpp"

namespace fs = std::filesystem;

namespace {

using namespace mqc;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("MQC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::string token;
  for (char c : text + ",") {
    if (c == ',') {
      if (!token.empty()) {
        try {
          out.push_back(std::stoi(token));
        } catch (const std::exception&) {
          throw config_error("bad integer '" + token + "' in list '" + text + "'");
        }
        token.clear();
      }
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      token.push_back(c);
    }
  }
  return out;
}

// "(i,i+x)" -> 2 parties, "(i,i+x,i+2x)" -> 3, "(i,i+x,i+2x,i+3x)" -> 4.
int parties_from_positions_spec(const std::string& raw) {
  std::string spec;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) spec.push_back(c);
  }
  if (spec.size() < 2 || spec.front() != '(' || spec.back() != ')') {
    throw config_error("positions spec must look like \"(i,i+x,i+2x)\", got '" + raw + "'");
  }
  std::vector<std::string> tokens;
  std::string token;
  for (char c : spec.substr(1, spec.size() - 2) + ",") {
    if (c == ',') {
      tokens.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (tokens.empty() || tokens[0] != "i") {
    throw config_error("positions spec must start with 'i'");
  }
  for (std::size_t q = 1; q < tokens.size(); ++q) {
    const std::string want = q == 1 ? "i+x" : "i+" + std::to_string(q) + "x";
    if (tokens[q] != want) {
      throw config_error("positions spec token '" + tokens[q] + "' should be '" + want + "'");
    }
  }
  if (tokens.size() < 2 || tokens.size() > 4) {
    throw config_error("positions spec supports 2 to 4 parties");
  }
  return static_cast<int>(tokens.size());
}

// "W:(i,i+x,i+2x)" or "E:(i,i+x):2,4,6"
ObservableRequest parse_observable_spec(const std::string& text) {
  const std::size_t first = text.find(':');
  if (first == std::string::npos) {
    throw config_error("observable spec must look like \"W:(i,i+x,i+2x)\", got '" + text + "'");
  }
  const std::string code = text.substr(0, first);
  std::string rest = text.substr(first + 1);
  std::vector<int> xs;
  const std::size_t close = rest.find(')');
  if (close == std::string::npos) throw config_error("positions spec missing ')'");
  if (close + 1 < rest.size()) {
    if (rest[close + 1] != ':') throw config_error("expected ':' before the x list");
    xs = parse_int_list(rest.substr(close + 2));
    rest = rest.substr(0, close + 1);
  }
  const Observable obs = observable_from_code(code);
  const int parties = parties_from_positions_spec(rest);
  return make_request(obs, parties, xs);
}

struct OptimizerOverrides {
  int restarts = 0;
  int max_iterations = 0;
  double tolerance = 0.0;

  void apply(OptimizerConfig& cfg) const {
    if (restarts > 0) cfg.n_restarts = restarts;
    if (max_iterations > 0) cfg.max_iterations = max_iterations;
    if (tolerance > 0.0) cfg.tolerance = tolerance;
  }
};

struct Preset {
  std::string name;
  std::string note;
  CircuitConfig cfg;
  std::vector<std::string> observables;
};

std::vector<Preset> presets() {
  std::vector<Preset> out;
  {
    Preset p;
    p.name = "w-scan-obc18";
    p.note = "L=18 open chain, 3-spin W criterion over all separations";
    p.cfg = {18, Boundary::Open, 0.3, 49, UnitaryFamily::Haar, {}, 1};
    p.observables = {"W:(i,i+x,i+2x)"};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "negativity-pbc24";
    p.note = "L=24 periodic chain, 2-spin log negativity over all separations";
    p.cfg = {24, Boundary::Periodic, 0.17, 49, UnitaryFamily::Haar, {}, 1};
    p.observables = {"E:(i,i+x)"};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "gme-scan-pbc24";
    p.note = "L=24 periodic chain, W and I2 criteria for 3 spins";
    p.cfg = {24, Boundary::Periodic, 0.17, 49, UnitaryFamily::Haar, {}, 1};
    p.observables = {"W:(i,i+x,i+2x)", "I2:(i,i+x,i+2x)"};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "critical-pbc16";
    p.note = "L=16 periodic chain near the critical rate: negativity, W, I2";
    p.cfg = {16, Boundary::Periodic, 0.17, 49, UnitaryFamily::Haar, {}, 1};
    p.observables = {"E:(i,i+x)", "W:(i,i+x,i+2x)", "I2:(i,i+x,i+2x)"};
    out.push_back(p);
  }
  return out;
}

json describe_requests(const std::vector<ObservableRequest>& requests) {
  json arr = json::array();
  for (const ObservableRequest& r : requests) {
    arr.push_back({{"observable", observable_code(r.obs)},
                   {"parties", r.n_parties},
                   {"x", r.x_values},
                   {"restarts", r.opt.n_restarts},
                   {"max_iterations", r.opt.max_iterations},
                   {"tolerance", r.opt.tolerance}});
  }
  return arr;
}

long realization_count_from_manifest(const Manifest& manifest) {
  long n = -1;
  for (const json& step : manifest.doc().at("steps")) {
    if (step.value("command", "") == "simulate") n = step.value("n_realizations", -1L);
  }
  if (n < 0) throw io_error("dataset manifest has no simulate step; cannot infer size");
  return n;
}

int cmd_simulate(const std::string& config_path, const std::string& preset_name, long n,
                 const std::string& out_dir, int threads,
                 const std::vector<std::string>& observable_specs, double p_override,
                 std::int64_t seed_override, int layers_override, bool no_records,
                 bool time_resolved, const OptimizerOverrides& overrides,
                 const std::string& command_line) {
  CircuitConfig cfg;
  std::vector<std::string> specs = observable_specs;
  if (!preset_name.empty()) {
    bool found = false;
    for (const Preset& p : presets()) {
      if (p.name == preset_name) {
        cfg = p.cfg;
        if (specs.empty()) specs = p.observables;
        found = true;
        break;
      }
    }
    if (!found) throw config_error("unknown preset '" + preset_name + "'");
  } else if (!config_path.empty()) {
    cfg = load_config_file(config_path);
  } else {
    throw config_error("simulate needs --config or --preset");
  }
  if (p_override >= 0.0) cfg.measurement_rate = p_override;
  if (seed_override >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed_override);
  if (layers_override > 0) cfg.n_unitary_layers = layers_override;
  cfg.validate();

  std::vector<ObservableRequest> requests;
  for (const std::string& spec : specs) {
    ObservableRequest req = parse_observable_spec(spec);
    overrides.apply(req.opt);
    requests.push_back(std::move(req));
  }

  EnsembleOptions options;
  options.n_realizations = n;
  options.n_threads = resolve_threads(threads);
  options.store_records = !no_records;
  options.time_resolved = time_resolved;

  const auto t0 = std::chrono::steady_clock::now();
  DatasetWriter writer(out_dir, cfg, options.store_records);
  try {
    run_ensemble(cfg, requests, options,
                 [&](long, const RealizationPayload& payload) { writer.write(payload); });
    writer.close();
  } catch (...) {
    writer.close();
    write_partial_marker(out_dir, "simulate aborted");
    Manifest manifest = Manifest::open_or_create(out_dir);
    manifest.add_step("simulate",
                      {{"config", config_to_json(cfg)},
                       {"n_realizations", n},
                       {"observables", describe_requests(requests)},
                       {"argv", command_line}},
                      seconds_since(t0), false);
    for (const std::string& f : writer.output_files()) manifest.add_output(f);
    manifest.add_output("PARTIAL");
    manifest.save();
    throw;
  }

  Manifest manifest = Manifest::open_or_create(out_dir);
  manifest.add_step("simulate",
                    {{"config", config_to_json(cfg)},
                     {"n_realizations", n},
                     {"threads", options.n_threads},
                     {"time_resolved", options.time_resolved},
                     {"observables", describe_requests(requests)},
                     {"argv", command_line}},
                    seconds_since(t0), true);
  for (const std::string& f : writer.output_files()) manifest.add_output(f);
  manifest.add_output("manifest.json");
  manifest.save();
  std::cout << "simulate: " << n << " realizations of L=" << cfg.n_qubits << " at p="
            << cfg.measurement_rate << " -> " << out_dir << "\n";
  return 0;
}

int cmd_measure(const std::string& data_dir, const std::string& observable_code_str,
                const std::string& positions_spec, const std::string& x_list, int threads,
                const OptimizerOverrides& overrides, bool force,
                const std::string& command_line) {
  const fs::path dir(data_dir);
  const CircuitConfig cfg = load_config_file(dir / "config.json");
  Manifest manifest = Manifest::open_or_create(dir);
  const long n = realization_count_from_manifest(manifest);

  ObservableRequest req = make_request(observable_from_code(observable_code_str),
                                       parties_from_positions_spec(positions_spec),
                                       x_list.empty() ? std::vector<int>{}
                                                      : parse_int_list(x_list));
  overrides.apply(req.opt);

  json detail{{"observable", observable_code(req.obs)},
              {"positions_spec", positions_spec},
              {"x", req.x_values}};
  for (const json& step : manifest.doc().at("steps")) {
    if (step.value("command", "") == "measure" && step.value("observable", "") ==
            detail["observable"] &&
        step.value("positions_spec", "") == detail["positions_spec"] &&
        step.value("x", json::array()) == detail["x"] && !force) {
      throw config_error("this measurement already ran on the dataset (use --force to repeat)");
    }
  }

  // Replay: records are regenerated from the seed, checked against the stored
  // log when one exists, and the requested observable evaluated on the way.
  const bool have_records = fs::exists(dir / "records.jsonl");
  std::ifstream stored(dir / "records.jsonl");

  std::ofstream values(dir / "values.jsonl", std::ios::app);
  if (!values) throw io_error("cannot append to values.jsonl in " + data_dir);

  EnsembleOptions options;
  options.n_realizations = n;
  options.n_threads = resolve_threads(threads);
  options.store_records = false;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    run_ensemble(cfg, {req}, options, [&](long k, const RealizationPayload& payload) {
      if (have_records) {
        std::string line;
        if (!std::getline(stored, line)) {
          throw io_error("records.jsonl ended before realization " + std::to_string(k));
        }
        const CircuitRecord on_disk = record_from_json(json::parse(line), cfg);
        if (!(on_disk == payload.record)) {
          throw numerical_error("replay diverged from stored record " + std::to_string(k));
        }
      }
      for (const ValueRow& row : payload.rows) {
        values << value_row_to_json(row).dump() << "\n";
      }
      if (!values) throw io_error("write failed in " + data_dir);
    });
  } catch (...) {
    write_partial_marker(dir, "measure aborted");
    throw;
  }
  values.close();

  json step = detail;
  step["n_realizations"] = n;
  step["threads"] = options.n_threads;
  step["argv"] = command_line;
  step["restarts"] = req.opt.n_restarts;
  manifest.add_step("measure", step, seconds_since(t0), true);
  manifest.add_output("values.jsonl");
  manifest.save();
  std::cout << "measure: " << observable_code(req.obs) << " over " << n
            << " realizations appended to " << (dir / "values.jsonl").string() << "\n";
  return 0;
}

int cmd_graphs(const std::string& data_dir, const std::string& targets_list,
               const std::string& mode, long export_limit, const std::string& command_line) {
  const fs::path dir(data_dir);
  const CircuitConfig cfg = load_config_file(dir / "config.json");
  if (!fs::exists(dir / "records.jsonl")) {
    throw io_error("dataset has no records.jsonl; graphs need persisted records");
  }
  const std::vector<int> targets = parse_int_list(targets_list);
  if (targets.empty()) throw config_error("target list is empty");
  for (int t : targets) {
    if (t < 0 || t >= cfg.n_qubits) throw config_error("target out of range");
  }
  const bool single_seed = mode == "single-seed";
  if (!single_seed && mode != "unrestricted") {
    throw config_error("mode must be 'unrestricted' or 'single-seed'");
  }
  std::vector<int> complement;
  for (int s = 0; s < cfg.n_qubits; ++s) {
    if (std::find(targets.begin(), targets.end(), s) == targets.end()) complement.push_back(s);
  }

  const fs::path graph_dir = dir / "graphs";
  std::error_code ec;
  fs::create_directories(graph_dir, ec);
  if (ec) throw io_error("cannot create " + graph_dir.string());
  std::ofstream scores(graph_dir / "gmin_scores.jsonl", std::ios::trunc);
  if (!scores) throw io_error("cannot write gmin_scores.jsonl");

  const auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(dir / "records.jsonl");
  std::string line;
  long k = 0;
  std::vector<std::string> exported;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const CircuitRecord record = record_from_json(json::parse(line), cfg);
    const SpacetimeGraph graph = SpacetimeGraph::build(record);
    SpanningGraph gmin;
    if (single_seed) {
      const ConeForest forest = entanglement_cones(record);
      gmin = single_seed_spanning_graph(graph, forest, targets, record);
    } else {
      gmin = minimal_spanning_graph(graph, targets);
    }

    json row{{"realization", record.realization_index},
             {"targets", targets},
             {"mode", mode},
             {"connected", gmin.connected},
             {"edge_count", gmin.edge_count},
             {"dropped", gmin.dropped_targets}};
    if (gmin.connected) {
      row["parasitic_score"] = parasitic_score(graph, gmin, targets, complement);
      json cols = json::array();
      for (int e : gmin.seed_edge_ids) cols.push_back(graph.edges()[e].col_a);
      row["seed_columns"] = std::move(cols);
    } else {
      row["parasitic_score"] = nullptr;
    }
    scores << row.dump() << "\n";

    if (k < export_limit) {
      const std::string gname = "graph_" + std::to_string(k) + ".txt";
      const std::string lname = "layout_" + std::to_string(k) + ".tsv";
      std::ofstream gt(graph_dir / gname, std::ios::trunc);
      write_adjacency(graph, gt);
      std::ofstream lt(graph_dir / lname, std::ios::trunc);
      write_layout(graph, gmin.connected ? &gmin : nullptr, targets, lt);
      exported.push_back("graphs/" + gname);
      exported.push_back("graphs/" + lname);
    }
    ++k;
  }
  scores.close();

  Manifest manifest = Manifest::open_or_create(dir);
  json step{{"targets", targets}, {"mode", mode}, {"argv", command_line},
            {"n_realizations", k}};
  manifest.add_step("graphs", step, seconds_since(t0), true);
  manifest.add_output("graphs/gmin_scores.jsonl");
  for (const std::string& f : exported) manifest.add_output(f);
  manifest.save();
  std::cout << "graphs: scored " << k << " realizations for targets " << targets_list << "\n";
  return 0;
}

int cmd_fit(const std::string& data_dir, const std::string& observable_code_str,
            bool use_ccr, bool exclude_last, const std::string& exclude_list,
            const std::string& parity_str, const std::string& command_line) {
  const fs::path dir(data_dir);
  const CircuitConfig cfg = load_config_file(dir / "config.json");

  const auto t0 = std::chrono::steady_clock::now();
  const auto table = aggregate_values_file(dir / "values.jsonl");
  write_series_csv(dir / "aggregate.csv", table);
  const auto csv = read_series_csv(dir / "aggregate.csv");

  const Observable obs = observable_from_code(observable_code_str);
  std::vector<SeriesPoint> series;
  for (const auto& [key, pt] : csv) {
    if (key.first == observable_code(obs)) series.push_back(pt);
  }
  if (series.empty()) {
    throw config_error("no aggregated rows for observable " + observable_code(obs));
  }

  FitOptions options;
  options.domain = use_ccr ? FitDomain::CrossRatio : FitDomain::Separation;
  options.n_sites = cfg.n_qubits;
  options.exclude_last = exclude_last;
  for (int x : parse_int_list(exclude_list)) options.exclude_x.insert(x);
  if (!parity_str.empty()) {
    if (parity_str == "even") {
      options.parity = 0;
    } else if (parity_str == "odd") {
      options.parity = 1;
    } else {
      throw config_error("parity must be 'even' or 'odd'");
    }
  } else if (obs == Observable::LogNegativity) {
    throw config_error("negativity fits never mix parities; pass --parity even or odd");
  }
  if (use_ccr && cfg.boundary != Boundary::Periodic) {
    throw config_error("cross-ratio fits need periodic boundaries");
  }

  const FitResult fit = fit_power_law(series, options);

  std::string tag = observable_code(obs);
  tag += use_ccr ? "_ccr" : "_x";
  if (options.parity) tag += *options.parity == 0 ? "_even" : "_odd";

  json out{{"observable", observable_code(obs)},
           {"domain", use_ccr ? "ccr" : "x"},
           {"n_sites", cfg.n_qubits},
           {"alpha", fit.alpha},
           {"alpha_err", fit.alpha_err},
           {"alpha_weighted", fit.alpha_weighted ? json(*fit.alpha_weighted) : json(nullptr)},
           {"alpha_weighted_err",
            fit.alpha_weighted_err ? json(*fit.alpha_weighted_err) : json(nullptr)}};
  if (options.parity) out["parity"] = *options.parity == 0 ? "even" : "odd";
  json used = json::array();
  for (const FitPoint& p : fit.used) {
    used.push_back({{"x", p.x}, {"t", p.t}, {"mean", p.mean}, {"stderr", p.stderr_value}});
  }
  out["points_used"] = std::move(used);
  json excluded = json::array();
  for (const ExcludedPoint& p : fit.excluded) {
    excluded.push_back({{"x", p.x}, {"reason", p.reason}});
  }
  out["points_excluded"] = std::move(excluded);

  const std::string fit_name = "fit_" + tag + ".json";
  const std::string plot_name = "plot_" + tag + ".tsv";
  {
    std::ofstream f(dir / fit_name, std::ios::trunc);
    if (!f) throw io_error("cannot write " + fit_name);
    f << out.dump(2) << "\n";
  }
  {
    std::ofstream f(dir / plot_name, std::ios::trunc);
    if (!f) throw io_error("cannot write " + plot_name);
    f << "# t mean stderr   (t = " << (use_ccr ? "1/eta" : "x") << ")\n";
    for (const FitPoint& p : fit.used) {
      f << format_double(use_ccr ? std::exp(p.t) : static_cast<double>(p.x)) << "\t"
        << format_double(p.mean) << "\t" << format_double(p.stderr_value) << "\n";
    }
  }

  Manifest manifest = Manifest::open_or_create(dir);
  json step{{"observable", observable_code(obs)},
            {"domain", use_ccr ? "ccr" : "x"},
            {"exclude_last", exclude_last},
            {"argv", command_line}};
  manifest.add_step("fit", step, seconds_since(t0), true);
  manifest.add_output("aggregate.csv");
  manifest.add_output(fit_name);
  manifest.add_output(plot_name);
  manifest.save();

  std::cout << "fit " << tag << ": alpha = " << fit.alpha << " +- " << fit.alpha_err << " over "
            << fit.used.size() << " points\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monitored-circuit simulator and entanglement analysis"};
  app.set_version_flag("--version", mqc::kVersion);
  app.require_subcommand(0, 1);

  std::string command_line;
  for (int i = 0; i < argc; ++i) {
    if (i) command_line += ' ';
    command_line += argv[i];
  }

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a seeded ensemble and persist the dataset");
  std::string sim_config, sim_preset, sim_out;
  long sim_n = 0;
  int sim_threads = 0, sim_layers = 0;
  double sim_p = -1.0;
  std::int64_t sim_seed = -1;
  bool sim_no_records = false, sim_time_resolved = false;
  std::vector<std::string> sim_observables;
  OptimizerOverrides sim_overrides;
  sim->add_option("--config", sim_config, "circuit config JSON file");
  sim->add_option("--preset", sim_preset, "named experiment preset (see `mqc presets`)");
  sim->add_option("--n", sim_n, "number of realizations")->required();
  sim->add_option("--out", sim_out, "output dataset directory")->required();
  sim->add_option("--threads", sim_threads, "worker threads (default: MQC_THREADS or all cores)");
  sim->add_option("--observable", sim_observables,
                  "observable spec like \"W:(i,i+x,i+2x)\" or \"E:(i,i+x):2,4,6\"");
  sim->add_option("--p", sim_p, "override the measurement rate");
  sim->add_option("--seed", sim_seed, "override the master seed");
  sim->add_option("--layers", sim_layers, "override the unitary layer count");
  sim->add_flag("--no-records", sim_no_records, "skip records.jsonl (graphs need records)");
  sim->add_flag("--time-resolved", sim_time_resolved, "evaluate observables after every layer");
  sim->add_option("--restarts", sim_overrides.restarts, "optimizer restarts override");
  sim->add_option("--max-iter", sim_overrides.max_iterations, "optimizer iteration cap override");
  sim->add_option("--tol", sim_overrides.tolerance, "optimizer tolerance override");

  // measure
  auto* meas = app.add_subcommand("measure", "evaluate an observable over a stored dataset");
  std::string meas_data, meas_obs, meas_spec, meas_x;
  int meas_threads = 0;
  bool meas_force = false;
  OptimizerOverrides meas_overrides;
  meas->add_option("--data", meas_data, "dataset directory")->required();
  meas->add_option("--observable", meas_obs, "E, W, I2, W4 or D")->required();
  meas->add_option("--positions-spec", meas_spec, "\"(i,i+x)\", \"(i,i+x,i+2x)\" or 4-spin form")
      ->required();
  meas->add_option("--x", meas_x, "comma list of separations (default: all admissible)");
  meas->add_option("--threads", meas_threads, "worker threads");
  meas->add_flag("--force", meas_force, "repeat a measurement that already ran");
  meas->add_option("--restarts", meas_overrides.restarts, "optimizer restarts override");
  meas->add_option("--max-iter", meas_overrides.max_iterations, "optimizer iteration cap");
  meas->add_option("--tol", meas_overrides.tolerance, "optimizer tolerance override");

  // graphs
  auto* gr = app.add_subcommand("graphs", "spacetime graphs, spanning graphs and scores");
  std::string gr_data, gr_targets, gr_mode = "unrestricted";
  long gr_limit = 10;
  gr->add_option("--data", gr_data, "dataset directory (needs records.jsonl)")->required();
  gr->add_option("--targets", gr_targets, "comma list of target spins")->required();
  gr->add_option("--mode", gr_mode, "unrestricted (default) or single-seed");
  gr->add_option("--export-limit", gr_limit, "how many realizations get full text exports");

  // fit
  auto* ft = app.add_subcommand("fit", "aggregate a dataset and fit a power law");
  std::string ft_data, ft_obs, ft_exclude, ft_parity;
  bool ft_ccr = false, ft_exclude_last = false;
  ft->add_option("--data", ft_data, "dataset directory")->required();
  ft->add_option("--observable", ft_obs, "E, W, I2, W4 or D")->required();
  ft->add_flag("--ccr", ft_ccr, "fit against the conformal cross ratio instead of x");
  ft->add_flag("--exclude-last", ft_exclude_last, "drop the largest-x point");
  ft->add_option("--exclude", ft_exclude, "comma list of x values to drop");
  ft->add_option("--parity", ft_parity, "even or odd (required for E)");

  auto* pr = app.add_subcommand("presets", "list the named experiment presets");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(sim)) {
      return cmd_simulate(sim_config, sim_preset, sim_n, sim_out, sim_threads, sim_observables,
                          sim_p, sim_seed, sim_layers, sim_no_records, sim_time_resolved,
                          sim_overrides, command_line);
    }
    if (app.got_subcommand(meas)) {
      return cmd_measure(meas_data, meas_obs, meas_spec, meas_x, meas_threads, meas_overrides,
                         meas_force, command_line);
    }
    if (app.got_subcommand(gr)) {
      return cmd_graphs(gr_data, gr_targets, gr_mode, gr_limit, command_line);
    }
    if (app.got_subcommand(ft)) {
      return cmd_fit(ft_data, ft_obs, ft_ccr, ft_exclude_last, ft_exclude, ft_parity,
                     command_line);
    }
    if (app.got_subcommand(pr)) {
      for (const Preset& p : presets()) {
        std::cout << p.name << "\n    " << p.note << "\n    L=" << p.cfg.n_qubits << " "
                  << boundary_code(p.cfg.boundary) << ", p=" << p.cfg.measurement_rate
                  << ", layers=" << p.cfg.n_unitary_layers << "\n";
      }
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const mqc::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mqc::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const mqc::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
