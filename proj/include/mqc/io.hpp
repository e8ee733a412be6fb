#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mqc/circuit.hpp"
#include "mqc/errors.hpp"
#include "mqc/observables.hpp"
#include "mqc/series.hpp"
#include "mqc/version.hpp"

namespace mqc {

using nlohmann::json;

inline std::string boundary_code(Boundary b) {
  return b == Boundary::Open ? "open" : "periodic";
}

inline Boundary boundary_from_code(const std::string& code) {
  if (code == "open") return Boundary::Open;
  if (code == "periodic") return Boundary::Periodic;
  throw config_error("boundary must be 'open' or 'periodic', got '" + code + "'");
}

inline json config_to_json(const CircuitConfig& cfg) {
  json j;
  j["n_qubits"] = cfg.n_qubits;
  j["boundary"] = boundary_code(cfg.boundary);
  j["measurement_rate"] = cfg.measurement_rate;
  j["n_unitary_layers"] = cfg.n_unitary_layers;
  j["unitary_family"] = cfg.family == UnitaryFamily::Haar ? "haar" : "floquet_ising";
  if (cfg.family == UnitaryFamily::FloquetIsing) {
    j["floquet_params"] = {{"j", cfg.floquet.j}, {"g", cfg.floquet.g}, {"h", cfg.floquet.h}};
  }
  j["master_seed"] = cfg.master_seed;
  return j;
}

inline CircuitConfig config_from_json(const json& j) {
  CircuitConfig cfg;
  try {
    cfg.n_qubits = j.at("n_qubits").get<int>();
    cfg.boundary = boundary_from_code(j.at("boundary").get<std::string>());
    cfg.measurement_rate = j.at("measurement_rate").get<double>();
    cfg.n_unitary_layers = j.value("n_unitary_layers", 49);
    const std::string family = j.value("unitary_family", std::string("haar"));
    if (family == "haar") {
      cfg.family = UnitaryFamily::Haar;
    } else if (family == "floquet_ising") {
      cfg.family = UnitaryFamily::FloquetIsing;
    } else {
      throw config_error("unitary_family must be 'haar' or 'floquet_ising'");
    }
    if (j.contains("floquet_params")) {
      const json& fp = j.at("floquet_params");
      cfg.floquet.j = fp.value("j", cfg.floquet.j);
      cfg.floquet.g = fp.value("g", cfg.floquet.g);
      cfg.floquet.h = fp.value("h", cfg.floquet.h);
    }
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw config_error(std::string("bad config document: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline CircuitConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

inline json record_to_json(const CircuitRecord& rec) {
  json gates = json::array();
  for (const GateEvent& ev : rec.gate_events) {
    gates.push_back({ev.layer, ev.site_a, ev.site_b, ev.gate_id});
  }
  json meas = json::array();
  for (const MeasurementEvent& ev : rec.measurement_events) {
    meas.push_back({ev.layer, ev.site, ev.outcome, ev.pre_probability});
  }
  return json{{"realization", rec.realization_index},
              {"gates", std::move(gates)},
              {"measurements", std::move(meas)}};
}

inline CircuitRecord record_from_json(const json& j, const CircuitConfig& cfg) {
  CircuitRecord rec;
  rec.config = cfg;
  try {
    rec.realization_index = j.at("realization").get<long>();
    for (const json& g : j.at("gates")) {
      rec.gate_events.push_back(
          {g.at(0).get<int>(), g.at(1).get<int>(), g.at(2).get<int>(), g.at(3).get<int>()});
    }
    for (const json& m : j.at("measurements")) {
      MeasurementEvent ev;
      ev.layer = m.at(0).get<int>();
      ev.site = m.at(1).get<int>();
      ev.outcome = m.at(2).get<int>();
      ev.pre_probability = m.at(3).get<double>();
      rec.measurement_events.push_back(ev);
    }
  } catch (const json::exception& e) {
    throw io_error(std::string("bad record row: ") + e.what());
  }
  return rec;
}

inline json value_row_to_json(const ValueRow& row) {
  json meta{{"x", row.x}, {"raw", row.raw}};
  if (observable_uses_optimizer(row.obs)) {
    meta["converged"] = row.converged;
    meta["restarts"] = row.restarts;
  }
  if (row.layer >= 0) meta["layer"] = row.layer;
  return json{{"realization", row.realization},
              {"observable", observable_code(row.obs)},
              {"positions", row.positions},
              {"value", row.value},
              {"meta", std::move(meta)}};
}

inline ValueRow value_row_from_json(const json& j) {
  ValueRow row;
  try {
    row.realization = j.at("realization").get<long>();
    row.obs = observable_from_code(j.at("observable").get<std::string>());
    row.positions = j.at("positions").get<std::vector<int>>();
    row.value = j.at("value").get<double>();
    const json& meta = j.at("meta");
    row.x = meta.at("x").get<int>();
    row.raw = meta.value("raw", row.value);
    row.converged = meta.value("converged", true);
    row.restarts = meta.value("restarts", 0);
    row.layer = meta.value("layer", -1);
  } catch (const json::exception& e) {
    throw io_error(std::string("bad value row: ") + e.what());
  }
  return row;
}

template <typename Fn>
void for_each_value_row(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    fn(value_row_from_json(json::parse(line, nullptr, true)));
  }
}

inline std::vector<ValueRow> read_values_jsonl(const std::filesystem::path& path) {
  std::vector<ValueRow> rows;
  for_each_value_row(path, [&](ValueRow row) { rows.push_back(std::move(row)); });
  return rows;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// observable,x -> point. Written sorted so reruns are byte-identical.
inline void write_series_csv(const std::filesystem::path& path,
                             const std::map<std::pair<std::string, int>, SeriesPoint>& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out << "observable,x,mean,stderr,n_total,n_positive\n";
  for (const auto& [key, pt] : table) {
    out << key.first << "," << key.second << "," << format_double(pt.mean) << ","
        << format_double(pt.stderr_value) << "," << pt.n_total << "," << pt.n_positive << "\n";
  }
  if (!out) throw io_error("failed while writing " + path.string());
}

inline std::map<std::pair<std::string, int>, SeriesPoint> read_series_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  std::map<std::pair<std::string, int>, SeriesPoint> table;
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty csv " + path.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 6) throw io_error("bad csv row: " + line);
    SeriesPoint pt;
    pt.x = std::stoi(cells[1]);
    pt.mean = std::stod(cells[2]);
    pt.stderr_value = std::stod(cells[3]);
    pt.n_total = std::stol(cells[4]);
    pt.n_positive = std::stol(cells[5]);
    table[{cells[0], pt.x}] = pt;
  }
  return table;
}

// Aggregates final-state rows by (observable, x); zeros included.
inline std::map<std::pair<std::string, int>, SeriesPoint> aggregate_rows(
    const std::vector<ValueRow>& rows) {
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const ValueRow& row : rows) {
    if (row.layer >= 0) continue;  // time-resolved rows aggregate separately
    groups[{observable_code(row.obs), row.x}].push_back(row.value);
  }
  std::map<std::pair<std::string, int>, SeriesPoint> table;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());  // fixed order, independent of row order
    table[key] = aggregate_values(key.second, values);
  }
  return table;
}

// Streaming variant: one pass over values.jsonl, holding only the grouped
// value lists. Large ensembles do not fit in memory as parsed rows.
inline std::map<std::pair<std::string, int>, SeriesPoint> aggregate_values_file(
    const std::filesystem::path& path) {
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for_each_value_row(path, [&](const ValueRow& row) {
    if (row.layer >= 0) return;
    groups[{observable_code(row.obs), row.x}].push_back(row.value);
  });
  std::map<std::pair<std::string, int>, SeriesPoint> table;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    table[key] = aggregate_values(key.second, values);
  }
  return table;
}

// The run manifest: one per output directory; every command that touches the
// directory appends a step and registers the files it wrote.
class Manifest {
 public:
  static Manifest open_or_create(const std::filesystem::path& dir) {
    Manifest m;
    m.dir_ = dir;
    const auto path = dir / "manifest.json";
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      if (!in) throw io_error("cannot open " + path.string());
      try {
        in >> m.doc_;
      } catch (const json::exception& e) {
        throw io_error("corrupt manifest: " + std::string(e.what()));
      }
    } else {
      m.doc_ = json{{"version", kVersion}, {"steps", json::array()}, {"outputs", json::array()}};
    }
    return m;
  }

  void add_step(const std::string& command, const json& detail, double wall_seconds,
                bool completed) {
    json step = detail;
    step["command"] = command;
    step["wall_clock_seconds"] = wall_seconds;
    step["completed"] = completed;
    doc_["steps"].push_back(std::move(step));
  }

  void add_output(const std::string& relative_path) {
    for (const json& o : doc_["outputs"]) {
      if (o.get<std::string>() == relative_path) return;
    }
    doc_["outputs"].push_back(relative_path);
  }

  bool lists_output(const std::string& relative_path) const {
    for (const json& o : doc_.at("outputs")) {
      if (o.get<std::string>() == relative_path) return true;
    }
    return false;
  }

  const json& doc() const { return doc_; }

  void save() const {
    std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
    if (!out) throw io_error("cannot write manifest in " + dir_.string());
    out << doc_.dump(2) << "\n";
  }

 private:
  std::filesystem::path dir_;
  json doc_;
};

// Marker dropped next to a dataset whose writer aborted mid-run.
inline void write_partial_marker(const std::filesystem::path& dir, const std::string& why) {
  std::ofstream out(dir / "PARTIAL", std::ios::trunc);
  out << why << "\n";
}

}  // namespace mqc
