#pragma once

#include <string>
#include <vector>

#include "mqc/circuit.hpp"
#include "mqc/density.hpp"
#include "mqc/errors.hpp"
#include "mqc/gme.hpp"
#include "mqc/rng.hpp"

namespace mqc {

enum class Observable { LogNegativity, W, I2, W4, GeometricEntanglement };

inline std::string observable_code(Observable obs) {
  switch (obs) {
    case Observable::LogNegativity: return "E";
    case Observable::W: return "W";
    case Observable::I2: return "I2";
    case Observable::W4: return "W4";
    case Observable::GeometricEntanglement: return "D";
  }
  throw config_error("unknown observable");
}

inline Observable observable_from_code(const std::string& code) {
  if (code == "E") return Observable::LogNegativity;
  if (code == "W") return Observable::W;
  if (code == "I2") return Observable::I2;
  if (code == "W4") return Observable::W4;
  if (code == "D") return Observable::GeometricEntanglement;
  throw config_error("unknown observable code '" + code + "'");
}

inline std::uint64_t observable_stream_tag(Observable obs) {
  return static_cast<std::uint64_t>(obs) + 1;
}

inline bool observable_uses_optimizer(Observable obs) {
  return obs != Observable::LogNegativity;
}

inline OptimizerConfig default_optimizer(Observable obs) {
  switch (obs) {
    case Observable::W: return default_w_opt();
    case Observable::I2: return default_i2_opt();
    case Observable::W4: return default_w4_opt();
    case Observable::GeometricEntanglement: return default_d_opt();
    case Observable::LogNegativity: return {};
  }
  return {};
}

inline void check_party_count(Observable obs, int n_parties) {
  const bool ok = (obs == Observable::LogNegativity && n_parties == 2) ||
                  (obs == Observable::W && n_parties == 3) ||
                  (obs == Observable::I2 && (n_parties == 3 || n_parties == 4)) ||
                  (obs == Observable::W4 && n_parties == 4) ||
                  (obs == Observable::GeometricEntanglement && n_parties == 3);
  if (!ok) {
    throw config_error("observable " + observable_code(obs) + " does not take " +
                       std::to_string(n_parties) + " parties");
  }
}

// Largest admissible x for parties at (i, i+x, ..., i+(n-1)x): open chains
// must fit the last spin, periodic chains wrap and stay distinct up to L/n.
inline int max_separation(int n_qubits, Boundary boundary, int n_parties) {
  if (boundary == Boundary::Open) return (n_qubits - 1) / (n_parties - 1);
  return n_qubits / n_parties;
}

// All placements (i, i+x, ..., i+(n-1)x) for one x; every i under periodic
// boundaries, every admissible i under open ones.
inline std::vector<std::vector<int>> positions_for_separation(int n_qubits, Boundary boundary,
                                                              int n_parties, int x) {
  if (x < 1 || x > max_separation(n_qubits, boundary, n_parties)) {
    throw config_error("separation x = " + std::to_string(x) + " out of range");
  }
  std::vector<std::vector<int>> out;
  const int i_max = boundary == Boundary::Open ? n_qubits - 1 - (n_parties - 1) * x
                                               : n_qubits - 1;
  for (int i = 0; i <= i_max; ++i) {
    std::vector<int> pos(n_parties);
    for (int q = 0; q < n_parties; ++q) pos[q] = (i + q * x) % n_qubits;
    out.push_back(std::move(pos));
  }
  return out;
}

// One evaluation request: an observable over all arithmetic-progression
// placements at the given separations (empty = all admissible).
struct ObservableRequest {
  Observable obs = Observable::W;
  int n_parties = 3;
  std::vector<int> x_values;
  OptimizerConfig opt = default_w_opt();
};

inline ObservableRequest make_request(Observable obs, int n_parties,
                                      std::vector<int> x_values = {}) {
  check_party_count(obs, n_parties);
  ObservableRequest req;
  req.obs = obs;
  req.n_parties = n_parties;
  req.x_values = std::move(x_values);
  req.opt = default_optimizer(obs);
  return req;
}

// One persisted evaluation. `value` is the clamped criterion; `raw` keeps the
// unclamped optimum for diagnostics. layer == -1 marks final-state rows.
struct ValueRow {
  long realization = 0;
  Observable obs = Observable::W;
  std::vector<int> positions;
  int x = 0;
  double value = 0.0;
  double raw = 0.0;
  bool converged = true;
  int restarts = 0;
  int layer = -1;
};

inline ValueRow evaluate_observable(const StateVector& state, Observable obs,
                                    const std::vector<int>& positions,
                                    const OptimizerConfig& opt, Rng& rng) {
  check_party_count(obs, static_cast<int>(positions.size()));
  ValueRow row;
  row.obs = obs;
  row.positions = positions;

  const ReducedDensityMatrix rho = partial_trace(state, positions);
  switch (obs) {
    case Observable::LogNegativity: {
      row.value = log_negativity(rho, {0});
      row.raw = row.value;
      break;
    }
    case Observable::W: {
      const GMEResult res = w_criterion(rho, opt, rng);
      row.value = res.value;
      row.raw = res.raw_value;
      row.converged = res.converged;
      row.restarts = res.n_restarts;
      break;
    }
    case Observable::I2: {
      const GMEResult res = i2_criterion(rho, opt, rng);
      row.value = res.value;
      row.raw = res.raw_value;
      row.converged = res.converged;
      row.restarts = res.n_restarts;
      break;
    }
    case Observable::W4: {
      const GMEResult res = w4_criterion(rho, opt, rng);
      row.value = res.value;
      row.raw = res.raw_value;
      row.converged = res.converged;
      row.restarts = res.n_restarts;
      break;
    }
    case Observable::GeometricEntanglement: {
      const GMEResult res = geometric_entanglement(rho, 7, opt, rng);
      row.value = res.value;
      row.raw = res.raw_value;
      row.converged = res.converged;
      row.restarts = res.n_restarts;
      break;
    }
  }
  return row;
}

// Evaluates every request on a final (or intermediate) state. The optimizer
// stream for each row depends only on (master seed, realization, observable,
// base site, separation, layer), so results never depend on evaluation order.
inline std::vector<ValueRow> evaluate_requests(const StateVector& state,
                                               const CircuitConfig& cfg, long realization,
                                               const std::vector<ObservableRequest>& requests,
                                               int layer = -1) {
  std::vector<ValueRow> rows;
  for (const ObservableRequest& req : requests) {
    check_party_count(req.obs, req.n_parties);
    std::vector<int> xs = req.x_values;
    if (xs.empty()) {
      const int x_max = max_separation(cfg.n_qubits, cfg.boundary, req.n_parties);
      for (int x = 1; x <= x_max; ++x) xs.push_back(x);
    }
    for (int x : xs) {
      for (const std::vector<int>& pos : positions_for_separation(cfg.n_qubits, cfg.boundary,
                                                                  req.n_parties, x)) {
        Rng rng(child_seed(cfg.master_seed, kStreamObservable,
                           static_cast<std::uint64_t>(realization),
                           observable_stream_tag(req.obs), static_cast<std::uint64_t>(pos[0]),
                           static_cast<std::uint64_t>(x),
                           static_cast<std::uint64_t>(layer + 1)));
        ValueRow row = evaluate_observable(state, req.obs, pos, req.opt, rng);
        row.realization = realization;
        row.x = x;
        row.layer = layer;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace mqc
