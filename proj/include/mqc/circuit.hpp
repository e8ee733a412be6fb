#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mqc/errors.hpp"
#include "mqc/gate.hpp"
#include "mqc/rng.hpp"
#include "mqc/state.hpp"

namespace mqc {

enum class Boundary { Open, Periodic };
enum class UnitaryFamily { Haar, FloquetIsing };

struct CircuitConfig {
  int n_qubits = 8;
  Boundary boundary = Boundary::Open;
  double measurement_rate = 0.0;
  int n_unitary_layers = 49;
  UnitaryFamily family = UnitaryFamily::Haar;
  FloquetIsingParams floquet{};
  std::uint64_t master_seed = 0;

  void validate() const {
    if (n_qubits < 2 || n_qubits > 28) {
      throw config_error("n_qubits must be in 2..28, got " + std::to_string(n_qubits));
    }
    if (!(measurement_rate >= 0.0 && measurement_rate <= 1.0)) {
      throw config_error("measurement_rate must be in [0, 1]");
    }
    if (n_unitary_layers < 1) throw config_error("n_unitary_layers must be at least 1");
  }

  friend bool operator==(const CircuitConfig&, const CircuitConfig&) = default;
};

struct GateEvent {
  int layer = 0;  // global layer index; unitary layers are even
  int site_a = 0;
  int site_b = 0;
  int gate_id = 0;

  friend bool operator==(const GateEvent&, const GateEvent&) = default;
};

// Full spacetime event log of one realization; the sole input to the graph
// analysis, and enough (with the config) to replay the final state.
struct CircuitRecord {
  CircuitConfig config;
  long realization_index = 0;
  std::vector<GateEvent> gate_events;
  std::vector<MeasurementEvent> measurement_events;

  friend bool operator==(const CircuitRecord&, const CircuitRecord&) = default;
};

struct LayerSpec {
  bool is_measurement = false;
  std::vector<std::pair<int, int>> bonds;  // empty for measurement layers
};

// Alternating brickwork schedule: odd bonds, measurements, even bonds,
// measurements, ... starting from the bond on the first two sites. The last
// unitary layer lands on odd bonds for odd layer counts, followed by a final
// measurement layer.
inline std::vector<LayerSpec> build_layer_schedule(const CircuitConfig& cfg) {
  cfg.validate();
  std::vector<LayerSpec> out;
  out.reserve(2 * static_cast<std::size_t>(cfg.n_unitary_layers));
  for (int u = 0; u < cfg.n_unitary_layers; ++u) {
    LayerSpec layer;
    const int first = (u % 2 == 0) ? 0 : 1;
    for (int a = first; a + 1 < cfg.n_qubits; a += 2) layer.bonds.emplace_back(a, a + 1);
    if (u % 2 == 1 && cfg.boundary == Boundary::Periodic && cfg.n_qubits % 2 == 0) {
      layer.bonds.emplace_back(cfg.n_qubits - 1, 0);
    }
    out.push_back(std::move(layer));
    out.push_back(LayerSpec{true, {}});
  }
  return out;
}

struct RealizationResult {
  StateVector state;
  CircuitRecord record;
};

struct LayerInfo {
  int layer = 0;
  bool is_measurement = false;
};

// Runs one seeded realization from the all-0 product state. The RNG stream is
// derived from (master_seed, realization_index) only, so reruns are
// bit-identical regardless of scheduling. `after_layer` is invoked with the
// state after every layer.
template <typename Callback>
RealizationResult run_realization(const CircuitConfig& cfg, long realization_index,
                                  Callback&& after_layer) {
  cfg.validate();
  Rng rng(child_seed(cfg.master_seed, kStreamCircuit,
                     static_cast<std::uint64_t>(realization_index)));
  StateVector psi(cfg.n_qubits);
  CircuitRecord record;
  record.config = cfg;
  record.realization_index = realization_index;

  std::optional<TwoQubitGate> fixed_gate;
  if (cfg.family == UnitaryFamily::FloquetIsing) fixed_gate = floquet_ising_gate(cfg.floquet);

  const std::vector<LayerSpec> schedule = build_layer_schedule(cfg);
  int gate_id = 0;
  for (int layer = 0; layer < static_cast<int>(schedule.size()); ++layer) {
    const LayerSpec& spec = schedule[layer];
    if (!spec.is_measurement) {
      for (const auto& [a, b] : spec.bonds) {
        if (cfg.family == UnitaryFamily::Haar) {
          psi.apply_two_qubit_gate(sample_haar_unitary(rng), a, b);
        } else {
          psi.apply_two_qubit_gate(*fixed_gate, a, b);
        }
        record.gate_events.push_back({layer, a, b, gate_id++});
      }
    } else {
      for (int site = 0; site < cfg.n_qubits; ++site) {
        if (rng.bernoulli(cfg.measurement_rate)) {
          record.measurement_events.push_back(psi.measure_z(site, rng, layer));
        }
      }
    }
    after_layer(LayerInfo{layer, spec.is_measurement}, psi);
  }
  return {std::move(psi), std::move(record)};
}

inline RealizationResult run_realization(const CircuitConfig& cfg, long realization_index) {
  return run_realization(cfg, realization_index, [](const LayerInfo&, const StateVector&) {});
}

// Deterministic replay: reruns the stream and checks the regenerated event
// log against the stored one.
inline RealizationResult replay_realization(const CircuitRecord& stored) {
  RealizationResult result = run_realization(stored.config, stored.realization_index);
  if (!(result.record == stored)) {
    throw numerical_error("replay diverged from the stored record for realization " +
                          std::to_string(stored.realization_index));
  }
  return result;
}

}  // namespace mqc
