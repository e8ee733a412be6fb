#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mqc/circuit.hpp"
#include "mqc/errors.hpp"

namespace mqc {

enum class EdgeType { Unitary, Idle };

struct SpacetimeEdge {
  int site_a = 0;
  int col_a = 0;
  int site_b = 0;
  int col_b = 0;
  EdgeType type = EdgeType::Unitary;

  friend bool operator==(const SpacetimeEdge&, const SpacetimeEdge&) = default;
};

// Undirected circuit-history graph. One vertex column per unitary layer; a
// vertical edge per gate, a horizontal edge per step the site crosses
// unmeasured. The final measurement layer has no further step to cross, so it
// is kept as a liveness flag on the last column: spins measured there carry
// no entanglement into the final state.
class SpacetimeGraph {
 public:
  static SpacetimeGraph build(const CircuitRecord& record) {
    SpacetimeGraph g;
    g.n_sites_ = record.config.n_qubits;
    g.n_columns_ = record.config.n_unitary_layers;

    std::vector<char> measured(static_cast<std::size_t>(g.n_sites_) * g.n_columns_, 0);
    for (const MeasurementEvent& ev : record.measurement_events) {
      const int mlayer = ev.layer / 2;  // measurement layer t has global index 2t+1
      measured[static_cast<std::size_t>(mlayer) * g.n_sites_ + ev.site] = 1;
    }
    g.measured_ = std::move(measured);

    for (const GateEvent& ev : record.gate_events) {
      const int col = ev.layer / 2;
      g.edges_.push_back({ev.site_a, col, ev.site_b, col, EdgeType::Unitary});
    }
    for (int col = 0; col + 1 < g.n_columns_; ++col) {
      for (int site = 0; site < g.n_sites_; ++site) {
        if (!g.measured(site, col)) {
          g.edges_.push_back({site, col, site, col + 1, EdgeType::Idle});
        }
      }
    }

    g.adjacency_.assign(static_cast<std::size_t>(g.n_sites_) * g.n_columns_, {});
    for (int e = 0; e < static_cast<int>(g.edges_.size()); ++e) {
      const SpacetimeEdge& ed = g.edges_[e];
      g.adjacency_[g.vertex(ed.site_a, ed.col_a)].push_back({g.vertex(ed.site_b, ed.col_b), e});
      g.adjacency_[g.vertex(ed.site_b, ed.col_b)].push_back({g.vertex(ed.site_a, ed.col_a), e});
    }
    for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());
    return g;
  }

  int n_sites() const { return n_sites_; }
  int n_columns() const { return n_columns_; }
  int n_vertices() const { return n_sites_ * n_columns_; }

  int vertex(int site, int col) const { return col * n_sites_ + site; }
  int site_of(int v) const { return v % n_sites_; }
  int col_of(int v) const { return v / n_sites_; }

  bool measured(int site, int mlayer) const {
    return measured_[static_cast<std::size_t>(mlayer) * n_sites_ + site] != 0;
  }

  // Not measured in the final measurement layer.
  bool final_alive(int site) const { return !measured(site, n_columns_ - 1); }

  const std::vector<SpacetimeEdge>& edges() const { return edges_; }

  // neighbor vertex id, edge index
  const std::vector<std::pair<int, int>>& neighbors(int v) const { return adjacency_[v]; }

  long idle_edge_count() const {
    long n = 0;
    for (const SpacetimeEdge& e : edges_) {
      if (e.type == EdgeType::Idle) ++n;
    }
    return n;
  }

 private:
  int n_sites_ = 0;
  int n_columns_ = 0;
  std::vector<SpacetimeEdge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
  std::vector<char> measured_;
};

// Forward cone of one seed unitary: the sites its influence can reach without
// crossing a measurement, column by column.
struct Cone {
  int gate_index = 0;  // into record.gate_events
  int col = 0;
  std::pair<int, int> bond;
  std::vector<std::vector<int>> sites_by_col;  // from the seed column to the last
  std::vector<int> final_sites;                // alive sites at the last column
  int parent = -1;                             // enclosing earlier cone, -1 for roots

  bool contains(int site, int col_query) const {
    if (col_query < col || col_query >= col + static_cast<int>(sites_by_col.size())) {
      return false;
    }
    const auto& sites = sites_by_col[col_query - col];
    return std::binary_search(sites.begin(), sites.end(), site);
  }
};

struct ConeForest {
  std::vector<Cone> cones;
};

// Builds the forward cone of every unitary event, earliest first, keeping the
// cones that reach the final state. A cone's parent is the latest earlier kept
// cone whose region contains both seed sites at the seed column.
inline ConeForest entanglement_cones(const CircuitRecord& record) {
  const int L = record.config.n_qubits;
  const int columns = record.config.n_unitary_layers;

  std::vector<char> measured(static_cast<std::size_t>(L) * columns, 0);
  for (const MeasurementEvent& ev : record.measurement_events) {
    measured[static_cast<std::size_t>(ev.layer / 2) * L + ev.site] = 1;
  }
  std::vector<std::vector<std::pair<int, int>>> gates_by_col(columns);
  for (const GateEvent& ev : record.gate_events) {
    gates_by_col[ev.layer / 2].emplace_back(ev.site_a, ev.site_b);
  }

  ConeForest forest;
  for (int gi = 0; gi < static_cast<int>(record.gate_events.size()); ++gi) {
    const GateEvent& seed = record.gate_events[gi];
    const int seed_col = seed.layer / 2;

    Cone cone;
    cone.gate_index = gi;
    cone.col = seed_col;
    cone.bond = {seed.site_a, seed.site_b};

    std::vector<char> current(L, 0);
    current[seed.site_a] = 1;
    current[seed.site_b] = 1;
    auto snapshot = [&] {
      std::vector<int> sites;
      for (int s = 0; s < L; ++s) {
        if (current[s]) sites.push_back(s);
      }
      return sites;
    };
    cone.sites_by_col.push_back(snapshot());

    for (int col = seed_col; col + 1 < columns; ++col) {
      for (int s = 0; s < L; ++s) {
        if (measured[static_cast<std::size_t>(col) * L + s]) current[s] = 0;
      }
      for (const auto& [a, b] : gates_by_col[col + 1]) {
        if (current[a] || current[b]) {
          current[a] = 1;
          current[b] = 1;
        }
      }
      cone.sites_by_col.push_back(snapshot());
    }
    for (int s = 0; s < L; ++s) {
      if (current[s] && !measured[static_cast<std::size_t>(columns - 1) * L + s]) {
        cone.final_sites.push_back(s);
      }
    }
    if (cone.final_sites.empty()) continue;  // blocked before the final state

    for (int c = static_cast<int>(forest.cones.size()) - 1; c >= 0; --c) {
      const Cone& other = forest.cones[c];
      if (other.col < seed_col && other.contains(seed.site_a, seed_col) &&
          other.contains(seed.site_b, seed_col)) {
        if (cone.parent == -1 || other.col > forest.cones[cone.parent].col) cone.parent = c;
      }
    }
    forest.cones.push_back(std::move(cone));
  }
  return forest;
}

inline void write_adjacency(const SpacetimeGraph& g, std::ostream& os) {
  os << "# spacetime graph: sites " << g.n_sites() << " columns " << g.n_columns() << "\n";
  os << "# site col : neighbor_site neighbor_col type(U|I) ; ...\n";
  for (int v = 0; v < g.n_vertices(); ++v) {
    os << g.site_of(v) << " " << g.col_of(v) << " :";
    for (const auto& [nbr, edge] : g.neighbors(v)) {
      os << " " << g.site_of(nbr) << " " << g.col_of(nbr) << " "
         << (g.edges()[edge].type == EdgeType::Unitary ? "U" : "I") << " ;";
    }
    os << "\n";
  }
}

}  // namespace mqc
