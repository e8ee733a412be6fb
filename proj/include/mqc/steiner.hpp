#pragma once

#include <algorithm>
#include <limits>
#include <ostream>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "mqc/errors.hpp"
#include "mqc/graph.hpp"

namespace mqc {

// Minimal spanning graph for a set of final-time target spins: the connected
// edge subset of minimum edge count containing their last-column vertices.
// Targets measured away in the final layer, or stranded in another component,
// are reported as dropped; the search then spans the largest connectable
// subset.
struct SpanningGraph {
  std::vector<int> requested_targets;
  std::vector<int> spanned_targets;
  std::vector<int> dropped_targets;
  bool connected = false;  // all requested targets spanned
  int edge_count = 0;
  std::vector<int> edge_ids;    // into graph.edges()
  std::vector<int> vertex_ids;  // sorted
  std::vector<int> seed_edge_ids;  // unitary edges at the earliest column of the graph

  bool contains_vertex(int v) const {
    return std::binary_search(vertex_ids.begin(), vertex_ids.end(), v);
  }
};

namespace detail {

inline constexpr int kUnreached = std::numeric_limits<int>::max() / 4;

// BFS distances from one source over the undirected spacetime graph.
inline std::vector<int> bfs_distances(const SpacetimeGraph& g, int source) {
  std::vector<int> dist(g.n_vertices(), kUnreached);
  std::vector<int> queue;
  queue.reserve(g.n_vertices());
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int v = queue[head];
    for (const auto& [nbr, edge] : g.neighbors(v)) {
      if (dist[nbr] == kUnreached) {
        dist[nbr] = dist[v] + 1;
        queue.push_back(nbr);
      }
    }
  }
  return dist;
}

struct DreyfusWagnerChoice {
  enum Kind { None, Merge, Grow } kind = None;
  int merge_subset = 0;  // for Merge
  int grow_from = -1;    // predecessor vertex for Grow
  int grow_edge = -1;
};

}  // namespace detail

// Exact Steiner minimal tree over up to 8 terminals (Dreyfus–Wagner dynamic
// program). Ties resolve deterministically through the fixed vertex and edge
// scan order, which prefers earlier columns.
inline SpanningGraph minimal_spanning_graph(const SpacetimeGraph& g,
                                            const std::vector<int>& target_spins) {
  if (target_spins.empty()) throw config_error("target spin list is empty");
  if (target_spins.size() > 8) throw config_error("at most 8 target spins are supported");
  {
    std::vector<int> sorted = target_spins;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw config_error("target spins must be distinct");
    }
  }
  SpanningGraph result;
  result.requested_targets = target_spins;

  const int last_col = g.n_columns() - 1;
  std::vector<int> alive_targets;
  for (int s : target_spins) {
    if (s < 0 || s >= g.n_sites()) throw config_error("target spin out of range");
    if (g.final_alive(s)) {
      alive_targets.push_back(s);
    } else {
      result.dropped_targets.push_back(s);
    }
  }

  // Component labels, then keep the component holding the most targets.
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
  std::vector<int> votes(n_components, 0);
  for (int s : alive_targets) ++votes[component[g.vertex(s, last_col)]];
  int best_comp = -1;
  for (int s : alive_targets) {  // scan in target order so ties pick the first target's component
    const int c = component[g.vertex(s, last_col)];
    if (best_comp == -1 || votes[c] > votes[best_comp]) best_comp = c;
  }
  for (int s : alive_targets) {
    if (component[g.vertex(s, last_col)] == best_comp) {
      result.spanned_targets.push_back(s);
    } else {
      result.dropped_targets.push_back(s);
    }
  }
  result.connected = result.spanned_targets.size() == target_spins.size();
  if (result.spanned_targets.empty()) return result;

  std::vector<int> terminals;
  for (int s : result.spanned_targets) terminals.push_back(g.vertex(s, last_col));
  const int k = static_cast<int>(terminals.size());
  if (k == 1) {
    result.vertex_ids = {terminals[0]};
    return result;
  }

  const int V = g.n_vertices();
  const int full = (1 << k) - 1;
  std::vector<std::vector<int>> dist(k);
  for (int i = 0; i < k; ++i) dist[i] = detail::bfs_distances(g, terminals[i]);

  // dp[mask][v]: min edges of a tree containing terminal set `mask` plus v.
  std::vector<std::vector<int>> dp(full + 1, std::vector<int>(V, detail::kUnreached));
  std::vector<std::vector<detail::DreyfusWagnerChoice>> choice(
      full + 1, std::vector<detail::DreyfusWagnerChoice>(V));
  // Shortest-path predecessor per (mask, v) for path reconstruction.
  std::vector<std::vector<std::pair<int, int>>> pred(full + 1);

  for (int i = 0; i < k; ++i) {
    dp[1 << i] = dist[i];
  }

  for (int mask = 1; mask <= full; ++mask) {
    auto& d = dp[mask];
    auto& ch = choice[mask];
    if ((mask & (mask - 1)) != 0) {  // not a singleton: merge strictly smaller subsets
      const int low = mask & (-mask);
      for (int sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
        if (!(sub & low)) continue;  // enumerate each split once
        const int rest = mask ^ sub;
        const auto& a = dp[sub];
        const auto& b = dp[rest];
        for (int v = 0; v < V; ++v) {
          if (a[v] == detail::kUnreached || b[v] == detail::kUnreached) continue;
          const int cost = a[v] + b[v];
          if (cost < d[v]) {
            d[v] = cost;
            ch[v] = {detail::DreyfusWagnerChoice::Merge, sub, -1, -1};
          }
        }
      }
    }
    // Grow step: Dijkstra relaxation with unit weights from all current values.
    pred[mask].assign(V, {-1, -1});
    using Item = std::pair<int, int>;  // (cost, vertex)
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (int v = 0; v < V; ++v) {
      if (d[v] < detail::kUnreached) pq.push({d[v], v});
    }
    while (!pq.empty()) {
      const auto [cost, v] = pq.top();
      pq.pop();
      if (cost != d[v]) continue;
      for (const auto& [nbr, edge] : g.neighbors(v)) {
        if (cost + 1 < d[nbr]) {
          d[nbr] = cost + 1;
          choice[mask][nbr] = {detail::DreyfusWagnerChoice::Grow, 0, v, edge};
          pred[mask][nbr] = {v, edge};
          pq.push({d[nbr], nbr});
        }
      }
    }
  }

  const int root = terminals[0];
  result.edge_count = dp[full][root];

  // Reconstruction.
  std::vector<char> edge_in(g.edges().size(), 0);
  std::vector<char> vertex_in(V, 0);
  std::vector<std::pair<int, int>> stack{{full, root}};
  while (!stack.empty()) {
    const auto [mask, v] = stack.back();
    stack.pop_back();
    vertex_in[v] = 1;
    const detail::DreyfusWagnerChoice& c = choice[mask][v];
    if (c.kind == detail::DreyfusWagnerChoice::Grow) {
      edge_in[c.grow_edge] = 1;
      stack.push_back({mask, c.grow_from});
    } else if (c.kind == detail::DreyfusWagnerChoice::Merge) {
      stack.push_back({c.merge_subset, v});
      stack.push_back({mask ^ c.merge_subset, v});
    } else if ((mask & (mask - 1)) == 0) {
      // singleton: walk the BFS shortest path back to the terminal
      const int t = __builtin_ctz(mask);
      int cur = v;
      while (cur != terminals[t]) {
        // retrace one BFS step: any neighbor at distance-1 (first in scan order)
        bool stepped = false;
        for (const auto& [nbr, edge] : g.neighbors(cur)) {
          if (dist[t][nbr] + 1 == dist[t][cur]) {
            edge_in[edge] = 1;
            vertex_in[nbr] = 1;
            cur = nbr;
            stepped = true;
            break;
          }
        }
        if (!stepped) throw numerical_error("steiner reconstruction lost the BFS path");
      }
    }
  }

  for (int e = 0; e < static_cast<int>(g.edges().size()); ++e) {
    if (edge_in[e]) result.edge_ids.push_back(e);
  }
  for (int v = 0; v < V; ++v) {
    if (vertex_in[v]) result.vertex_ids.push_back(v);
  }
  int earliest = g.n_columns();
  for (int e : result.edge_ids) {
    if (g.edges()[e].type == EdgeType::Unitary) earliest = std::min(earliest, g.edges()[e].col_a);
  }
  for (int e : result.edge_ids) {
    const SpacetimeEdge& ed = g.edges()[e];
    if (ed.type == EdgeType::Unitary && ed.col_a == earliest) result.seed_edge_ids.push_back(e);
  }
  return result;
}

// Restricts the Steiner search to the forward cone of a single seed unitary
// and returns the best over all seeds whose cone covers every target; the
// paper-style single-seed reading of the construction.
inline SpanningGraph single_seed_spanning_graph(const SpacetimeGraph& g, const ConeForest& forest,
                                                const std::vector<int>& target_spins,
                                                const CircuitRecord& record) {
  SpanningGraph best;
  best.requested_targets = target_spins;
  for (int s : target_spins) {
    if (!g.final_alive(s)) best.dropped_targets.push_back(s);
  }
  bool found = false;
  for (const Cone& cone : forest.cones) {
    bool covers = true;
    for (int s : target_spins) {
      if (!std::binary_search(cone.final_sites.begin(), cone.final_sites.end(), s)) {
        covers = false;
        break;
      }
    }
    if (!covers) continue;

    // Rebuild the graph with measurements outside the cone left intact but
    // edges restricted to the cone's vertex set.
    CircuitRecord restricted = record;
    restricted.gate_events.clear();
    for (const GateEvent& ev : record.gate_events) {
      const int col = ev.layer / 2;
      if (cone.contains(ev.site_a, col) && cone.contains(ev.site_b, col)) {
        restricted.gate_events.push_back(ev);
      }
    }
    // Sever idle edges that exit the cone by inserting synthetic measurements.
    restricted.measurement_events = record.measurement_events;
    for (int col = 0; col + 1 < g.n_columns(); ++col) {
      for (int site = 0; site < g.n_sites(); ++site) {
        const bool inside_now = cone.contains(site, col);
        const bool inside_next = cone.contains(site, col + 1);
        if (!(inside_now && inside_next) && !g.measured(site, col)) {
          restricted.measurement_events.push_back({site, 2 * col + 1, 0, 1.0});
        }
      }
    }
    const SpacetimeGraph sub = SpacetimeGraph::build(restricted);
    SpanningGraph candidate = minimal_spanning_graph(sub, target_spins);
    if (!candidate.connected) continue;
    if (!found || candidate.edge_count < best.edge_count) {
      best = candidate;
      found = true;
    }
  }
  if (!found) {
    best.connected = false;
    best.edge_count = 0;
    for (int s : target_spins) {
      if (g.final_alive(s)) best.spanned_targets.push_back(s);
    }
    // no single cone covers the targets; report the empty graph
    best.spanned_targets.clear();
  }
  return best;
}

// Counts the escape edges of the spanning graph: edges leaving its vertex set
// whose far endpoint starts a path that reaches an alive complement spin at
// the final column without re-entering the graph. Larger scores mean more
// entanglement leaks from the targets into the complement.
inline int parasitic_score(const SpacetimeGraph& g, const SpanningGraph& gmin,
                           const std::vector<int>& targets,
                           const std::vector<int>& complement) {
  const int last_col = g.n_columns() - 1;
  std::vector<char> blocked(g.n_vertices(), 0);
  for (int v : gmin.vertex_ids) blocked[v] = 1;

  std::vector<char> reaches(g.n_vertices(), 0);
  std::vector<int> queue;
  for (int b : complement) {
    const int v = g.vertex(b, last_col);
    if (g.final_alive(b) && !blocked[v] && !reaches[v]) {
      reaches[v] = 1;
      queue.push_back(v);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (const auto& [nbr, edge] : g.neighbors(queue[head])) {
      if (!blocked[nbr] && !reaches[nbr]) {
        reaches[nbr] = 1;
        queue.push_back(nbr);
      }
    }
  }

  int score = 0;
  for (int v : gmin.vertex_ids) {
    for (const auto& [nbr, edge] : g.neighbors(v)) {
      if (!blocked[nbr] && reaches[nbr]) ++score;
    }
  }
  return score;
}

inline void write_layout(const SpacetimeGraph& g, const SpanningGraph* gmin,
                         const std::vector<int>& targets, std::ostream& os) {
  std::vector<char> target_flag(g.n_sites(), 0);
  for (int s : targets) target_flag[s] = 1;
  os << "section\tsite\tcol\tsite_b\tcol_b\ttype\tmeasured_next\tterminal\tin_gmin\n";
  for (int v = 0; v < g.n_vertices(); ++v) {
    const int site = g.site_of(v);
    const int col = g.col_of(v);
    const bool measured_next = col + 1 < g.n_columns() ? g.measured(site, col)
                                                       : !g.final_alive(site);
    const bool terminal = (col == g.n_columns() - 1) && target_flag[site] && g.final_alive(site);
    const bool in_gmin = gmin != nullptr && gmin->contains_vertex(v);
    os << "vertex\t" << site << "\t" << col << "\t-\t-\t-\t" << (measured_next ? 1 : 0) << "\t"
       << (terminal ? 1 : 0) << "\t" << (in_gmin ? 1 : 0) << "\n";
  }
  std::vector<char> edge_in(g.edges().size(), 0);
  if (gmin != nullptr) {
    for (int e : gmin->edge_ids) edge_in[e] = 1;
  }
  for (int e = 0; e < static_cast<int>(g.edges().size()); ++e) {
    const SpacetimeEdge& ed = g.edges()[e];
    os << "edge\t" << ed.site_a << "\t" << ed.col_a << "\t" << ed.site_b << "\t" << ed.col_b
       << "\t" << (ed.type == EdgeType::Unitary ? "U" : "I") << "\t-\t-\t"
       << (edge_in[e] ? 1 : 0) << "\n";
  }
}

}  // namespace mqc
