#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mqc/errors.hpp"
#include "mqc/rng.hpp"
#include "mqc/state.hpp"

namespace mqc {

inline constexpr int kMaxKeptSpins = 12;

// Reduced density matrix of m spins in the computational basis. Spin order is
// the keep-list order; the first kept spin is the most significant bit.
struct ReducedDensityMatrix {
  int m = 0;
  Eigen::MatrixXcd matrix;

  int dim() const { return 1 << m; }
};

inline double hermiticity_defect(const Eigen::MatrixXcd& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const Eigen::MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace detail {

inline void check_keep_list(int n_slots, const std::vector<int>& keep) {
  if (keep.empty() || static_cast<int>(keep.size()) > kMaxKeptSpins) {
    throw config_error("keep list must name between 1 and " + std::to_string(kMaxKeptSpins) +
                       " spins");
  }
  std::vector<char> seen(n_slots, 0);
  for (int s : keep) {
    if (s < 0 || s >= n_slots) throw config_error("kept spin out of range");
    if (seen[s]++) throw config_error("kept spins must be distinct");
  }
}

}  // namespace detail

inline ReducedDensityMatrix partial_trace(const StateVector& state,
                                          const std::vector<int>& keep) {
  const int L = state.n_qubits();
  detail::check_keep_list(L, keep);
  const int m = static_cast<int>(keep.size());

  std::vector<char> kept(L, 0);
  for (int s : keep) kept[s] = 1;
  std::vector<int> env;
  env.reserve(L - m);
  for (int s = 0; s < L; ++s) {
    if (!kept[s]) env.push_back(s);
  }

  const int dim_keep = 1 << m;
  const std::size_t dim_env = std::size_t{1} << env.size();

  std::vector<std::uint64_t> keep_off(dim_keep, 0);
  for (int r = 0; r < dim_keep; ++r) {
    std::uint64_t off = 0;
    for (int a = 0; a < m; ++a) {
      if ((r >> (m - 1 - a)) & 1) off |= 1ULL << (L - 1 - keep[a]);
    }
    keep_off[r] = off;
  }
  std::vector<std::uint64_t> env_off(dim_env, 0);
  for (std::size_t e = 0; e < dim_env; ++e) {
    std::uint64_t off = 0;
    for (std::size_t a = 0; a < env.size(); ++a) {
      if ((e >> (env.size() - 1 - a)) & 1) off |= 1ULL << (L - 1 - env[a]);
    }
    env_off[e] = off;
  }

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim_keep, dim_keep);
  const auto& amp = state.amplitudes();
  for (std::size_t e = 0; e < dim_env; ++e) {
    const std::uint64_t base = env_off[e];
    for (int r = 0; r < dim_keep; ++r) {
      const Complex ar = amp[base | keep_off[r]];
      for (int c = 0; c <= r; ++c) {
        rho(r, c) += ar * std::conj(amp[base | keep_off[c]]);
      }
    }
  }
  for (int r = 0; r < dim_keep; ++r) {
    for (int c = r + 1; c < dim_keep; ++c) rho(r, c) = std::conj(rho(c, r));
  }
  return {m, std::move(rho)};
}

// Trace over the spins of `rho` that are not listed in `keep`; indices refer
// to rho's own spin slots.
inline ReducedDensityMatrix partial_trace(const ReducedDensityMatrix& rho,
                                          const std::vector<int>& keep) {
  detail::check_keep_list(rho.m, keep);
  const int m_out = static_cast<int>(keep.size());

  std::vector<char> kept(rho.m, 0);
  for (int s : keep) kept[s] = 1;
  std::vector<int> env;
  for (int s = 0; s < rho.m; ++s) {
    if (!kept[s]) env.push_back(s);
  }

  const int dim_out = 1 << m_out;
  const int dim_env = 1 << env.size();
  auto full_index = [&](int out_idx, int env_idx) {
    int f = 0;
    for (int a = 0; a < m_out; ++a) {
      if ((out_idx >> (m_out - 1 - a)) & 1) f |= 1 << (rho.m - 1 - keep[a]);
    }
    for (std::size_t a = 0; a < env.size(); ++a) {
      if ((env_idx >> (env.size() - 1 - a)) & 1) f |= 1 << (rho.m - 1 - env[a]);
    }
    return f;
  };

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_out, dim_out);
  for (int r = 0; r < dim_out; ++r) {
    for (int c = 0; c < dim_out; ++c) {
      Complex acc(0.0, 0.0);
      for (int e = 0; e < dim_env; ++e) acc += rho.matrix(full_index(r, e), full_index(c, e));
      out(r, c) = acc;
    }
  }
  return {m_out, std::move(out)};
}

// Transposes the listed spin slots.
inline Eigen::MatrixXcd partial_transpose(const ReducedDensityMatrix& rho,
                                          const std::vector<int>& transposed) {
  if (transposed.empty()) return rho.matrix;
  std::vector<char> seen(rho.m, 0);
  int mask = 0;
  for (int s : transposed) {
    if (s < 0 || s >= rho.m) throw config_error("transposed spin out of range");
    if (seen[s]++) throw config_error("transposed spins must be distinct");
    mask |= 1 << (rho.m - 1 - s);
  }
  const int d = rho.dim();
  Eigen::MatrixXcd out(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      const int rp = (r & ~mask) | (c & mask);
      const int cp = (c & ~mask) | (r & mask);
      out(rp, cp) = rho.matrix(r, c);
    }
  }
  return out;
}

// log2 of the trace norm of the partial transpose, clamped at zero against
// round-off on PPT states.
inline double log_negativity(const ReducedDensityMatrix& rho, const std::vector<int>& partition) {
  if (partition.empty() || static_cast<int>(partition.size()) >= rho.m) {
    throw config_error("negativity partition must be a proper nonempty spin subset");
  }
  const Eigen::MatrixXcd pt = partial_transpose(rho, partition);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt, Eigen::EigenvaluesOnly);
  double trace_norm = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) trace_norm += std::abs(es.eigenvalues()(i));
  return std::max(0.0, std::log2(trace_norm));
}

// Reorders spin slots: new slot q holds the spin that was at source_of[q].
inline ReducedDensityMatrix permute_spins(const ReducedDensityMatrix& rho,
                                          const std::vector<int>& source_of) {
  if (static_cast<int>(source_of.size()) != rho.m) {
    throw config_error("permutation size must match spin count");
  }
  std::vector<char> seen(rho.m, 0);
  for (int s : source_of) {
    if (s < 0 || s >= rho.m || seen[s]++) throw config_error("invalid spin permutation");
  }
  const int d = rho.dim();
  std::vector<int> remap(d, 0);
  for (int old = 0; old < d; ++old) {
    int nw = 0;
    for (int q = 0; q < rho.m; ++q) {
      if ((old >> (rho.m - 1 - source_of[q])) & 1) nw |= 1 << (rho.m - 1 - q);
    }
    remap[old] = nw;
  }
  Eigen::MatrixXcd out(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) out(remap[r], remap[c]) = rho.matrix(r, c);
  }
  return {rho.m, std::move(out)};
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

// Hilbert-Schmidt random state: G G^H / tr for a complex Ginibre G.
inline Eigen::MatrixXcd random_density_matrix(int dim, Rng& rng) {
  Eigen::MatrixXcd g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
  }
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

// Single-spin state from a Bloch vector, |r| <= 1.
inline Eigen::Matrix2cd bloch_density(double rx, double ry, double rz) {
  Eigen::Matrix2cd rho;
  rho(0, 0) = Complex(0.5 * (1.0 + rz), 0.0);
  rho(0, 1) = Complex(0.5 * rx, -0.5 * ry);
  rho(1, 0) = Complex(0.5 * rx, 0.5 * ry);
  rho(1, 1) = Complex(0.5 * (1.0 - rz), 0.0);
  return rho;
}

inline ReducedDensityMatrix density_from_state(const StateVector& state) {
  std::vector<int> all(state.n_qubits());
  for (int s = 0; s < state.n_qubits(); ++s) all[s] = s;
  return partial_trace(state, all);
}

}  // namespace mqc
