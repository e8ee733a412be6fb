#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "mqc/errors.hpp"
#include "mqc/gate.hpp"
#include "mqc/rng.hpp"

namespace mqc {

// One projective z-measurement, with the Born probability the recorded
// outcome had at sampling time.
struct MeasurementEvent {
  int site = 0;
  int layer = -1;
  int outcome = 0;
  double pre_probability = 0.0;

  friend bool operator==(const MeasurementEvent&, const MeasurementEvent&) = default;
};

// Dense pure state of L qubits. Site 0 is the leftmost spin and maps to the
// most significant bit of the amplitude index; partial traces and all
// criterion index conventions rely on this ordering.
class StateVector {
 public:
  explicit StateVector(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 28) {
      throw config_error("qubit count must be between 1 and 28, got " +
                         std::to_string(n_qubits));
    }
    amps_.assign(std::size_t{1} << n_, Complex(0.0, 0.0));
    amps_[0] = Complex(1.0, 0.0);
  }

  static StateVector from_amplitudes(std::vector<Complex> amps) {
    int n = 0;
    while ((std::size_t{1} << n) < amps.size()) ++n;
    if ((std::size_t{1} << n) != amps.size() || amps.empty()) {
      throw config_error("amplitude count must be a power of two");
    }
    StateVector psi(n);
    psi.amps_ = std::move(amps);
    const double norm2 = psi.norm_sq();
    if (std::abs(norm2 - 1.0) > 1e-8) {
      throw config_error("amplitudes are not normalized, |psi|^2 = " + std::to_string(norm2));
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (Complex& a : psi.amps_) a *= scale;
    return psi;
  }

  int n_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  std::vector<Complex>& amplitudes() { return amps_; }

  // Bit position of a site within an amplitude index.
  int bit_of_site(int site) const { return n_ - 1 - site; }

  double norm_sq() const {
    double sum = 0.0, comp = 0.0;
    for (const Complex& a : amps_) {
      const double term = std::norm(a);
      const double t = sum + term;
      if (std::abs(sum) >= std::abs(term)) {
        comp += (sum - t) + term;
      } else {
        comp += (term - t) + sum;
      }
      sum = t;
    }
    return sum + comp;
  }

  void apply_two_qubit_gate(const TwoQubitGate& gate, int site_i, int site_j) {
    check_site(site_i);
    check_site(site_j);
    if (site_i == site_j) throw config_error("gate sites must be distinct");

    const int bi = bit_of_site(site_i);
    const int bj = bit_of_site(site_j);
    const std::uint64_t mi = 1ULL << bi;
    const std::uint64_t mj = 1ULL << bj;
    const std::uint64_t mask_lo = (1ULL << std::min(bi, bj)) - 1;
    const std::uint64_t mask_hi = (1ULL << std::max(bi, bj)) - 1;

    Complex u[16];
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) u[4 * r + c] = gate.matrix()(r, c);
    }

    const std::uint64_t quarter = amps_.size() >> 2;
    for (std::uint64_t k = 0; k < quarter; ++k) {
      std::uint64_t t = ((k & ~mask_lo) << 1) | (k & mask_lo);
      t = ((t & ~mask_hi) << 1) | (t & mask_hi);
      const std::uint64_t i01 = t | mj;
      const std::uint64_t i10 = t | mi;
      const std::uint64_t i11 = t | mi | mj;
      const Complex a00 = amps_[t], a01 = amps_[i01], a10 = amps_[i10], a11 = amps_[i11];
      amps_[t] = u[0] * a00 + u[1] * a01 + u[2] * a10 + u[3] * a11;
      amps_[i01] = u[4] * a00 + u[5] * a01 + u[6] * a10 + u[7] * a11;
      amps_[i10] = u[8] * a00 + u[9] * a01 + u[10] * a10 + u[11] * a11;
      amps_[i11] = u[12] * a00 + u[13] * a01 + u[14] * a10 + u[15] * a11;
    }
  }

  double z_one_probability(int site) const {
    check_site(site);
    const std::uint64_t m = 1ULL << bit_of_site(site);
    double p1 = 0.0;
    for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
      if (idx & m) p1 += std::norm(amps_[idx]);
    }
    return p1;
  }

  // Projects onto `outcome` at `site` and renormalizes immediately, so the
  // norm cannot drift over deep circuits. Returns the raw Born weight.
  double project_z(int site, int outcome) {
    check_site(site);
    const std::uint64_t m = 1ULL << bit_of_site(site);
    const std::uint64_t want = outcome ? m : 0ULL;
    double p_keep = 0.0;
    for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
      if ((idx & m) == want) p_keep += std::norm(amps_[idx]);
    }
    if (p_keep < 1e-14) {
      throw numerical_error("projection onto an outcome of vanishing Born probability");
    }
    const double scale = 1.0 / std::sqrt(p_keep);
    for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
      amps_[idx] = ((idx & m) == want) ? amps_[idx] * scale : Complex(0.0, 0.0);
    }
    return p_keep;
  }

  MeasurementEvent measure_z(int site, Rng& rng, int layer = -1) {
    check_site(site);
    const std::uint64_t m = 1ULL << bit_of_site(site);
    double p0 = 0.0, p1 = 0.0;
    for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
      const double w = std::norm(amps_[idx]);
      if (idx & m) {
        p1 += w;
      } else {
        p0 += w;
      }
    }
    if (p0 < 1e-14 && p1 < 1e-14) {
      throw numerical_error("state norm collapsed; both measurement outcomes vanish");
    }
    const double total = p0 + p1;
    const int outcome = (rng.uniform() * total < p0) ? 0 : 1;
    const double p_keep = project_z(site, outcome);

    MeasurementEvent ev;
    ev.site = site;
    ev.layer = layer;
    ev.outcome = outcome;
    ev.pre_probability = p_keep / total;
    return ev;
  }

 private:
  void check_site(int site) const {
    if (site < 0 || site >= n_) {
      throw config_error("site " + std::to_string(site) + " out of range for " +
                         std::to_string(n_) + " qubits");
    }
  }

  int n_;
  std::vector<Complex> amps_;
};

}  // namespace mqc
