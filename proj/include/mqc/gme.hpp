#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mqc/density.hpp"
#include "mqc/errors.hpp"
#include "mqc/optimize.hpp"
#include "mqc/rng.hpp"

namespace mqc {

// Criterion value plus optimizer metadata. For the witness-style criteria the
// reported value is clamped at zero; the raw optimum is kept alongside.
struct GMEResult {
  double value = 0.0;
  double raw_value = 0.0;
  int n_restarts = 0;
  long n_iterations = 0;
  bool converged = false;
};

inline OptimizerConfig default_w_opt() { return {24, 400, 1e-9, true}; }
inline OptimizerConfig default_i2_opt() { return {50, 500, 1e-9, true}; }
inline OptimizerConfig default_w4_opt() { return {50, 1500, 1e-9, true}; }
inline OptimizerConfig default_d_opt() { return {30, 2500, 1e-10, true}; }

namespace detail {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

// ZYZ Euler angles -> SU(2); global phases drop out of every criterion.
inline void su2_from_angles(const double* a, Complex u[4]) {
  const double c = std::cos(0.5 * a[1]);
  const double s = std::sin(0.5 * a[1]);
  const double plus = 0.5 * (a[0] + a[2]);
  const double minus = 0.5 * (a[0] - a[2]);
  u[0] = std::polar(c, -plus);
  u[1] = -std::polar(s, -minus);
  u[2] = std::polar(s, minus);
  u[3] = std::polar(c, plus);
}

inline void qubit_ket(double theta, double phi, Complex k[2]) {
  k[0] = Complex(std::cos(0.5 * theta), 0.0);
  k[1] = std::polar(std::sin(0.5 * theta), phi);
}

// Maximizes `f` over restart starting points; start 0 may be the fixed
// identity start. Enlarging n_restarts only appends starts, so the reported
// optimum is monotone in the budget.
template <typename F, typename StartGen>
GMEResult run_restarts(F&& f, StartGen&& make_start, const OptimizerConfig& opt, double step) {
  GMEResult res;
  double best = -1e300;
  const int total = std::max(1, opt.n_restarts);
  for (int r = 0; r < total; ++r) {
    const std::vector<double> x0 = make_start(r);
    const SimplexResult run = nelder_mead_minimize(
        [&](const std::vector<double>& x) { return -f(x); }, x0, step, opt.max_iterations,
        opt.tolerance);
    res.n_iterations += run.iterations;
    ++res.n_restarts;
    if (-run.value > best) {
      best = -run.value;
      res.converged = run.converged;
    }
  }
  res.raw_value = best;
  res.value = std::max(best, 0.0);
  return res;
}

class WObjective {
 public:
  explicit WObjective(const ReducedDensityMatrix& rho) {
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) rho_[8 * r + c] = rho.matrix(r, c);
    }
  }

  // 9 angles, three per local SU(2).
  double operator()(const std::vector<double>& angles) const {
    Complex u1[4], u2[4], u3[4];
    su2_from_angles(angles.data() + 0, u1);
    su2_from_angles(angles.data() + 3, u2);
    su2_from_angles(angles.data() + 6, u3);

    Complex k[64];
    for (int r = 0; r < 8; ++r) {
      const Complex f1 = u1[2 * ((r >> 2) & 1)];
      const Complex f1b = u1[2 * ((r >> 2) & 1) + 1];
      for (int c = 0; c < 8; ++c) {
        k[8 * r + c] = (((c >> 2) & 1) ? f1b : f1) * u2[2 * ((r >> 1) & 1) + ((c >> 1) & 1)] *
                       u3[2 * (r & 1) + (c & 1)];
      }
    }
    Complex t[64];
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < 8; ++j) acc += k[8 * r + j] * rho_[8 * j + c];
        t[8 * r + c] = acc;
      }
    }
    const auto entry = [&](int a, int b) {
      Complex acc(0.0, 0.0);
      for (int j = 0; j < 8; ++j) acc += t[8 * a + j] * std::conj(k[8 * b + j]);
      return acc;
    };
    const double d1 = std::max(0.0, entry(1, 1).real());
    const double d2 = std::max(0.0, entry(2, 2).real());
    const double d3 = std::max(0.0, entry(3, 3).real());
    const double d4 = std::max(0.0, entry(4, 4).real());
    const double d5 = std::max(0.0, entry(5, 5).real());
    const double d6 = std::max(0.0, entry(6, 6).real());
    return std::abs(entry(0, 7)) - std::sqrt(d1 * d6) - std::sqrt(d2 * d5) - std::sqrt(d3 * d4);
  }

 private:
  std::array<Complex, 64> rho_;
};

class I2Objective {
 public:
  explicit I2Objective(const ReducedDensityMatrix& rho) : m_(rho.m), dim_(1 << rho.m) {
    rho_.resize(dim_ * dim_);
    for (int r = 0; r < dim_; ++r) {
      for (int c = 0; c < dim_; ++c) rho_[dim_ * r + c] = rho.matrix(r, c);
    }
    // Swap sets, one per bipartition; swapping the complement gives the same
    // overlap, so pairs are listed once. Party 0 is the high bit.
    if (m_ == 3) {
      swap_sets_ = {0b100, 0b010, 0b001};
    } else {
      swap_sets_ = {0b1000, 0b0100, 0b0010, 0b0001, 0b1100, 0b1010, 0b1001};
    }
  }

  int n_params() const { return 4 * m_; }

  // Parameters: 2m single-qubit kets as (theta, phi) pairs; kets 0..m-1 make
  // the first copy, kets m..2m-1 the second.
  double operator()(const std::vector<double>& p) const {
    Complex kets[8][2];
    for (int q = 0; q < 2 * m_; ++q) qubit_ket(p[2 * q], p[2 * q + 1], kets[q]);

    Complex a[16], b[16];
    build_product(kets, 0u, false, a);
    build_product(kets, 0u, true, b);
    double val = std::abs(bilinear(a, b));
    for (unsigned mask : swap_sets_) {
      Complex as[16], bs[16];
      build_product(kets, mask, false, as);
      build_product(kets, mask, true, bs);
      const double qa = std::max(0.0, bilinear(as, as).real());
      const double qb = std::max(0.0, bilinear(bs, bs).real());
      val -= std::sqrt(qa * qb);
    }
    return val;
  }

 private:
  void build_product(const Complex kets[8][2], unsigned swap_mask, bool second_copy,
                     Complex* out) const {
    out[0] = Complex(1.0, 0.0);
    int len = 1;
    for (int i = 0; i < m_; ++i) {
      const bool swapped = (swap_mask >> (m_ - 1 - i)) & 1u;
      const int src = (swapped != second_copy) ? (m_ + i) : i;
      for (int j = len - 1; j >= 0; --j) {
        out[2 * j + 1] = out[j] * kets[src][1];
        out[2 * j] = out[j] * kets[src][0];
      }
      len *= 2;
    }
  }

  Complex bilinear(const Complex* x, const Complex* y) const {  // x^H rho y
    Complex acc(0.0, 0.0);
    for (int r = 0; r < dim_; ++r) {
      Complex row(0.0, 0.0);
      const Complex* rr = rho_.data() + dim_ * r;
      for (int c = 0; c < dim_; ++c) row += rr[c] * y[c];
      acc += std::conj(x[r]) * row;
    }
    return acc;
  }

  int m_;
  int dim_;
  std::vector<Complex> rho_;
  std::vector<unsigned> swap_sets_;
};

class W4Objective {
 public:
  static constexpr double kRejected = -1e100;

  explicit W4Objective(const ReducedDensityMatrix& rho) {
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) rho_[16 * r + c] = rho.matrix(r, c);
    }
  }

  // 32 reals: four 2x2 filters, re/im interleaved. Filters are gauge-fixed to
  // unit Frobenius norm; the filtered state is renormalized to unit trace.
  double operator()(const std::vector<double>& p) const {
    Complex f[4][4];
    for (int q = 0; q < 4; ++q) {
      double nrm2 = 0.0;
      for (int e = 0; e < 4; ++e) {
        f[q][e] = Complex(p[8 * q + 2 * e], p[8 * q + 2 * e + 1]);
        nrm2 += std::norm(f[q][e]);
      }
      if (nrm2 < 1e-24) return kRejected;
      const double inv = 1.0 / std::sqrt(nrm2);
      for (int e = 0; e < 4; ++e) f[q][e] *= inv;
    }

    Complex k[256];
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        k[16 * r + c] = f[0][(((r >> 3) & 1) << 1) | ((c >> 3) & 1)] *
                        f[1][(((r >> 2) & 1) << 1) | ((c >> 2) & 1)] *
                        f[2][(((r >> 1) & 1) << 1) | ((c >> 1) & 1)] *
                        f[3][((r & 1) << 1) | (c & 1)];
      }
    }
    Complex t[256];
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < 16; ++j) acc += k[16 * r + j] * rho_[16 * j + c];
        t[16 * r + c] = acc;
      }
    }
    const auto entry = [&](int a, int b) {
      Complex acc(0.0, 0.0);
      for (int j = 0; j < 16; ++j) acc += t[16 * a + j] * std::conj(k[16 * b + j]);
      return acc;
    };
    double trace = 0.0;
    for (int a = 0; a < 16; ++a) trace += entry(a, a).real();
    if (trace < 1e-12) return kRejected;
    const double inv = 1.0 / trace;

    const auto diag = [&](int a) { return std::max(0.0, entry(a, a).real()) * inv; };
    const double off = std::abs(entry(1, 2)) + std::abs(entry(1, 4)) + std::abs(entry(1, 8)) +
                       std::abs(entry(2, 4)) + std::abs(entry(2, 8)) + std::abs(entry(4, 8));
    const double d0 = diag(0);
    double val = off * inv - diag(1) - diag(2) - diag(4) - diag(8);
    for (int j : {3, 5, 6, 9, 10, 12}) val -= std::sqrt(d0 * diag(j));
    return val;
  }

 private:
  std::array<Complex, 256> rho_;
};

}  // namespace detail

// Eq-style three-spin biseparability witness: |rho_18| minus the geometric
// means of the anti-diagonal blocks, maximized over local unitaries. Positive
// values certify genuine 3-party entanglement; non-positive optima clamp to 0.
inline GMEResult w_criterion(const ReducedDensityMatrix& rho3, const OptimizerConfig& opt,
                             Rng& rng) {
  if (rho3.m != 3) throw config_error("w_criterion needs a 3-spin state");
  detail::WObjective f(rho3);
  return detail::run_restarts(
      f,
      [&](int r) {
        std::vector<double> x(9, 0.0);
        if (r == 0 && opt.include_identity_start) return x;
        for (int q = 0; q < 3; ++q) {
          x[3 * q + 0] = rng.uniform(0.0, detail::kTwoPi);
          x[3 * q + 1] = rng.uniform(0.0, detail::kPi);
          x[3 * q + 2] = rng.uniform(0.0, detail::kTwoPi);
        }
        return x;
      },
      opt, 0.4);
}

// Two-copy swap witness over product states of the doubled system; supports 3
// and 4 parties. Detects states the W criterion misses.
inline GMEResult i2_criterion(const ReducedDensityMatrix& rho, const OptimizerConfig& opt,
                              Rng& rng) {
  if (rho.m != 3 && rho.m != 4) throw config_error("i2_criterion supports 3 or 4 parties");
  detail::I2Objective f(rho);
  const int np = f.n_params();
  return detail::run_restarts(
      f,
      [&](int r) {
        std::vector<double> x(np, 0.0);
        if (r == 0 && opt.include_identity_start) return x;
        for (int q = 0; q < np / 2; ++q) {
          x[2 * q] = std::acos(1.0 - 2.0 * rng.uniform());
          x[2 * q + 1] = rng.uniform(0.0, detail::kTwoPi);
        }
        return x;
      },
      opt, 0.4);
}

// Four-spin witness built around the single-excitation block, maximized over
// local filter operations (which include local unitaries as a subset).
inline GMEResult w4_criterion(const ReducedDensityMatrix& rho4, const OptimizerConfig& opt,
                              Rng& rng) {
  if (rho4.m != 4) throw config_error("w4_criterion needs a 4-spin state");
  detail::W4Objective f(rho4);
  const auto identity_start = [] {
    std::vector<double> x(32, 0.0);
    for (int q = 0; q < 4; ++q) {
      x[8 * q + 0] = 1.0;  // F = I before normalization
      x[8 * q + 6] = 1.0;
    }
    return x;
  };
  return detail::run_restarts(
      f,
      [&](int r) {
        if (r == 0 && opt.include_identity_start) return identity_start();
        std::vector<double> x(32);
        for (;;) {
          for (double& v : x) v = rng.normal();
          if (f(x) > detail::W4Objective::kRejected) break;  // start annihilated the state
        }
        return x;
      },
      opt, 0.3);
}

// Mixture of up to k products of single-spin states; weights live on the
// simplex through a softmax with the first logit pinned.
struct SeparableAnsatz {
  int k = 1;
  std::vector<double> params;  // 9k Bloch entries then k-1 free logits

  static int n_params(int k) { return 9 * k + (k - 1); }
};

namespace detail {

class SepDistanceObjective {
 public:
  SepDistanceObjective(const ReducedDensityMatrix& rho, int k) : k_(k) {
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) rho_[8 * r + c] = rho.matrix(r, c);
    }
  }

  // Hilbert-Schmidt distance between rho and the ansatz state.
  double operator()(const std::vector<double>& p) const {
    double w[8];
    double z = 1.0;
    w[0] = 1.0;  // pinned logit
    for (int c = 1; c < k_; ++c) {
      const double logit = std::clamp(p[9 * k_ + c - 1], -40.0, 40.0);
      w[c] = std::exp(logit);
      z += w[c];
    }
    for (int c = 0; c < k_; ++c) w[c] /= z;

    std::array<Complex, 64> sep{};
    for (int c = 0; c < k_; ++c) {
      Complex s1[4], s2[4], s3[4];
      bloch_to_matrix(p.data() + 9 * c + 0, s1);
      bloch_to_matrix(p.data() + 9 * c + 3, s2);
      bloch_to_matrix(p.data() + 9 * c + 6, s3);
      Complex s12[16];
      for (int r = 0; r < 4; ++r) {
        for (int cc = 0; cc < 4; ++cc) {
          s12[4 * r + cc] = s1[2 * (r >> 1) + (cc >> 1)] * s2[2 * (r & 1) + (cc & 1)];
        }
      }
      for (int r = 0; r < 8; ++r) {
        for (int cc = 0; cc < 8; ++cc) {
          sep[8 * r + cc] +=
              w[c] * s12[4 * (r >> 1) + (cc >> 1)] * s3[2 * (r & 1) + (cc & 1)];
        }
      }
    }
    double acc = 0.0;
    for (int i = 0; i < 64; ++i) acc += std::norm(rho_[i] - sep[i]);
    return std::sqrt(acc);
  }

 private:
  static void bloch_to_matrix(const double* b, Complex out[4]) {
    double rx = b[0], ry = b[1], rz = b[2];
    const double n2 = rx * rx + ry * ry + rz * rz;
    if (n2 > 1.0) {  // project back onto the Bloch ball
      const double inv = 1.0 / std::sqrt(n2);
      rx *= inv;
      ry *= inv;
      rz *= inv;
    }
    out[0] = Complex(0.5 * (1.0 + rz), 0.0);
    out[1] = Complex(0.5 * rx, -0.5 * ry);
    out[2] = Complex(0.5 * rx, 0.5 * ry);
    out[3] = Complex(0.5 * (1.0 - rz), 0.0);
  }

  int k_;
  std::array<Complex, 64> rho_;
};

}  // namespace detail

// Distance from a 3-spin state to the fully separable set, minimized over
// mixtures of product states with k = 1..k_max components. Each k starts from
// the previous optimum with a zero-weight extra component, so the result is
// monotone non-increasing in k.
inline GMEResult geometric_entanglement(const ReducedDensityMatrix& rho, int k_max,
                                        const OptimizerConfig& opt, Rng& rng) {
  if (rho.m != 3) throw config_error("geometric_entanglement needs a 3-spin state");
  if (k_max < 1 || k_max > 7) throw config_error("mixture size must be in 1..7");

  // Product of the marginals: the natural first start, exact on product states.
  std::vector<double> marginal(9, 0.0);
  for (int s = 0; s < 3; ++s) {
    const ReducedDensityMatrix one = partial_trace(rho, {s});
    marginal[3 * s + 0] = 2.0 * one.matrix(0, 1).real();
    marginal[3 * s + 1] = -2.0 * one.matrix(0, 1).imag();
    marginal[3 * s + 2] = one.matrix(0, 0).real() - one.matrix(1, 1).real();
  }

  GMEResult res;
  double best = 1e300;
  std::vector<double> chained = marginal;  // optimum at the previous k
  for (int k = 1; k <= k_max; ++k) {
    detail::SepDistanceObjective f(rho, k);
    const int np = SeparableAnsatz::n_params(k);

    std::vector<double> grow = chained;
    if (k > 1) {
      // new component: copy of component 0 at ~zero weight
      grow.insert(grow.begin() + 9 * (k - 1), chained.begin(), chained.begin() + 9);
      grow.push_back(-40.0);
    }

    double best_k = 1e300;
    std::vector<double> best_x;
    const int total = std::max(1, opt.n_restarts);
    for (int r = 0; r < total; ++r) {
      std::vector<double> x0;
      if (r == 0) {
        x0 = grow;
      } else {
        x0.resize(np);
        for (int c = 0; c < k; ++c) {
          for (int d = 0; d < 9; ++d) x0[9 * c + d] = rng.uniform(-1.0, 1.0);
        }
        for (int c = 0; c < k - 1; ++c) x0[9 * k + c] = rng.uniform(-2.0, 2.0);
      }
      const SimplexResult run =
          nelder_mead_minimize(f, x0, 0.2, opt.max_iterations, opt.tolerance);
      res.n_iterations += run.iterations;
      ++res.n_restarts;
      if (run.value < best_k) {
        best_k = run.value;
        best_x = run.x;
        if (run.value < best) res.converged = run.converged;
      }
    }
    chained = best_x;
    best = std::min(best, best_k);
  }
  res.value = best;
  res.raw_value = best;
  return res;
}

// Random mixtures of the three bipartite-product forms of a 3-party
// biseparable state; factors are Hilbert-Schmidt random, weights uniform on
// the simplex. Used by the no-false-positive validity suites.
inline ReducedDensityMatrix sample_biseparable_3(Rng& rng, int max_terms = 3) {
  const int n_terms = 1 + static_cast<int>(rng.below(max_terms));
  std::vector<double> weights(n_terms);
  double z = 0.0;
  for (double& w : weights) {
    w = -std::log(1.0 - rng.uniform());
    z += w;
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(8, 8);
  for (int t = 0; t < n_terms; ++t) {
    const int form = static_cast<int>(rng.below(3));
    const Eigen::MatrixXcd single = random_density_matrix(2, rng);
    const Eigen::MatrixXcd pair = random_density_matrix(4, rng);
    Eigen::MatrixXcd term;
    if (form == 0) {
      term = kron(single, pair);  // 1 | 23
    } else if (form == 1) {
      ReducedDensityMatrix tmp{3, kron(pair, single)};  // slots (1,3,2)
      term = permute_spins(tmp, {0, 2, 1}).matrix;      // 13 | 2
    } else {
      term = kron(pair, single);  // 12 | 3
    }
    rho += (weights[t] / z) * term;
  }
  return {3, std::move(rho)};
}

// Same construction over the seven bipartitions of four parties.
inline ReducedDensityMatrix sample_biseparable_4(Rng& rng, int max_terms = 3) {
  static const std::vector<std::vector<int>> bipartitions = {
      {0}, {1}, {2}, {3}, {0, 1}, {0, 2}, {0, 3}};
  const int n_terms = 1 + static_cast<int>(rng.below(max_terms));
  std::vector<double> weights(n_terms);
  double z = 0.0;
  for (double& w : weights) {
    w = -std::log(1.0 - rng.uniform());
    z += w;
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(16, 16);
  for (int t = 0; t < n_terms; ++t) {
    const auto& part = bipartitions[rng.below(bipartitions.size())];
    std::vector<int> order = part;
    for (int s = 0; s < 4; ++s) {
      if (std::find(part.begin(), part.end(), s) == part.end()) order.push_back(s);
    }
    const Eigen::MatrixXcd a = random_density_matrix(1 << part.size(), rng);
    const Eigen::MatrixXcd b = random_density_matrix(1 << (4 - part.size()), rng);
    ReducedDensityMatrix tmp{4, kron(a, b)};  // slots in `order`
    std::vector<int> source_of(4);
    for (int q = 0; q < 4; ++q) {
      source_of[q] =
          static_cast<int>(std::find(order.begin(), order.end(), q) - order.begin());
    }
    rho += (weights[t] / z) * permute_spins(tmp, source_of).matrix;
  }
  return {4, std::move(rho)};
}

}  // namespace mqc
