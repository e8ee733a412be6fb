#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "mqc/density.hpp"
#include "mqc/gate.hpp"
#include "mqc/rng.hpp"
#include "mqc/state.hpp"
#include "support/testutil.hpp"

using namespace mqc;

namespace {

Eigen::Matrix4cd swap_matrix() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = m(3, 3) = 1.0;
  m(1, 2) = m(2, 1) = 1.0;
  return m;
}

Eigen::Matrix4cd hadamard_on_first() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd h;
  h << r, r, r, -r;
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      out(2 * a + 0, 2 * b + 0) = h(a, b);
      out(2 * a + 1, 2 * b + 1) = h(a, b);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("identity gate leaves the state bitwise unchanged") {
  Rng rng(7);
  StateVector psi = testutil::random_state(4, rng);
  const std::vector<Complex> before = psi.amplitudes();
  const TwoQubitGate id(Eigen::Matrix4cd::Identity(), GateFamily::Haar);
  psi.apply_two_qubit_gate(id, 1, 3);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(psi.amplitudes()[i] == before[i]);
  }
}

TEST_CASE("SWAP maps |01> at sites (0,1) to |10>") {
  StateVector psi = testutil::basis_state(2, 0b01);
  psi.apply_two_qubit_gate(TwoQubitGate(swap_matrix(), GateFamily::Haar), 0, 1);
  CHECK(std::abs(psi.amplitudes()[0b10] - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(psi.amplitudes()[0b01]) < 1e-15);
}

TEST_CASE("H on the first gate slot turns |00> into (|00>+|10>)/sqrt2") {
  StateVector psi(2);
  psi.apply_two_qubit_gate(TwoQubitGate(hadamard_on_first(), GateFamily::Haar), 0, 1);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(psi.amplitudes()[0b00] - Complex(r, 0)) < 1e-12);
  CHECK(std::abs(psi.amplitudes()[0b10] - Complex(r, 0)) < 1e-12);
  CHECK(std::abs(psi.amplitudes()[0b01]) < 1e-15);
  CHECK(std::abs(psi.amplitudes()[0b11]) < 1e-15);
}

TEST_CASE("gate construction rejects non-unitary matrices and bad sites") {
  Eigen::Matrix4cd bad = Eigen::Matrix4cd::Identity();
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(TwoQubitGate(bad, GateFamily::Haar), config_error);

  StateVector psi(3);
  const TwoQubitGate id(Eigen::Matrix4cd::Identity(), GateFamily::Haar);
  CHECK_THROWS_AS(psi.apply_two_qubit_gate(id, 0, 3), config_error);
  CHECK_THROWS_AS(psi.apply_two_qubit_gate(id, -1, 1), config_error);
  CHECK_THROWS_AS(psi.apply_two_qubit_gate(id, 2, 2), config_error);
}

TEST_CASE("norm is preserved through random gate strings") {
  Rng rng(21);
  StateVector psi(6);
  for (int step = 0; step < 60; ++step) {
    const int a = static_cast<int>(rng.below(6));
    int b = static_cast<int>(rng.below(6));
    while (b == a) b = static_cast<int>(rng.below(6));
    psi.apply_two_qubit_gate(sample_haar_unitary(rng), a, b);
    CHECK(std::abs(psi.norm_sq() - 1.0) <= 1e-12);
  }
}

TEST_CASE("gates act locally: spectator qubits keep their reduced state") {
  Rng rng(5);
  StateVector psi = testutil::random_state(5, rng);
  const Eigen::MatrixXcd spectator_before = partial_trace(psi, {4}).matrix;
  psi.apply_two_qubit_gate(sample_haar_unitary(rng), 1, 2);
  const Eigen::MatrixXcd spectator_after = partial_trace(psi, {4}).matrix;
  CHECK((spectator_before - spectator_after).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("measuring an eigenstate returns the eigenvalue and keeps the state") {
  Rng rng(3);
  StateVector psi = testutil::basis_state(3, 0b010);
  const MeasurementEvent ev = psi.measure_z(1, rng);
  CHECK(ev.outcome == 1);
  CHECK(ev.pre_probability == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(psi.amplitudes()[0b010] - Complex(1, 0)) < 1e-12);
}

TEST_CASE("equal superposition measures 0 with probability one half") {
  long zeros = 0;
  const int n = 20000;
  Rng rng(11);
  for (int trial = 0; trial < n; ++trial) {
    const double r = 1.0 / std::sqrt(2.0);
    StateVector psi = StateVector::from_amplitudes({Complex(r, 0), Complex(r, 0)});
    const MeasurementEvent ev = psi.measure_z(0, rng);
    CHECK(ev.pre_probability == doctest::Approx(0.5).epsilon(1e-9));
    if (ev.outcome == 0) {
      ++zeros;
      CHECK(std::abs(psi.amplitudes()[0] - Complex(1, 0)) < 1e-12);
    } else {
      CHECK(std::abs(psi.amplitudes()[1] - Complex(1, 0)) < 1e-12);
    }
  }
  // 5 sigma band around n/2
  const double sigma = std::sqrt(0.25 * n);
  CHECK(std::abs(zeros - n / 2.0) < 5.0 * sigma);
}

TEST_CASE("measuring one spin of a Bell pair collapses to a product state") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    StateVector psi = testutil::bell_pair();
    const MeasurementEvent ev = psi.measure_z(0, rng);
    const unsigned long long expect = ev.outcome ? 0b11 : 0b00;
    CHECK(std::abs(psi.amplitudes()[expect] - Complex(1, 0)) < 1e-12);
    const ReducedDensityMatrix other = partial_trace(psi, {1});
    CHECK(std::abs(other.matrix(ev.outcome, ev.outcome).real() - 1.0) < 1e-12);
  }
}

TEST_CASE("measurement is idempotent") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    StateVector psi = testutil::random_state(4, rng);
    const MeasurementEvent first = psi.measure_z(2, rng);
    const MeasurementEvent second = psi.measure_z(2, rng);
    CHECK(second.outcome == first.outcome);
    CHECK(second.pre_probability == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("a zeroed state is rejected as corrupt") {
  StateVector psi(2);
  for (Complex& a : psi.amplitudes()) a = Complex(0, 0);
  Rng rng(1);
  CHECK_THROWS_AS(psi.measure_z(0, rng), numerical_error);
}

TEST_CASE("haar samples are unitary with unit determinant") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const TwoQubitGate g = sample_haar_unitary(rng);
    const double defect =
        (g.matrix().adjoint() * g.matrix() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff();
    CHECK(defect <= 1e-12);
    CHECK(std::abs(std::abs(g.matrix().determinant()) - 1.0) <= 1e-10);
  }
}

TEST_CASE("haar first and second moments match the flat distribution") {
  // E[U_ij] = 0 and E[|U_ij|^2] = 1/4 within 5 sigma at 1e5 samples, both for
  // U and for V U with a fixed unitary V (left invariance).
  const int n = 100000;
  Rng rng(29);
  const Eigen::Matrix4cd v = sample_haar_unitary(rng).matrix();

  Eigen::Matrix4cd mean_u = Eigen::Matrix4cd::Zero();
  Eigen::Matrix4cd mean_vu = Eigen::Matrix4cd::Zero();
  Eigen::Matrix4d mean_sq_u = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d mean_sq_vu = Eigen::Matrix4d::Zero();
  for (int s = 0; s < n; ++s) {
    const Eigen::Matrix4cd u = sample_haar_unitary(rng).matrix();
    const Eigen::Matrix4cd vu = v * u;
    mean_u += u;
    mean_vu += vu;
    mean_sq_u += u.cwiseAbs2();
    mean_sq_vu += vu.cwiseAbs2();
  }
  mean_u /= n;
  mean_vu /= n;
  mean_sq_u /= n;
  mean_sq_vu /= n;

  // var(|U_ij|^2) = 3/80 for a 4x4 Haar unitary; var(Re U_ij) ~ 1/8.
  const double sigma_sq = std::sqrt(3.0 / 80.0 / n);
  const double sigma_lin = std::sqrt(0.125 / n);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      CHECK(std::abs(mean_sq_u(r, c) - 0.25) < 5.0 * sigma_sq);
      CHECK(std::abs(mean_sq_vu(r, c) - 0.25) < 5.0 * sigma_sq);
      CHECK(std::abs(mean_u(r, c)) < 5.0 * sigma_lin);
      CHECK(std::abs(mean_vu(r, c)) < 5.0 * sigma_lin);
    }
  }
}

TEST_CASE("mean one-qubit purity after one haar gate on |00> is 4/5") {
  const int n = 100000;
  Rng rng(31);
  double sum = 0.0;
  for (int s = 0; s < n; ++s) {
    StateVector psi(2);
    psi.apply_two_qubit_gate(sample_haar_unitary(rng), 0, 1);
    const Eigen::MatrixXcd rho = partial_trace(psi, {0}).matrix;
    sum += (rho * rho).trace().real();
  }
  CHECK(std::abs(sum / n - 0.800) < 0.005);
}

TEST_CASE("floquet ising gate is unitary and parameter-sensitive") {
  const TwoQubitGate a = floquet_ising_gate({1.0, 0.9045, 0.809});
  const TwoQubitGate b = floquet_ising_gate({1.0, 0.5, 0.809});
  CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() > 1e-3);
  CHECK((a.matrix().adjoint() * a.matrix() - Eigen::Matrix4cd::Identity())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  // g = h = 0 leaves the computational basis invariant up to phases
  const TwoQubitGate diag = floquet_ising_gate({0.7, 0.0, 0.0});
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r != c) CHECK(std::abs(diag.matrix()(r, c)) < 1e-12);
    }
  }
}
