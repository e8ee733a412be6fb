#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "mqc/errors.hpp"
#include "mqc/rng.hpp"

namespace mqc {

using Complex = std::complex<double>;

enum class GateFamily { Haar, FloquetIsing };

// Parameters of the fixed kicked-Ising style gate. The defaults are
// placeholders, not a claim about any particular reference circuit; override
// them through the circuit config.
struct FloquetIsingParams {
  double j = 1.0;
  double g = 0.9045;
  double h = 0.809;

  friend bool operator==(const FloquetIsingParams&, const FloquetIsingParams&) = default;
};

// 4x4 unitary acting on an ordered pair of sites; the first site maps to the
// more significant bit of the gate index. Construction rejects non-unitary
// matrices so downstream code can assume norm preservation.
class TwoQubitGate {
 public:
  static constexpr double kUnitarityTolerance = 1e-12;

  TwoQubitGate(const Eigen::Matrix4cd& matrix, GateFamily family)
      : matrix_(matrix), family_(family) {
    const double defect =
        (matrix_.adjoint() * matrix_ - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff();
    if (!(defect <= kUnitarityTolerance)) {
      throw config_error("two-qubit gate is not unitary; U^H U deviates from identity by " +
                         std::to_string(defect));
    }
  }

  const Eigen::Matrix4cd& matrix() const { return matrix_; }
  GateFamily family() const { return family_; }

 private:
  Eigen::Matrix4cd matrix_;
  GateFamily family_;
};

// Haar-distributed 4x4 unitary: QR of a complex Ginibre matrix with the R
// diagonal phases absorbed into Q, which makes the distribution exactly
// left-invariant.
inline TwoQubitGate sample_haar_unitary(Rng& rng) {
  Eigen::Matrix4cd ginibre;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      ginibre(r, c) = Complex(rng.normal(), rng.normal());
    }
  }
  Eigen::HouseholderQR<Eigen::Matrix4cd> qr(ginibre);
  Eigen::Matrix4cd q = qr.householderQ();
  const Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < 4; ++i) {
    const Complex d = r(i, i);
    const double mag = std::abs(d);
    q.col(i) *= (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
  }
  return TwoQubitGate(q, GateFamily::Haar);
}

// exp(-i (J Z⊗Z + g (X⊗I + I⊗X) + h (Z⊗I + I⊗Z))) via eigendecomposition.
inline TwoQubitGate floquet_ising_gate(const FloquetIsingParams& p) {
  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  const double zz[4] = {1.0, -1.0, -1.0, 1.0};
  const double zsum[4] = {2.0, 0.0, 0.0, -2.0};
  for (int i = 0; i < 4; ++i) h(i, i) = p.j * zz[i] + p.h * zsum[i];
  // I⊗X flips the low bit, X⊗I the high bit.
  h(0, 1) += p.g;
  h(1, 0) += p.g;
  h(2, 3) += p.g;
  h(3, 2) += p.g;
  h(0, 2) += p.g;
  h(2, 0) += p.g;
  h(1, 3) += p.g;
  h(3, 1) += p.g;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i) phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i)));
  const Eigen::Matrix4cd u =
      es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return TwoQubitGate(u, GateFamily::FloquetIsing);
}

}  // namespace mqc
