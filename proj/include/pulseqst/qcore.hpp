#ifndef PULSEQST_QCORE_HPP
#define PULSEQST_QCORE_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace pulseqst {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Qubit 1 is the leftmost tensor factor; basis index reads qubit 1 as the
// most significant bit. |0> = (1, 0)^T.

inline const CMat& pauli(int idx) {
  static const CMat table[4] = {
      (CMat(2, 2) << 1, 0, 0, 1).finished(),
      (CMat(2, 2) << 0, 1, 1, 0).finished(),
      (CMat(2, 2) << 0, Complex(0, -1), Complex(0, 1), 0).finished(),
      (CMat(2, 2) << 1, 0, 0, -1).finished()};
  if (idx < 0 || idx > 3) throw std::invalid_argument("pauli: label outside {0,1,2,3}");
  return table[idx];
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Tensor product of single-qubit Paulis, qubit order; labels in {0,1,2,3}.
inline CMat pauli_string(int n, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("pauli_string: labels length must equal n");
  CMat out = CMat::Identity(1, 1);
  for (int label : labels) out = kron(out, pauli(label));
  return out;
}

inline bool is_hermitian(const CMat& h, double tol) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// U = exp(-i * scale * h) via eigendecomposition of the Hermitian h.
inline CMat expm_hermitian(const CMat& h, double scale) {
  if (h.rows() != h.cols()) throw std::invalid_argument("expm_hermitian: non-square");
  if (!is_hermitian(h, 1e-8)) throw std::invalid_argument("expm_hermitian: non-Hermitian input");
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  CVec phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    phases(k) = std::exp(Complex(0, -scale * es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

struct PureState {
  int n = 0;
  CVec amplitudes;

  PureState() = default;
  PureState(int n_, CVec amps) : n(n_), amplitudes(std::move(amps)) {
    if (amplitudes.size() != (Eigen::Index{1} << n))
      throw std::invalid_argument("PureState: amplitude length != 2^n");
    if (std::abs(amplitudes.norm() - 1.0) > 1e-10)
      throw std::invalid_argument("PureState: not normalized");
  }

  static PureState ground(int n) {
    CVec v = CVec::Zero(Eigen::Index{1} << n);
    v(0) = 1.0;
    return PureState(n, std::move(v));
  }
};

struct DensityMatrix {
  int n = 0;
  CMat matrix;

  DensityMatrix() = default;
  DensityMatrix(int n_, CMat m) : n(n_), matrix(std::move(m)) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    if (matrix.rows() != dim || matrix.cols() != dim)
      throw std::invalid_argument("DensityMatrix: dim != 2^n");
    if (!is_hermitian(matrix, 1e-10))
      throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(matrix.trace().real() - 1.0) > 1e-10 ||
        std::abs(matrix.trace().imag()) > 1e-10)
      throw std::invalid_argument("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<CMat> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9)
      throw std::invalid_argument("DensityMatrix: not positive semidefinite");
  }

  static DensityMatrix from_pure(const PureState& psi) {
    return DensityMatrix(psi.n, psi.amplitudes * psi.amplitudes.adjoint());
  }

  static DensityMatrix maximally_mixed(int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    return DensityMatrix(n, CMat::Identity(dim, dim) / static_cast<double>(dim));
  }

  double purity() const { return (matrix * matrix).trace().real(); }
};

/// F(rho, sigma) = Tr(rho sigma) / (sqrt(Tr(rho^2)) sqrt(Tr(sigma^2))).
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.n != sigma.n) throw std::invalid_argument("fidelity: dimension mismatch");
  const double pr = rho.purity();
  const double ps = sigma.purity();
  if (pr <= 0.0 || ps <= 0.0) throw std::invalid_argument("fidelity: zero purity");
  return (rho.matrix * sigma.matrix).trace().real() / (std::sqrt(pr) * std::sqrt(ps));
}

inline double expectation(const DensityMatrix& rho, const CMat& obs) {
  if (obs.rows() != rho.matrix.rows() || obs.cols() != rho.matrix.cols())
    throw std::invalid_argument("expectation: dimension mismatch");
  if (!is_hermitian(obs, 1e-8))
    throw std::invalid_argument("expectation: observable not Hermitian");
  return (obs * rho.matrix).trace().real();
}

/// sigma_z on qubit 1 tensored with the projector onto |0...0> of the rest.
inline CMat z1_observable(int n) {
  if (n < 1) throw std::invalid_argument("z1_observable: n < 1");
  CMat rest = CMat::Zero(Eigen::Index{1} << (n - 1), Eigen::Index{1} << (n - 1));
  rest(0, 0) = 1.0;
  return kron(pauli(3), rest);
}

inline CMat ground_projector(int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMat p = CMat::Zero(dim, dim);
  p(0, 0) = 1.0;
  return p;
}

}  // namespace pulseqst

#endif  // PULSEQST_QCORE_HPP
