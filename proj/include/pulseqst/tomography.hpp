#ifndef PULSEQST_TOMOGRAPHY_HPP
#define PULSEQST_TOMOGRAPHY_HPP

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "pulseqst/control.hpp"
#include "pulseqst/qcore.hpp"

namespace pulseqst {

/// rho = C(b)^dagger |0...0><0...0| C(b): invert the learned drive on the
/// ground state. Output is a pure density matrix by construction.
inline DensityMatrix reconstruct(const ControlSequence& seq, const CMat& h0,
                                 const ControlOperators& ops) {
  CMat u = total_propagator(h0, ops, seq);
  // C^dagger e_0 is the conjugate of the first row of C
  CVec psi = u.row(0).adjoint();
  psi /= psi.norm();
  return DensityMatrix(seq.n, psi * psi.adjoint());
}

// Dense Pauli-basis coefficients gamma_{i1..in}, indexed base-4 with qubit 1
// as the most significant digit; digit order I,X,Y,Z.
struct PauliCoefficients {
  int n = 0;
  std::vector<double> gamma;  // 4^n entries

  static std::string index_to_label(int n, std::size_t idx) {
    static const char sym[4] = {'I', 'X', 'Y', 'Z'};
    std::string label(n, 'I');
    for (int q = n - 1; q >= 0; --q) {
      label[q] = sym[idx & 3];
      idx >>= 2;
    }
    return label;
  }

  static std::size_t label_to_index(const std::string& label) {
    std::size_t idx = 0;
    for (char c : label) {
      int d;
      switch (c) {
        case 'I': d = 0; break;
        case 'X': d = 1; break;
        case 'Y': d = 2; break;
        case 'Z': d = 3; break;
        default: throw std::invalid_argument("PauliCoefficients: bad label character");
      }
      idx = idx * 4 + d;
    }
    return idx;
  }

  double at(const std::string& label) const { return gamma.at(label_to_index(label)); }
};

namespace detail {

inline std::vector<int> index_digits(int n, std::size_t idx) {
  std::vector<int> labels(n);
  for (int q = n - 1; q >= 0; --q) {
    labels[q] = static_cast<int>(idx & 3);
    idx >>= 2;
  }
  return labels;
}

}  // namespace detail

/// Exact trace-based decomposition: gamma_label = Tr(rho P_label) / 2^n.
/// Reference oracle only; 4^n traces, no measurement simulation.
inline PauliCoefficients full_qst(const DensityMatrix& rho) {
  PauliCoefficients out;
  out.n = rho.n;
  const std::size_t count = std::size_t{1} << (2 * rho.n);
  const double dim = static_cast<double>(Eigen::Index{1} << rho.n);
  out.gamma.resize(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    CMat p = pauli_string(rho.n, detail::index_digits(rho.n, idx));
    out.gamma[idx] = (rho.matrix * p).trace().real() / dim;
  }
  return out;
}

inline DensityMatrix pauli_reassemble(const PauliCoefficients& coeffs) {
  const std::size_t count = std::size_t{1} << (2 * coeffs.n);
  if (coeffs.gamma.size() != count)
    throw std::invalid_argument("pauli_reassemble: missing coefficients");
  const double dim = static_cast<double>(Eigen::Index{1} << coeffs.n);
  if (std::abs(coeffs.gamma[0] - 1.0 / dim) > 1e-9)
    throw std::invalid_argument("pauli_reassemble: identity coefficient must be 1/2^n");
  CMat m = CMat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t idx = 0; idx < count; ++idx) {
    if (coeffs.gamma[idx] == 0.0) continue;
    m += coeffs.gamma[idx] * pauli_string(coeffs.n, detail::index_digits(coeffs.n, idx));
  }
  return DensityMatrix(coeffs.n, std::move(m));
}

/// epsilon = sqrt(sum_i (sim_i - ideal_i)^2 / (K-1)).
inline double deviation_statistic(const std::vector<double>& sim,
                                  const std::vector<double>& ideal) {
  if (sim.size() != ideal.size()) throw std::invalid_argument("deviation_statistic: length mismatch");
  if (sim.size() < 2) throw std::invalid_argument("deviation_statistic: need K >= 2");
  double ss = 0.0;
  for (std::size_t i = 0; i < sim.size(); ++i) ss += (sim[i] - ideal[i]) * (sim[i] - ideal[i]);
  return std::sqrt(ss / static_cast<double>(sim.size() - 1));
}

// --- text export (bit-exact round trip) ---

inline void save_density_matrix(const DensityMatrix& rho, std::ostream& os) {
  os << "qubits " << rho.n << "\n";
  for (Eigen::Index i = 0; i < rho.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.matrix.cols(); ++j) {
      if (j) os << " ";
      os << format_double(rho.matrix(i, j).real()) << " " << format_double(rho.matrix(i, j).imag());
    }
    os << "\n";
  }
}

inline DensityMatrix load_density_matrix(std::istream& is) {
  std::string key;
  int n = 0;
  if (!(is >> key >> n) || key != "qubits")
    throw std::invalid_argument("density matrix file: bad header");
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMat m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      double re, im;
      if (!(is >> re >> im)) throw std::invalid_argument("density matrix file: truncated");
      m(i, j) = Complex(re, im);
    }
  return DensityMatrix(n, std::move(m));
}

inline void save_pauli_coefficients(const PauliCoefficients& c, std::ostream& os) {
  os << "qubits " << c.n << "\n";
  for (std::size_t idx = 0; idx < c.gamma.size(); ++idx)
    os << PauliCoefficients::index_to_label(c.n, idx) << " " << format_double(c.gamma[idx]) << "\n";
}

inline PauliCoefficients load_pauli_coefficients(std::istream& is) {
  std::string key;
  PauliCoefficients c;
  if (!(is >> key >> c.n) || key != "qubits")
    throw std::invalid_argument("pauli coefficient file: bad header");
  c.gamma.assign(std::size_t{1} << (2 * c.n), 0.0);
  std::string label;
  double value;
  while (is >> label >> value) c.gamma.at(PauliCoefficients::label_to_index(label)) = value;
  return c;
}

}  // namespace pulseqst

#endif  // PULSEQST_TOMOGRAPHY_HPP
