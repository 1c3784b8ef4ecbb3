#ifndef PULSEQST_HAMILTONIANS_HPP
#define PULSEQST_HAMILTONIANS_HPP

#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pulseqst/qcore.hpp"

namespace pulseqst {

enum class ControlMode { Global, PerSite };

// Control operators paired with the amplitude layout of a ControlSequence:
//   Global : [sum_i sigma_x^i, sum_i sigma_y^i]           (K = 2)
//   PerSite: [sx^1..sx^n, sy^1..sy^n]                     (K = 2n)
struct ControlOperators {
  ControlMode mode = ControlMode::Global;
  int n = 0;
  std::vector<CMat> operators;

  int amplitude_count() const { return static_cast<int>(operators.size()); }
};

inline CMat single_site(int n, int site, int pauli_label) {
  std::vector<int> labels(n, 0);
  labels[site - 1] = pauli_label;
  return pauli_string(n, labels);
}

inline ControlOperators make_control_operators(ControlMode mode, int n) {
  if (n < 1) throw std::invalid_argument("make_control_operators: n < 1");
  ControlOperators ops;
  ops.mode = mode;
  ops.n = n;
  if (mode == ControlMode::Global) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    CMat sx = CMat::Zero(dim, dim);
    CMat sy = CMat::Zero(dim, dim);
    for (int i = 1; i <= n; ++i) {
      sx += single_site(n, i, 1);
      sy += single_site(n, i, 2);
    }
    ops.operators = {std::move(sx), std::move(sy)};
  } else {
    for (int i = 1; i <= n; ++i) ops.operators.push_back(single_site(n, i, 1));
    for (int i = 1; i <= n; ++i) ops.operators.push_back(single_site(n, i, 2));
  }
  return ops;
}

/// Open-chain transverse-field Ising drift: -sum_i Z_i Z_{i+1} + sum_i X_i.
inline CMat build_ising(int n) {
  if (n < 2) throw std::invalid_argument("build_ising: n < 2");
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMat h = CMat::Zero(dim, dim);
  for (int i = 1; i < n; ++i) {
    std::vector<int> labels(n, 0);
    labels[i - 1] = 3;
    labels[i] = 3;
    h -= pauli_string(n, labels);
  }
  for (int i = 1; i <= n; ++i) h += single_site(n, i, 1);
  return h;
}

/// Weak-coupling NMR drift, parameters in Hz, output in rad/s:
///   sum_j pi nu_j Z_j + sum_{j<k} (pi/2) J_jk Z_j Z_k   (diagonal).
inline CMat build_nmr(int n, const std::vector<double>& nu, const RMat& j) {
  if (static_cast<int>(nu.size()) != n || j.rows() != n || j.cols() != n)
    throw std::invalid_argument("build_nmr: inconsistent parameter sizes");
  if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("build_nmr: coupling matrix not symmetric");
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMat h = CMat::Zero(dim, dim);
  const double pi = 3.14159265358979323846;
  for (Eigen::Index b = 0; b < dim; ++b) {
    double e = 0.0;
    for (int jj = 1; jj <= n; ++jj) {
      // qubit jj reads bit (n - jj) of the basis index; |0> has eigenvalue +1
      const double zj = ((b >> (n - jj)) & 1) ? -1.0 : 1.0;
      e += pi * nu[jj - 1] * zj;
      for (int kk = jj + 1; kk <= n; ++kk) {
        const double zk = ((b >> (n - kk)) & 1) ? -1.0 : 1.0;
        e += 0.5 * pi * j(jj - 1, kk - 1) * zj * zk;
      }
    }
    h(b, b) = e;
  }
  return h;
}

/// sum_k amplitude_k * operator_k, amplitudes in rad/s.
inline CMat control_matrix(const ControlOperators& ops, std::span<const double> amplitudes) {
  if (static_cast<int>(amplitudes.size()) != ops.amplitude_count())
    throw std::invalid_argument("control_matrix: amplitude count mismatch");
  const Eigen::Index dim = ops.operators.empty() ? 0 : ops.operators[0].rows();
  CMat h = CMat::Zero(dim, dim);
  for (size_t k = 0; k < amplitudes.size(); ++k) h += amplitudes[k] * ops.operators[k];
  return h;
}

enum class HamiltonianKind { Ising, NMR, CustomTwoBody };

struct CustomTwoBodyTerm {
  int pauli_a = 0;
  int pauli_b = 0;
  int site_a = 0;  // 1-based; site_b = 0 means a single-site term
  int site_b = 0;
  double coefficient_hz = 0.0;
};

/// Declarative drift description; build() produces the dense matrix in rad/s.
struct HamiltonianSpec {
  HamiltonianKind kind = HamiltonianKind::Ising;
  int n = 0;
  std::vector<double> nu_hz;    // NMR
  RMat j_hz;                    // NMR
  std::vector<CustomTwoBodyTerm> terms;  // CustomTwoBody

  CMat build() const {
    switch (kind) {
      case HamiltonianKind::Ising:
        return build_ising(n);
      case HamiltonianKind::NMR:
        return build_nmr(n, nu_hz, j_hz);
      case HamiltonianKind::CustomTwoBody: {
        const Eigen::Index dim = Eigen::Index{1} << n;
        CMat h = CMat::Zero(dim, dim);
        const double two_pi = 2.0 * 3.14159265358979323846;
        for (const auto& t : terms) {
          std::vector<int> labels(n, 0);
          labels[t.site_a - 1] = t.pauli_a;
          if (t.site_b != 0) labels[t.site_b - 1] = t.pauli_b;
          h += two_pi * t.coefficient_hz * pauli_string(n, labels);
        }
        return h;
      }
    }
    throw std::invalid_argument("HamiltonianSpec: unknown kind");
  }
};

}  // namespace pulseqst

#endif  // PULSEQST_HAMILTONIANS_HPP
