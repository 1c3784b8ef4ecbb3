#ifndef PULSEQST_STATEPREP_HPP
#define PULSEQST_STATEPREP_HPP

#include <array>
#include <random>
#include <vector>

#include "pulseqst/control.hpp"
#include "pulseqst/qcore.hpp"

namespace pulseqst {

/// |phi(t)> = exp(-i h t) |0...0>.
inline PureState dynamical_state(const CMat& h, double t, int n) {
  CVec psi = expm_hermitian(h, t).col(0);
  psi /= psi.norm();
  return PureState(n, std::move(psi));
}

/// Permutation CNOT: flips the target bit where the control bit is 1.
inline CMat cnot_matrix(int n, int control_site, int target_site) {
  if (control_site == target_site) throw std::invalid_argument("cnot_matrix: site collision");
  if (control_site < 1 || control_site > n || target_site < 1 || target_site > n)
    throw std::invalid_argument("cnot_matrix: site out of range");
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMat u = CMat::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    Eigen::Index out = b;
    if ((b >> (n - control_site)) & 1) out = b ^ (Eigen::Index{1} << (n - target_site));
    u(out, b) = 1.0;
  }
  return u;
}

inline CMat hadamard_on(int n, int site) {
  const double s = 1.0 / std::sqrt(2.0);
  CMat h(2, 2);
  h << s, s, s, -s;
  CMat u = CMat::Identity(1, 1);
  for (int q = 1; q <= n; ++q) u = kron(u, q == site ? h : CMat(CMat::Identity(2, 2)));
  return u;
}

/// Bell pair on the named sites, |0> elsewhere: H on control, then CNOT.
inline PureState bell_state(int n, int control_site, int target_site) {
  if (control_site == target_site) throw std::invalid_argument("bell_state: site collision");
  CVec psi = cnot_matrix(n, control_site, target_site) *
             (hadamard_on(n, control_site) * PureState::ground(n).amplitudes);
  return PureState(n, std::move(psi));
}

namespace detail {

// Four-segment refocusing pattern: per-spin sign vectors over the segments.
// The (control, target) pair keeps its coupling ((-,-,+,+) on both, product
// always +); spectators alternate between the two vectors orthogonal to it and
// to each other. With more than two spectators, same-vector spectator pairs
// are not refocused (their residual is the caller's to check).
inline std::array<int, 4> refocusing_signs(int n, int site, int control_site, int target_site) {
  if (site == control_site || site == target_site) return {-1, -1, 1, 1};
  int spectator_rank = 0;
  for (int q = 1; q < site; ++q)
    if (q != control_site && q != target_site) ++spectator_rank;
  if (spectator_rank % 2 == 0) return {1, -1, -1, 1};
  return {-1, 1, -1, 1};
}

}  // namespace detail

/// The J-coupling gate U(1/2J) = exp(-i pi Z_c Z_t / 4) realized by four free
/// evolutions of duration 1/(8J) under the supplied diagonal drift, with pi
/// x-pulses between them cancelling single-spin z-evolution and unwanted
/// couplings.
inline CMat zz_gate_refocused(int n, int control_site, int target_site, double j_hz,
                              const CMat& drift) {
  if (j_hz <= 0.0) throw std::invalid_argument("zz_gate_refocused: J <= 0");
  const CMat free_evo = expm_hermitian(drift, 1.0 / (8.0 * j_hz));
  CMat u = CMat::Identity(drift.rows(), drift.cols());
  std::vector<int> prev(n + 1, 1);
  for (int seg = 0; seg < 4; ++seg) {
    for (int q = 1; q <= n; ++q) {
      const int s = detail::refocusing_signs(n, q, control_site, target_site)[seg];
      if (s != prev[q]) u = rotation_gate(n, q, 'x', M_PI) * u;
      prev[q] = s;
    }
    u = free_evo * u;
  }
  for (int q = 1; q <= n; ++q)
    if (prev[q] != 1) u = rotation_gate(n, q, 'x', M_PI) * u;
  return u;
}

namespace detail {

inline CMat cnot_from_zz(int n, int c, int t, const CMat& u_half_j) {
  // CNOT = sqrt(i) Rz_c(pi/2) Rz_t(-pi/2) Rx_t(pi/2) U(1/2J) Ry_t(pi/2),
  // z-rotations expanded into x/y pulses
  const CMat rz_c = rotation_gate(n, c, 'x', M_PI / 2) * rotation_gate(n, c, 'y', M_PI / 2) *
                    rotation_gate(n, c, 'x', -M_PI / 2);
  const CMat rz_t = rotation_gate(n, t, 'x', M_PI / 2) * rotation_gate(n, t, 'y', -M_PI / 2) *
                    rotation_gate(n, t, 'x', -M_PI / 2);
  const Complex sqrt_i = std::exp(Complex(0, M_PI / 4));
  return sqrt_i * rz_c * rz_t * rotation_gate(n, t, 'x', M_PI / 2) * u_half_j *
         rotation_gate(n, t, 'y', M_PI / 2);
}

}  // namespace detail

/// Ideal variant: U(1/2J) taken as the pure ZZ evolution exp(-i pi Z_c Z_t/4).
inline CMat cnot_via_jcoupling(int n, int control_site, int target_site, double j_hz) {
  if (j_hz <= 0.0) throw std::invalid_argument("cnot_via_jcoupling: J <= 0");
  if (control_site == target_site) throw std::invalid_argument("cnot_via_jcoupling: site collision");
  if (control_site < 1 || control_site > n || target_site < 1 || target_site > n)
    throw std::invalid_argument("cnot_via_jcoupling: site out of range");
  std::vector<int> labels(n, 0);
  labels[control_site - 1] = 3;
  labels[target_site - 1] = 3;
  const CMat u_half_j = expm_hermitian(pauli_string(n, labels), M_PI / 4);
  return detail::cnot_from_zz(n, control_site, target_site, u_half_j);
}

/// Refocused variant: U(1/2J) built from free evolutions under the full
/// (diagonal) drift with refocusing pi pulses.
inline CMat cnot_via_jcoupling_refocused(int n, int control_site, int target_site, double j_hz,
                                         const CMat& drift) {
  if (control_site == target_site)
    throw std::invalid_argument("cnot_via_jcoupling_refocused: site collision");
  const CMat u_half_j = zz_gate_refocused(n, control_site, target_site, j_hz, drift);
  return detail::cnot_from_zz(n, control_site, target_site, u_half_j);
}

/// |0...0> through `depth` layers of seeded random single-qubit rotations plus
/// a ladder of nearest-neighbour CNOTs.
inline PureState random_lowdepth_state(int n, int depth, std::uint64_t seed) {
  if (depth < 0) throw std::invalid_argument("random_lowdepth_state: depth < 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  CVec psi = PureState::ground(n).amplitudes;
  for (int layer = 0; layer < depth; ++layer) {
    for (int q = 1; q <= n; ++q) {
      psi = rotation_gate(n, q, 'z', angle(rng)) * psi;
      psi = rotation_gate(n, q, 'y', angle(rng)) * psi;
      psi = rotation_gate(n, q, 'z', angle(rng)) * psi;
    }
    for (int q = 1; q < n; ++q) psi = cnot_matrix(n, q, q + 1) * psi;
  }
  psi /= psi.norm();
  return PureState(n, std::move(psi));
}

}  // namespace pulseqst

#endif  // PULSEQST_STATEPREP_HPP
