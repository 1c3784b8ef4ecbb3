#ifndef PULSEQST_CONTROL_HPP
#define PULSEQST_CONTROL_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "pulseqst/hamiltonians.hpp"
#include "pulseqst/qcore.hpp"

namespace pulseqst {

inline constexpr double kDefaultAmplitudeCap = 2.0 * 3.14159265358979323846 * 1e4;  // rad/s

// M slices of piecewise-constant amplitudes, tau seconds each.
// amplitudes is M x K row-major with the column layout of ControlOperators.
struct ControlSequence {
  int slices = 0;       // M
  double tau = 0.0;     // seconds
  ControlMode mode = ControlMode::Global;
  int n = 0;
  RMat amplitudes;      // M x K, rad/s
  double cap = kDefaultAmplitudeCap;

  int amplitude_count() const { return mode == ControlMode::Global ? 2 : 2 * n; }

  void validate() const {
    if (slices < 1) throw std::invalid_argument("ControlSequence: M < 1");
    if (tau <= 0.0) throw std::invalid_argument("ControlSequence: tau <= 0");
    if (amplitudes.rows() != slices || amplitudes.cols() != amplitude_count())
      throw std::invalid_argument("ControlSequence: amplitude array shape mismatch");
    if (amplitudes.size() > 0 && amplitudes.cwiseAbs().maxCoeff() > cap)
      throw std::invalid_argument("ControlSequence: amplitude exceeds cap");
  }

  static ControlSequence zeros(int m, double tau, ControlMode mode, int n) {
    ControlSequence seq;
    seq.slices = m;
    seq.tau = tau;
    seq.mode = mode;
    seq.n = n;
    seq.amplitudes = RMat::Zero(m, seq.amplitude_count());
    seq.validate();
    return seq;
  }
};

struct Rotation {
  int site = 1;
  char axis = 'x';      // 'x' or 'y'
  double angle = M_PI / 2;  // +pi/2 or -pi/2

  void validate(int n) const {
    if (site < 1 || site > n) throw std::invalid_argument("Rotation: site out of range");
    if (axis != 'x' && axis != 'y') throw std::invalid_argument("Rotation: axis must be x or y");
    if (std::abs(std::abs(angle) - M_PI / 2) > 1e-12)
      throw std::invalid_argument("Rotation: angle must be +-pi/2");
  }
};

/// exp(-i theta/2 sigma_alpha^site) on the n-qubit register; any theta.
inline CMat rotation_gate(int n, int site, char axis, double theta) {
  if (site < 1 || site > n) throw std::invalid_argument("rotation_gate: site out of range");
  int label;
  switch (axis) {
    case 'x': label = 1; break;
    case 'y': label = 2; break;
    case 'z': label = 3; break;
    default: throw std::invalid_argument("rotation_gate: bad axis");
  }
  return expm_hermitian(single_site(n, site, label), theta / 2.0);
}

inline CMat rotation_unitary(int n, const Rotation& r) {
  r.validate(n);
  return rotation_gate(n, r.site, r.axis, r.angle);
}

/// exp(-i tau (H0 + sum_k b_k[m] O_k)); m is 1-based.
inline CMat slice_propagator(const CMat& h0, const ControlOperators& ops,
                             const ControlSequence& seq, int m) {
  seq.validate();
  if (m < 1 || m > seq.slices) throw std::invalid_argument("slice_propagator: index out of range");
  RVec row = seq.amplitudes.row(m - 1);
  CMat h = h0 + control_matrix(ops, {row.data(), static_cast<size_t>(row.size())});
  return expm_hermitian(h, seq.tau);
}

/// C = C_M ... C_2 C_1; slice 1 acts first (rightmost factor).
inline CMat total_propagator(const CMat& h0, const ControlOperators& ops,
                             const ControlSequence& seq) {
  CMat u = CMat::Identity(h0.rows(), h0.cols());
  for (int m = 1; m <= seq.slices; ++m) u = slice_propagator(h0, ops, seq, m) * u;
  return u;
}

/// C_M ... C_{m+1} R C_m ... C_1; m = 0 inserts before all slices.
inline CMat propagator_with_rotation(const CMat& h0, const ControlOperators& ops,
                                     const ControlSequence& seq, int m, const Rotation& r) {
  seq.validate();
  if (m < 0 || m > seq.slices)
    throw std::invalid_argument("propagator_with_rotation: index out of range");
  CMat u = CMat::Identity(h0.rows(), h0.cols());
  for (int k = 1; k <= m; ++k) u = slice_propagator(h0, ops, seq, k) * u;
  u = rotation_unitary(seq.n, r) * u;
  for (int k = m + 1; k <= seq.slices; ++k) u = slice_propagator(h0, ops, seq, k) * u;
  return u;
}

inline PureState evolve(const PureState& psi, const CMat& u) {
  if (u.cols() != psi.amplitudes.size()) throw std::invalid_argument("evolve: dimension mismatch");
  return PureState(psi.n, u * psi.amplitudes);
}

inline DensityMatrix evolve(const DensityMatrix& rho, const CMat& u) {
  if (u.cols() != rho.matrix.rows()) throw std::invalid_argument("evolve: dimension mismatch");
  return DensityMatrix(rho.n, u * rho.matrix * u.adjoint());
}

// --- text serialization (bit-exact round trip) ---

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void save_control_sequence(const ControlSequence& seq, std::ostream& os) {
  os << "slices " << seq.slices << "\n";
  os << "tau " << format_double(seq.tau) << "\n";
  os << "mode " << (seq.mode == ControlMode::Global ? "global" : "persite") << "\n";
  os << "qubits " << seq.n << "\n";
  for (int m = 0; m < seq.slices; ++m) {
    for (int k = 0; k < seq.amplitudes.cols(); ++k) {
      if (k) os << " ";
      os << format_double(seq.amplitudes(m, k));
    }
    os << "\n";
  }
}

inline ControlSequence load_control_sequence(std::istream& is) {
  ControlSequence seq;
  std::string key, mode;
  if (!(is >> key >> seq.slices) || key != "slices")
    throw std::invalid_argument("control sequence file: bad header (slices)");
  if (!(is >> key >> seq.tau) || key != "tau")
    throw std::invalid_argument("control sequence file: bad header (tau)");
  if (!(is >> key >> mode) || key != "mode" || (mode != "global" && mode != "persite"))
    throw std::invalid_argument("control sequence file: bad header (mode)");
  seq.mode = mode == "global" ? ControlMode::Global : ControlMode::PerSite;
  if (!(is >> key >> seq.n) || key != "qubits")
    throw std::invalid_argument("control sequence file: bad header (qubits)");
  seq.amplitudes.resize(seq.slices, seq.amplitude_count());
  for (int m = 0; m < seq.slices; ++m)
    for (int k = 0; k < seq.amplitudes.cols(); ++k)
      if (!(is >> seq.amplitudes(m, k)))
        throw std::invalid_argument("control sequence file: truncated amplitude table");
  seq.validate();
  return seq;
}

inline void save_control_sequence(const ControlSequence& seq, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  save_control_sequence(seq, os);
}

inline ControlSequence load_control_sequence(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return load_control_sequence(is);
}

}  // namespace pulseqst

#endif  // PULSEQST_CONTROL_HPP
