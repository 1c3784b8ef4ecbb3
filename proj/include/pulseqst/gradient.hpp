#ifndef PULSEQST_GRADIENT_HPP
#define PULSEQST_GRADIENT_HPP

#include "pulseqst/control.hpp"
#include "pulseqst/device.hpp"

namespace pulseqst {

// Gradient entries follow the ControlSequence amplitude layout (M x K),
// units d(fitness)/d(rad/s).
using GradientVector = RMat;

namespace detail {

inline char axis_of_column(const ControlSequence& seq, int col) {
  if (seq.mode == ControlMode::Global) return col == 0 ? 'x' : 'y';
  return col < seq.n ? 'x' : 'y';
}

inline int site_of_column(const ControlSequence& seq, int col) {
  // meaningful for PerSite only
  return (col % seq.n) + 1;
}

}  // namespace detail

/// Rotation-insertion estimator: g_alpha[m] = tau * sum_i (f(+pi/2) - f(-pi/2))
/// with the rotation inserted after slice m on site i. Consumes 4nM experiments.
/// For per-site controls each entry uses only its own site's rotation pair.
inline GradientVector grad_method1(Device& dev, const ControlSequence& seq) {
  seq.validate();
  const int n = seq.n;
  GradientVector g = GradientVector::Zero(seq.slices, seq.amplitude_count());
  for (int m = 1; m <= seq.slices; ++m) {
    for (int col = 0; col < seq.amplitude_count(); ++col) {
      const char axis = detail::axis_of_column(seq, col);
      double sum = 0.0;
      if (seq.mode == ControlMode::Global) {
        for (int site = 1; site <= n; ++site) {
          const double fp = dev.measure_fitness_with_rotation(seq, m, {site, axis, M_PI / 2});
          const double fm = dev.measure_fitness_with_rotation(seq, m, {site, axis, -M_PI / 2});
          sum += fp - fm;
        }
      } else {
        const int site = detail::site_of_column(seq, col);
        const double fp = dev.measure_fitness_with_rotation(seq, m, {site, axis, M_PI / 2});
        const double fm = dev.measure_fitness_with_rotation(seq, m, {site, axis, -M_PI / 2});
        sum = fp - fm;
      }
      g(m - 1, col) = seq.tau * sum;
    }
  }
  return g;
}

/// Forward-difference estimator; 2M+1 experiments (2nM+1 per-site), the +1
/// being the baseline fitness measured here.
inline GradientVector grad_method2(Device& dev, const ControlSequence& seq, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("grad_method2: delta <= 0");
  seq.validate();
  const double f0 = dev.measure_fitness(seq);
  GradientVector g = GradientVector::Zero(seq.slices, seq.amplitude_count());
  ControlSequence probe = seq;
  for (int m = 0; m < seq.slices; ++m) {
    for (int col = 0; col < seq.amplitude_count(); ++col) {
      const double saved = probe.amplitudes(m, col);
      // probe downward at the cap so the perturbed sequence stays valid
      const double h = saved + delta <= seq.cap ? delta : -delta;
      probe.amplitudes(m, col) = saved + h;
      g(m, col) = (dev.measure_fitness(probe) - f0) / h;
      probe.amplitudes(m, col) = saved;
    }
  }
  return g;
}

namespace detail {

inline double exact_fitness(const CMat& h0, const ControlOperators& ops,
                            const DensityMatrix& target, const ControlSequence& seq) {
  CMat u = total_propagator(h0, ops, seq);
  return (u * target.matrix * u.adjoint())(0, 0).real();
}

}  // namespace detail

/// Noiseless central-difference oracle; requires the target, so it is a
/// test/validation path only, never available to the optimizer.
inline GradientVector grad_oracle(const CMat& h0, const ControlOperators& ops,
                                  const DensityMatrix& target, const ControlSequence& seq,
                                  double delta) {
  if (delta <= 0.0) throw std::invalid_argument("grad_oracle: delta <= 0");
  seq.validate();
  GradientVector g = GradientVector::Zero(seq.slices, seq.amplitude_count());
  ControlSequence probe = seq;
  for (int m = 0; m < seq.slices; ++m) {
    for (int col = 0; col < seq.amplitude_count(); ++col) {
      const double saved = probe.amplitudes(m, col);
      probe.amplitudes(m, col) = saved + delta;
      const double fp = detail::exact_fitness(h0, ops, target, probe);
      probe.amplitudes(m, col) = saved - delta;
      const double fm = detail::exact_fitness(h0, ops, target, probe);
      probe.amplitudes(m, col) = saved;
      g(m, col) = (fp - fm) / (2.0 * delta);
    }
  }
  return g;
}

}  // namespace pulseqst

#endif  // PULSEQST_GRADIENT_HPP
