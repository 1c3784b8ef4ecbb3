#ifndef PULSEQST_OPTIMIZER_HPP
#define PULSEQST_OPTIMIZER_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "pulseqst/gradient.hpp"

namespace pulseqst {

enum class GradientMethod { Method1, Method2 };
enum class StepRule { Fixed, Backtracking };
enum class RunStatus { GoalReached, GradientVanished, IterationCap };

struct OptimizerOptions {
  GradientMethod method = GradientMethod::Method2;
  double method2_delta = 2.0 * M_PI * 10.0;  // rad/s

  StepRule step_rule = StepRule::Backtracking;
  double beta0 = 1e6;
  double shrink = 0.5;            // backtracking only
  double sufficient_increase = 1e-4;
  int max_probes = 30;

  int max_iterations = 200;
  double fitness_goal = 0.99;
  double gradient_norm_floor = 1e-12;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (beta0 <= 0.0) throw std::invalid_argument("OptimizerOptions: beta0 <= 0");
    if (shrink <= 0.0 || shrink >= 1.0) throw std::invalid_argument("OptimizerOptions: shrink outside (0,1)");
    if (fitness_goal <= 0.0 || fitness_goal > 1.0)
      throw std::invalid_argument("OptimizerOptions: fitness_goal outside (0,1]");
    if (method == GradientMethod::Method2 && method2_delta <= 0.0)
      throw std::invalid_argument("OptimizerOptions: method2 delta <= 0");
  }
};

struct RunRecord {
  struct Entry {
    int iteration = 0;
    double fitness = 0.0;
    double gradient_norm = 0.0;
    double step_size = 0.0;
    std::uint64_t experiments = 0;
    ControlSequence pulse;
  };
  std::vector<Entry> entries;
  RunStatus status = RunStatus::IterationCap;
  double best_fitness = 0.0;
};

/// Amplitudes i.i.d. uniform in [-scale, scale]; reproducible by seed.
inline ControlSequence random_init(int m, double tau, ControlMode mode, int n,
                                   double amplitude_scale, std::uint64_t seed) {
  ControlSequence seq = ControlSequence::zeros(m, tau, mode, n);
  if (amplitude_scale > seq.cap) throw std::invalid_argument("random_init: scale exceeds cap");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude_scale, amplitude_scale);
  for (int i = 0; i < seq.slices; ++i)
    for (int k = 0; k < seq.amplitudes.cols(); ++k) seq.amplitudes(i, k) = dist(rng);
  return seq;
}

/// b + beta*g entrywise, clipped to the amplitude cap; input unchanged.
inline ControlSequence step(const ControlSequence& seq, const GradientVector& grad, double beta) {
  if (grad.rows() != seq.amplitudes.rows() || grad.cols() != seq.amplitudes.cols())
    throw std::invalid_argument("step: shape mismatch");
  ControlSequence out = seq;
  out.amplitudes = (seq.amplitudes + beta * grad).cwiseMax(-seq.cap).cwiseMin(seq.cap);
  return out;
}

// Closed-loop gradient ascent. All information about the hidden state flows
// through device measurements; every probe is counted by the device.
inline std::pair<ControlSequence, RunRecord> optimize(Device& dev, const ControlSequence& init,
                                                      const OptimizerOptions& opts) {
  opts.validate();
  init.validate();
  RunRecord rec;
  ControlSequence seq = init;
  ControlSequence best = init;
  double f = dev.measure_fitness(seq);
  double best_f = f;
  double beta = opts.beta0;

  auto gradient = [&](const ControlSequence& s) {
    return opts.method == GradientMethod::Method1 ? grad_method1(dev, s)
                                                  : grad_method2(dev, s, opts.method2_delta);
  };

  for (int k = 1; k <= opts.max_iterations; ++k) {
    if (f >= opts.fitness_goal) {
      rec.status = RunStatus::GoalReached;
      break;
    }
    GradientVector g = gradient(seq);
    const double gn = g.norm();
    double used_beta = 0.0;
    bool accepted = false;
    if (gn >= opts.gradient_norm_floor) {
      if (opts.step_rule == StepRule::Fixed) {
        seq = step(seq, g, opts.beta0);
        f = dev.measure_fitness(seq);
        used_beta = opts.beta0;
        accepted = true;
      } else {
        // Armijo backtracking; start from twice the last accepted step
        double b = beta * 2.0;
        for (int probe = 0; probe < opts.max_probes; ++probe) {
          ControlSequence cand = step(seq, g, b);
          const double fc = dev.measure_fitness(cand);
          if (fc >= f + opts.sufficient_increase * b * gn * gn) {
            seq = std::move(cand);
            f = fc;
            beta = b;
            used_beta = b;
            accepted = true;
            break;
          }
          b *= opts.shrink;
        }
      }
    }
    if (f > best_f) {
      best_f = f;
      best = seq;
    }
    rec.entries.push_back({k, f, gn, used_beta, dev.experiment_count(), seq});
    if (!accepted) {
      rec.status = RunStatus::GradientVanished;
      break;
    }
  }
  if (rec.status == RunStatus::IterationCap && f >= opts.fitness_goal)
    rec.status = RunStatus::GoalReached;
  rec.best_fitness = best_f;
  return {best, rec};
}

}  // namespace pulseqst

#endif  // PULSEQST_OPTIMIZER_HPP
