#ifndef PULSEQST_DEVICE_HPP
#define PULSEQST_DEVICE_HPP

#include <atomic>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <optional>
#include <random>
#include <unordered_map>

#include "pulseqst/control.hpp"
#include "pulseqst/hamiltonians.hpp"
#include "pulseqst/qcore.hpp"

namespace pulseqst {

struct MeasurementModel {
  enum class Base { Exact, Shots };
  Base base = Base::Exact;
  int shots = 0;                 // > 0 when base == Shots
  std::uint64_t seed = 0;
  double depolarizing = 0.0;     // p in [0,1]; 0 disables the channel

  static MeasurementModel exact() { return {}; }
  static MeasurementModel with_shots(int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("MeasurementModel: shot count < 1");
    return {Base::Shots, count, seed, 0.0};
  }

  void validate() const {
    if (base == Base::Shots && shots < 1)
      throw std::invalid_argument("MeasurementModel: shot count < 1");
    if (depolarizing < 0.0 || depolarizing > 1.0)
      throw std::invalid_argument("MeasurementModel: p outside [0,1]");
  }
};

// The simulated quantum processor. The hidden target state is the only thing
// the optimizer is trying to learn; it is never exposed through the API.
// Every query increments the experiment counter by one.
class Device {
 public:
  Device(DensityMatrix hidden_target, CMat h0, ControlOperators ops, MeasurementModel model)
      : hidden_(std::move(hidden_target)),
        h0_(std::move(h0)),
        ops_(std::move(ops)),
        model_(model),
        rng_(model.seed) {
    model_.validate();
    if (h0_.rows() != hidden_.matrix.rows())
      throw std::invalid_argument("Device: drift/state dimension mismatch");
    if (!ops_.operators.empty() && ops_.operators[0].rows() != h0_.rows())
      throw std::invalid_argument("Device: control/drift dimension mismatch");
    // pure hidden states evolve as a vector, which is much cheaper
    if (hidden_.purity() > 1.0 - 1e-12) {
      Eigen::SelfAdjointEigenSolver<CMat> es(hidden_.matrix);
      pure_ = es.eigenvectors().col(h0_.rows() - 1);
    }
  }

  Device(const Device&) = delete;
  Device& operator=(const Device&) = delete;

  int qubits() const { return hidden_.n; }
  const CMat& drift() const { return h0_; }
  const ControlOperators& control_operators() const { return ops_; }
  const MeasurementModel& model() const { return model_; }

  double measure_fitness(const ControlSequence& seq) {
    return sample_fitness(exact_ground_overlap(seq, std::nullopt, std::nullopt));
  }

  double measure_fitness_with_rotation(const ControlSequence& seq, int m, const Rotation& r) {
    if (m < 0 || m > seq.slices)
      throw std::invalid_argument("measure_fitness_with_rotation: index out of range");
    return sample_fitness(exact_ground_overlap(seq, m, r));
  }

  double measure_observable(const ControlSequence& seq, const CMat& obs) {
    if (obs.rows() != h0_.rows() || obs.cols() != h0_.cols())
      throw std::invalid_argument("measure_observable: dimension mismatch");
    if (!is_hermitian(obs, 1e-8))
      throw std::invalid_argument("measure_observable: non-Hermitian observable");
    counter_.fetch_add(1, std::memory_order_relaxed);
    CMat rho = evolved_rho(seq);
    const double dim = static_cast<double>(h0_.rows());
    if (model_.depolarizing > 0.0) {
      const double p = model_.depolarizing;
      rho = (1.0 - p) * rho + (p / dim) * CMat::Identity(h0_.rows(), h0_.cols());
    }
    if (model_.base == MeasurementModel::Base::Exact) return (obs * rho).trace().real();
    // sample eigenvalues of obs with Born probabilities
    Eigen::SelfAdjointEigenSolver<CMat> es(obs);
    std::vector<double> probs(h0_.rows());
    for (Eigen::Index k = 0; k < h0_.rows(); ++k)
      probs[k] = std::max(0.0, (es.eigenvectors().col(k).adjoint() * rho *
                                es.eigenvectors().col(k))(0).real());
    std::lock_guard<std::mutex> lock(rng_mutex_);
    std::discrete_distribution<int> dist(probs.begin(), probs.end());
    double sum = 0.0;
    for (int s = 0; s < model_.shots; ++s) sum += es.eigenvalues()(dist(rng_));
    return sum / model_.shots;
  }

  std::uint64_t experiment_count() const { return counter_.load(std::memory_order_relaxed); }

 private:
  double sample_fitness(double f_exact) {
    counter_.fetch_add(1, std::memory_order_relaxed);
    double f = f_exact;
    if (model_.depolarizing > 0.0) {
      const double dim = static_cast<double>(h0_.rows());
      f = (1.0 - model_.depolarizing) * f + model_.depolarizing / dim;
    }
    if (model_.base == MeasurementModel::Base::Exact) return f;
    f = std::clamp(f, 0.0, 1.0);
    std::lock_guard<std::mutex> lock(rng_mutex_);
    std::binomial_distribution<int> dist(model_.shots, f);
    return static_cast<double>(dist(rng_)) / model_.shots;
  }

  double exact_ground_overlap(const ControlSequence& seq, std::optional<int> m,
                              std::optional<Rotation> r) {
    seq.validate();
    if (seq.amplitude_count() != ops_.amplitude_count() || seq.n != ops_.n)
      throw std::invalid_argument("Device: sequence incompatible with control operators");
    if (pure_) {
      CVec psi = *pure_;
      if (m && *m == 0) psi = rotation_unitary(seq.n, *r) * psi;
      for (int k = 1; k <= seq.slices; ++k) {
        psi = cached_slice(seq, k) * psi;
        if (m && *m == k) psi = rotation_unitary(seq.n, *r) * psi;
      }
      return std::norm(psi(0));
    }
    CMat rho = hidden_.matrix;
    auto conj = [&rho](const CMat& u) { rho = u * rho * u.adjoint(); };
    if (m && *m == 0) conj(rotation_unitary(seq.n, *r));
    for (int k = 1; k <= seq.slices; ++k) {
      conj(cached_slice(seq, k));
      if (m && *m == k) conj(rotation_unitary(seq.n, *r));
    }
    return rho(0, 0).real();
  }

  CMat evolved_rho(const ControlSequence& seq) {
    seq.validate();
    if (pure_) {
      CVec psi = *pure_;
      for (int k = 1; k <= seq.slices; ++k) psi = cached_slice(seq, k) * psi;
      return psi * psi.adjoint();
    }
    CMat rho = hidden_.matrix;
    for (int k = 1; k <= seq.slices; ++k) {
      CMat u = cached_slice(seq, k);
      rho = u * rho * u.adjoint();
    }
    return rho;
  }

  // slice propagators keyed by (tau, amplitude row); repeated queries within a
  // gradient evaluation mostly differ in a single slice
  CMat cached_slice(const ControlSequence& seq, int m) {
    std::string key(sizeof(double) * (1 + seq.amplitudes.cols()), '\0');
    std::memcpy(key.data(), &seq.tau, sizeof(double));
    for (int k = 0; k < seq.amplitudes.cols(); ++k) {
      const double v = seq.amplitudes(m - 1, k);
      std::memcpy(key.data() + sizeof(double) * (1 + k), &v, sizeof(double));
    }
    {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    CMat u = slice_propagator(h0_, ops_, seq, m);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (cache_.size() > 16384) cache_.clear();
    cache_.emplace(std::move(key), u);
    return u;
  }

  DensityMatrix hidden_;
  std::optional<CVec> pure_;
  CMat h0_;
  ControlOperators ops_;
  MeasurementModel model_;
  std::atomic<std::uint64_t> counter_{0};
  std::mt19937_64 rng_;
  std::mutex rng_mutex_;
  std::unordered_map<std::string, CMat> cache_;
  std::mutex cache_mutex_;
};

}  // namespace pulseqst

#endif  // PULSEQST_DEVICE_HPP
