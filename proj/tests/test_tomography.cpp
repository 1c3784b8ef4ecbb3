#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pulseqst/device.hpp"
#include "pulseqst/stateprep.hpp"
#include "pulseqst/tomography.hpp"
#include "test_util.hpp"

using namespace pulseqst;
using pulseqst::testing::random_density;
using pulseqst::testing::random_pure;

namespace {

ControlSequence random_seq(int m, double tau, int n, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ControlSequence seq = ControlSequence::zeros(m, tau, ControlMode::Global, n);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < seq.amplitudes.cols(); ++k) seq.amplitudes(i, k) = dist(rng);
  return seq;
}

}  // namespace

TEST_CASE("reconstruct basics") {
  SUBCASE("idle sequence gives the ground projector") {
    auto ops = make_control_operators(ControlMode::Global, 2);
    auto seq = ControlSequence::zeros(2, 1e-3, ControlMode::Global, 2);
    auto rho = reconstruct(seq, CMat::Zero(4, 4), ops);
    CHECK((rho.matrix - ground_projector(2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("a pi x-pulse reconstructs |1><1|") {
    auto ops = make_control_operators(ControlMode::Global, 1);
    auto seq = ControlSequence::zeros(1, 1e-3, ControlMode::Global, 1);
    seq.amplitudes(0, 0) = (M_PI / 2) / seq.tau;  // exp(-i tau b X) = exp(-i pi/2 X)
    auto rho = reconstruct(seq, CMat::Zero(2, 2), ops);
    CHECK(std::abs(rho.matrix(1, 1).real() - 1.0) < 1e-10);
  }
}

TEST_CASE("reconstruction-fitness identity") {
  // Tr(rho_rec rho_target) = f(b) for every pulse and pure target
  const int n = 2;
  CMat h0 = build_ising(n);
  auto ops = make_control_operators(ControlMode::Global, n);
  for (int trial = 0; trial < 10; ++trial) {
    std::mt19937_64 rng(300 + trial);
    auto target = DensityMatrix::from_pure(random_pure(n, rng));
    auto seq = random_seq(3, 1e-3, n, 400.0, 600 + trial);
    Device dev(target, h0, ops, MeasurementModel::exact());
    const double f = dev.measure_fitness(seq);
    auto rho_rec = reconstruct(seq, h0, ops);
    CHECK(std::abs(fidelity(rho_rec, target) - f) < 1e-10);
    CHECK(std::abs(rho_rec.purity() - 1.0) < 1e-9);
  }
}

TEST_CASE("full_qst analytic cases") {
  SUBCASE("maximally mixed has only the identity coefficient") {
    auto c = full_qst(DensityMatrix::maximally_mixed(2));
    CHECK(c.at("II") == doctest::Approx(0.25));
    for (std::size_t idx = 1; idx < c.gamma.size(); ++idx)
      CHECK(std::abs(c.gamma[idx]) < 1e-14);
  }
  SUBCASE("single qubit ground state") {
    auto c = full_qst(DensityMatrix::from_pure(PureState::ground(1)));
    CHECK(c.at("I") == doctest::Approx(0.5));
    CHECK(c.at("Z") == doctest::Approx(0.5));
    CHECK(std::abs(c.at("X")) < 1e-14);
    CHECK(std::abs(c.at("Y")) < 1e-14);
  }
  SUBCASE("Bell state pattern II, XX, -YY, ZZ") {
    auto c = full_qst(DensityMatrix::from_pure(bell_state(2, 1, 2)));
    CHECK(c.at("II") == doctest::Approx(0.25));
    CHECK(c.at("XX") == doctest::Approx(0.25));
    CHECK(c.at("YY") == doctest::Approx(-0.25));
    CHECK(c.at("ZZ") == doctest::Approx(0.25));
    for (std::size_t idx = 0; idx < c.gamma.size(); ++idx) {
      const auto label = PauliCoefficients::index_to_label(2, idx);
      if (label != "II" && label != "XX" && label != "YY" && label != "ZZ")
        CHECK(std::abs(c.gamma[idx]) < 1e-14);
    }
  }
}

TEST_CASE("full_qst / pauli_reassemble roundtrip") {
  std::mt19937_64 rng(50);
  for (int n = 1; n <= 3; ++n) {
    auto rho = random_density(n, rng);
    auto back = pauli_reassemble(full_qst(rho));
    CHECK((back.matrix - rho.matrix).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pauli_reassemble analytic cases") {
  SUBCASE("identity-only coefficients give the maximally mixed state") {
    PauliCoefficients c;
    c.n = 2;
    c.gamma.assign(16, 0.0);
    c.gamma[0] = 0.25;
    auto rho = pauli_reassemble(c);
    CHECK((rho.matrix - CMat::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("(I + X)/2 is |+><+|") {
    PauliCoefficients c;
    c.n = 1;
    c.gamma = {0.5, 0.5, 0.0, 0.0};
    auto rho = pauli_reassemble(c);
    CHECK(std::abs(rho.matrix(0, 1).real() - 0.5) < 1e-14);
    CHECK(std::abs(rho.matrix(0, 0).real() - 0.5) < 1e-14);
  }
  SUBCASE("wrong identity coefficient rejected") {
    PauliCoefficients c;
    c.n = 1;
    c.gamma = {0.3, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(pauli_reassemble(c), std::invalid_argument);
  }
}

TEST_CASE("deviation_statistic") {
  CHECK(deviation_statistic({0.5, 0.7, 0.9}, {0.5, 0.7, 0.9}) == doctest::Approx(0.0));
  CHECK(deviation_statistic({1.0, 0.0}, {0.0, 0.0}) == doctest::Approx(1.0));
  // equal per-entry deviations d over K entries give d*sqrt(K/(K-1))
  std::vector<double> sim(6, 0.0245), ideal(6, 0.0);
  CHECK(deviation_statistic(sim, ideal) ==
        doctest::Approx(0.0245 * std::sqrt(6.0 / 5.0)).epsilon(1e-12));
  CHECK_THROWS_AS(deviation_statistic({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(deviation_statistic({1.0, 2.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("density matrix text round trip is bit exact") {
  std::mt19937_64 rng(61);
  auto rho = random_density(2, rng);
  std::stringstream ss;
  save_density_matrix(rho, ss);
  auto back = load_density_matrix(ss);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(back.matrix(i, j) == rho.matrix(i, j));
}

TEST_CASE("pauli coefficient table round trip is bit exact") {
  std::mt19937_64 rng(62);
  auto c = full_qst(random_density(2, rng));
  std::stringstream ss;
  save_pauli_coefficients(c, ss);
  auto back = load_pauli_coefficients(ss);
  REQUIRE(back.gamma.size() == c.gamma.size());
  for (std::size_t i = 0; i < c.gamma.size(); ++i) CHECK(back.gamma[i] == c.gamma[i]);
}
