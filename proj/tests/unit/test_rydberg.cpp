#include <doctest.h>

#include "qsvm/error.hpp"
#include "qsvm/rydberg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace qsvm;
using namespace qsvm::rydberg;

namespace {

Eigen::MatrixXd on_atom(const Eigen::Matrix2d& op, std::size_t i, std::size_t n) {
  // atom 0 is the least significant bit of the basis index, i.e. the last Kronecker factor
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
  for (std::size_t k = n; k-- > 0;) {
    Eigen::Matrix2d f = k == i ? op : Eigen::Matrix2d::Identity();
    Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    out = next;
  }
  return out;
}

Eigen::MatrixXd kron_hamiltonian(const AtomRegister& reg, double omega, double delta) {
  const std::size_t n = reg.size();
  Eigen::Matrix2d x, z, nr;
  x << 0, 1, 1, 0;
  z << -1, 0, 0, 1;
  nr << 0, 0, 0, 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1 << n, 1 << n);
  Eigen::MatrixXd u = interaction_matrix(reg);
  for (std::size_t i = 0; i < n; ++i) {
    h += 0.5 * omega * on_atom(x, i, n) - 0.5 * delta * on_atom(z, i, n);
    for (std::size_t j = i + 1; j < n; ++j) h += u(i, j) * on_atom(nr, i, n) * on_atom(nr, j, n);
  }
  return h;
}

// exact exponentials of the dense Hamiltonian at fine midpoints
std::vector<double> reference_probabilities(const AtomRegister& reg, const PulseSchedule& s, std::size_t steps) {
  const std::size_t dim = std::size_t{1} << reg.size();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi(0) = 1.0;
  const double dt = s.duration / steps;
  for (std::size_t k = 0; k < steps; ++k) {
    double t = (k + 0.5) * dt;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kron_hamiltonian(reg, s.omega(t), s.delta(t)));
    Eigen::VectorXcd phase(dim);
    for (std::size_t b = 0; b < dim; ++b) phase(b) = std::exp(std::complex<double>(0.0, -es.eigenvalues()(b) * dt));
    Eigen::MatrixXcd v = es.eigenvectors().cast<std::complex<double>>();
    psi = v * phase.asDiagonal() * (v.adjoint() * psi);
  }
  std::vector<double> p(dim);
  for (std::size_t b = 0; b < dim; ++b) p[b] = std::norm(psi(b));
  return p;
}

EvolutionResult prepared(std::vector<std::complex<double>> amps, std::size_t atoms) {
  EvolutionResult r;
  r.final_state = Eigen::Map<Eigen::VectorXcd>(amps.data(), amps.size());
  r.atoms = atoms;
  return r;
}

const double kUnitDistance = std::pow(kDefaultC6, 1.0 / 6.0);

}  // namespace

TEST_CASE("interaction matrix") {
  AtomRegister pair({{0, 0}, {kUnitDistance, 0}});
  CHECK(interaction_matrix(pair)(0, 1) == doctest::Approx(1.0));
  CHECK(interaction_matrix(pair)(0, 0) == 0.0);

  AtomRegister tri({{0, 0}, {5, 0}, {1, 7}});
  AtomRegister wide({{0, 0}, {10, 0}, {2, 14}});
  Eigen::MatrixXd a = interaction_matrix(tri), b = interaction_matrix(wide);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(b(i, j) == doctest::Approx(a(i, j) / 64.0));

  AtomRegister single({{3, 4}});
  CHECK(interaction_matrix(single).isZero());
  CHECK(interaction_matrix(single).rows() == 1);

  CHECK_THROWS_AS(AtomRegister({{1, 1}, {1, 1}}), ContractError);
  CHECK_THROWS_AS(AtomRegister({{0, 0}, {3, 0}}, kDefaultC6, 4.0), ContractError);
}

TEST_CASE("plateau follows the median, capped") {
  QuboProblem three(Eigen::MatrixXd::Constant(3, 3, 3.0));
  QuboProblem forty(Eigen::MatrixXd::Constant(3, 3, 40.0));
  CHECK(plateau_amplitude(three, kDeviceOmegaMax) == doctest::Approx(3.0));
  CHECK(plateau_amplitude(forty, kDeviceOmegaMax) == doctest::Approx(15.71));
  auto s = paper_schedule(three);
  CHECK(s.omega(5.0) == doctest::Approx(3.0));
  CHECK(paper_schedule(forty).omega(5.0) == doctest::Approx(15.71));
}

TEST_CASE("sweep schedule shape") {
  QuboProblem q(Eigen::MatrixXd::Constant(2, 2, 4.0));
  for (double duration : {kSimulationDuration, kDeviceDuration}) {
    auto s = paper_schedule(q, duration);
    CHECK(s.duration == duration);
    CHECK(s.delta(0.0) == doctest::Approx(-10.0));
    CHECK(s.delta(duration) == doctest::Approx(10.0));
    CHECK(s.delta(duration / 2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.omega(0.0) == doctest::Approx(0.0));
    CHECK(s.omega(duration) == doctest::Approx(0.0));
    for (int k = 0; k <= 100; ++k) {
      double w = s.omega(duration * k / 100.0);
      CHECK(w >= 0.0);
      CHECK(w <= s.omega_max);
    }
    s.validate();
  }
  CHECK_THROWS_AS(paper_schedule(q, 0.0), ContractError);
  CHECK_THROWS_AS(paper_schedule(q, -1.0), ContractError);
}

TEST_CASE("hamiltonian matches the Kronecker construction") {
  AtomRegister reg({{0, 0}, {6, 0}, {2, 5}});
  PulseSchedule s;
  s.duration = 2.0;
  s.omega = Waveform::constant(3.0, 2.0);
  s.delta = Waveform::constant(-1.5, 2.0);
  CHECK(hamiltonian_matrix(reg, s, 1.0).isApprox(kron_hamiltonian(reg, 3.0, -1.5), 1e-12));
}

TEST_CASE("undriven atom stays in the ground state") {
  AtomRegister one({{0, 0}});
  PulseSchedule s;
  s.duration = 3.0;
  s.omega = Waveform::constant(0.0, 3.0);
  s.delta = Waveform::ramp(-10.0, 10.0, 3.0);
  auto r = evolve(one, s);
  CHECK(r.probabilities()[1] == doctest::Approx(0.0));
  CHECK(r.probabilities()[0] == doctest::Approx(1.0));
}

TEST_CASE("resonant pi pulse") {
  const double omega = 2.0;
  PulseSchedule s;
  s.duration = std::numbers::pi / omega;
  s.omega = Waveform::constant(omega, s.duration);
  s.delta = Waveform::constant(0.0, s.duration);
  auto r = evolve(AtomRegister({{0, 0}}), s);
  CHECK(std::abs(r.probabilities()[1] - 1.0) < 1e-3);
  CHECK(r.norm_drift < 1e-6);
}

TEST_CASE("far-separated pair ends fully excited") {
  AtomRegister far({{0, 0}, {200, 0}});
  QuboProblem q(Eigen::MatrixXd::Constant(2, 2, 5.0));
  auto r = evolve(far, paper_schedule(q));
  auto d = sample_shots(r, 500, NoiseConfig::ideal(), 1);
  CHECK(d.modal().bits == BitString{1, 1});
  REQUIRE(r.min_gap.has_value());
  CHECK(*r.min_gap > 0.0);
}

TEST_CASE("evolution agrees with dense exponentials") {
  AtomRegister reg({{0, 0}, {9, 0}});
  QuboProblem q(Eigen::MatrixXd::Constant(2, 2, 4.0));
  auto s = paper_schedule(q, 4.0);
  auto ours = evolve(reg, s, {.dt = 0.002}).probabilities();
  auto ref = reference_probabilities(reg, s, 4000);
  for (std::size_t b = 0; b < 4; ++b) CHECK(ours[b] == doctest::Approx(ref[b]).epsilon(2e-4).scale(1.0));
}

TEST_CASE("halving the step barely moves the probabilities") {
  for (double spacing : {6.0, 8.0, 12.0}) {
    AtomRegister reg({{0, 0}, {spacing, 0}});
    auto s = paper_schedule(QuboProblem(Eigen::MatrixXd::Constant(2, 2, 6.0)));
    auto coarse = evolve(reg, s, {.dt = 0.004});
    auto fine = evolve(reg, s, {.dt = 0.002});
    for (std::size_t b = 0; b < 4; ++b)
      CHECK(std::abs(coarse.probabilities()[b] - fine.probabilities()[b]) < 1e-4);
    CHECK(coarse.norm_drift < 1e-6);
  }
}

TEST_CASE("register bound") {
  std::vector<Point> pts;
  for (int i = 0; i < 17; ++i) pts.push_back({10.0 * i, 0.0});
  auto s = paper_schedule(QuboProblem(Eigen::MatrixXd::Constant(2, 2, 1.0)));
  CHECK_THROWS_AS(evolve(AtomRegister(pts), s), CapacityError);
}

TEST_CASE("sampling a basis state") {
  auto r = prepared({1.0, 0.0, 0.0, 0.0}, 2);
  auto d = sample_shots(r, 300, NoiseConfig::ideal(), 9);
  REQUIRE(d.size() == 1);
  CHECK(d.modal().bits == BitString{0, 0});
  CHECK(d.total_shots() == 300);
}

TEST_CASE("certain false positives read all ones") {
  NoiseConfig n{.spam_prep = 0.0, .spam_false_pos = 1.0, .spam_false_neg = 0.0, .amp_fluctuation_rel = 0.0,
                .doppler_sigma = 0.0};
  auto r = prepared({0.5, 0.5, 0.5, 0.5}, 2);
  auto d = sample_shots(r, 200, n, 4);
  REQUIRE(d.size() == 1);
  CHECK(d.modal().bits == BitString{1, 1});
}

TEST_CASE("balanced superposition splits the shots") {
  const double h = std::sqrt(0.5);
  auto r = prepared({h, h}, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto d = sample_shots(r, 1000, NoiseConfig::ideal(), seed);
    for (const auto& e : d.entries()) {
      CHECK(e.count >= 400);
      CHECK(e.count <= 600);
    }
  }
}

TEST_CASE("zero noise scale is the ideal pipeline") {
  AtomRegister reg({{0, 0}, {8, 0}, {4, 7}});
  QuboProblem q(Eigen::MatrixXd::Constant(3, 3, 2.0));
  auto s = paper_schedule(q, 4.0);
  NoiseConfig zero;
  zero.scale_percent = 0.0;
  auto a = anneal_qubo(q, reg, s, zero, 500, 21);
  auto b = anneal_qubo(q, reg, s, NoiseConfig::ideal(), 500, 21);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.entries()[i].bits == b.entries()[i].bits);
    CHECK(a.entries()[i].count == b.entries()[i].count);
  }
}

TEST_CASE("noisy sampling keeps the shot count and changes the readout") {
  AtomRegister reg({{0, 0}, {8, 0}, {4, 7}});
  QuboProblem q(Eigen::MatrixXd::Constant(3, 3, 2.0));
  auto s = paper_schedule(q, 4.0);
  NoiseConfig heavy;
  heavy.scale_percent = 500.0;
  heavy.realizations = 3;
  auto real = simulate_realizations(reg, s, heavy, 5);
  CHECK(real.size() == 3);
  for (std::size_t shots : {76u, 100u, 500u, 1000u}) {
    auto d = sample_realizations(real, shots, heavy, 5);
    CHECK(d.total_shots() == shots);
  }
  auto ideal = anneal_qubo(q, reg, s, NoiseConfig::ideal(), 1000, 5);
  auto noisy = sample_realizations(real, 1000, heavy, 5);
  CHECK(ideal.modal().probability != noisy.modal().probability);
}

TEST_CASE("noise scaling is linear per channel") {
  NoiseConfig n;
  n.scale_percent = 200.0;
  CHECK(n.false_neg() == doctest::Approx(0.1));
  CHECK(n.amp_rel() == doctest::Approx(0.1));
  CHECK(n.doppler() == doctest::Approx(1.0));
  n.scale_percent = 1000.0;
  CHECK(n.false_neg() == doctest::Approx(0.5));
  CHECK(NoiseConfig::ideal().has_spam() == false);
  CHECK(NoiseConfig::ideal().has_analog() == false);
  NoiseConfig bad;
  bad.spam_prep = 1.5;
  CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("basis index to bit string") {
  CHECK(basis_bitstring(1, 3) == BitString{1, 0, 0});
  CHECK(basis_bitstring(6, 3) == BitString{0, 1, 1});
}
