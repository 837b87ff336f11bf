#include <doctest.h>

#include "qsvm/error.hpp"
#include "qsvm/qubo.hpp"
#include "qsvm/rng.hpp"

#include <algorithm>
#include <random>

using namespace qsvm;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// plain double loop over the unsymmetrized input
double naive_energy(const Eigen::MatrixXd& q, const BitString& a) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) e += a[i] * q(i, j) * a[j];
  return e;
}

Eigen::MatrixXd random_matrix(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST_CASE("bitstring code order") {
  BitString b = BitString::from_code(5, 4);
  CHECK(b.to_string() == "0101");
  CHECK(b.code() == 5);
  CHECK(BitString::parse("0101") == b);
  CHECK(BitString::from_code(3, 4) < b);
  CHECK(b.count_ones() == 2);
  CHECK_THROWS(BitString::parse("01x"));
}

TEST_CASE("energy examples") {
  CHECK(energy(QuboProblem(mat({{1, -1}, {-1, 1}})), BitString{1, 1}) == doctest::Approx(0.0));
  CHECK(energy(QuboProblem(mat({{-1, 0}, {0, 2}})), BitString{1, 0}) == doctest::Approx(-1.0));
}

TEST_CASE("energy rejects length mismatch") {
  QuboProblem q(mat({{1, 0}, {0, 1}}));
  CHECK_THROWS_AS(energy(q, BitString{1, 0, 1}), ContractError);
}

TEST_CASE("symmetrization keeps every energy") {
  Eigen::MatrixXd raw = random_matrix(6, 11);
  QuboProblem q(raw);
  CHECK(q.matrix().isApprox(q.matrix().transpose()));
  for (std::uint64_t c = 0; c < 64; ++c) {
    BitString a = BitString::from_code(c, 6);
    CHECK(energy(q, a) == doctest::Approx(naive_energy(raw, a)).epsilon(1e-12));
  }
}

TEST_CASE("brute force top two of the frustrated pair") {
  auto best = brute_force_solve(QuboProblem(mat({{-1, 3}, {3, -1}})), 2);
  REQUIRE(best.size() == 2);
  CHECK(best[0].bits == BitString{0, 1});
  CHECK(best[0].energy == doctest::Approx(-1.0));
  CHECK(best[1].bits == BitString{1, 0});
  CHECK(best[1].energy == doctest::Approx(-1.0));
}

TEST_CASE("brute force on zero matrix returns all-zero string first") {
  auto best = brute_force_solve(QuboProblem(Eigen::MatrixXd::Zero(3, 3)), 1);
  CHECK(best.at(0).bits == BitString{0, 0, 0});
  CHECK(best.at(0).energy == 0.0);
}

TEST_CASE("brute force matches sorted enumeration and ignores thread count") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::MatrixXd raw = random_matrix(9, 100 + seed);
    QuboProblem q(raw);
    std::vector<std::pair<double, std::uint64_t>> all;
    for (std::uint64_t c = 0; c < 512; ++c) all.emplace_back(naive_energy(raw, BitString::from_code(c, 9)), c);
    std::sort(all.begin(), all.end());
    auto one = brute_force_solve(q, 5, {.max_variables = 26, .threads = 1});
    auto many = brute_force_solve(q, 5, {.max_variables = 26, .threads = 4});
    for (std::size_t r = 0; r < 5; ++r) {
      CHECK(one[r].bits.code() == all[r].second);
      CHECK(one[r].energy == doctest::Approx(all[r].first).epsilon(1e-12));
      CHECK(many[r].bits == one[r].bits);
    }
  }
}

TEST_CASE("brute force capacity bound") {
  CHECK_THROWS_AS(brute_force_solve(QuboProblem(Eigen::MatrixXd::Zero(27, 27)), 1), CapacityError);
  CHECK_THROWS_AS(brute_force_solve(QuboProblem(Eigen::MatrixXd::Zero(5, 5)), 1, {.max_variables = 4}),
                  CapacityError);
}

TEST_CASE("distribution orders ties by bit string") {
  std::vector<BitString> samples{{1, 1}, {0, 0}, {1, 1}, {0, 0}, {0, 1}};
  auto d = SolutionDistribution::from_samples(samples);
  REQUIRE(d.size() == 3);
  CHECK(d.entries()[0].bits == BitString{0, 0});
  CHECK(d.entries()[1].bits == BitString{1, 1});
  CHECK(d.modal().bits == BitString{0, 0});
  CHECK(d.total_shots() == 5);
  CHECK(d.probability_of(BitString{0, 1}) == doctest::Approx(0.2));
  CHECK(d.probability_of(BitString{1, 0}) == 0.0);
}

TEST_CASE("distribution from counts drops zeros and sums to one") {
  auto d = SolutionDistribution::from_counts({{BitString{1, 0}, 3}, {BitString{0, 1}, 0}, {BitString{1, 1}, 7}});
  REQUIRE(d.size() == 2);
  CHECK(d.modal().bits == BitString{1, 1});
  double total = 0.0;
  for (const auto& e : d.entries()) total += e.probability;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("mixed bit lengths are rejected") {
  std::vector<BitString> samples{{1, 1}, {0}};
  CHECK_THROWS(SolutionDistribution::from_samples(samples));
}
