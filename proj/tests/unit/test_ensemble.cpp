#include <doctest.h>

#include "qsvm/ensemble.hpp"
#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

#include <random>

using namespace qsvm;
using namespace qsvm::ensemble;

namespace {

const auto kLine = std::make_shared<const TrainingSet>(FeatureMatrix{{1.0}, {-1.0}}, std::vector<int>{1, -1});

// f(x) = 2x + bias with both alphas 1: threshold at -bias/2
QuboSvmModel threshold_model(double bias) {
  return QuboSvmModel(kLine, KernelSpec::linear(), EncodingSpec{}, {1.0, 1.0}, bias, BitString{1, 0, 1, 0});
}

QuboSvmModel constant_model(int label) {
  return QuboSvmModel(kLine, KernelSpec::linear(), EncodingSpec{}, {0.0, 0.0}, label, BitString{0, 0, 0, 0});
}

LabeledData points(std::vector<double> xs, std::vector<int> ys) {
  FeatureMatrix x(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) x(i, 0) = xs[i];
  return {std::move(x), std::move(ys)};
}

SolutionDistribution modal_only(const QuboProblem& q) {
  return SolutionDistribution::from_counts({{brute_force_solve(q, 1).at(0).bits, 1}});
}

LabeledData blobs(std::size_t n, std::size_t d, double sep, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  FeatureMatrix x(n, d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2 == 0 ? 1 : -1;
    for (std::size_t j = 0; j < d; ++j) x(i, j) = g(rng) + 0.5 * sep * y[i];
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

TEST_CASE("vote examples") {
  std::vector<double> x{0.0};
  auto ens = make_ensemble({constant_model(1), constant_model(1), constant_model(-1)});
  CHECK(ens.n_used == 3);
  CHECK(vote_predict(ens, x) == 1);
  auto tie = make_ensemble({constant_model(1), constant_model(-1)});
  CHECK(vote_predict(tie, x) == 1);
  auto minority = make_ensemble({constant_model(-1), constant_model(-1), constant_model(1)});
  CHECK(vote_predict(minority, x) == -1);
  auto weighted = make_ensemble({constant_model(-1), constant_model(1)}, 0, {0.2, 0.8});
  CHECK(vote_predict(weighted, x) == 1);
  CHECK_THROWS_AS(make_ensemble({}), ContractError);
  CHECK_THROWS_AS(make_ensemble({constant_model(1)}, 2), ContractError);
}

TEST_CASE("one member votes like that member") {
  auto ens = make_ensemble({threshold_model(0.3), threshold_model(-1.0), constant_model(-1)}, 1);
  for (double v = -2.0; v <= 2.0; v += 0.05) {
    std::vector<double> x{v};
    CHECK(vote_predict(ens, x) == ens.members[0].predict(x));
  }
}

TEST_CASE("identical members need one vote") {
  auto val = points({-1, -0.5, 0.5, 1}, {-1, -1, 1, 1});
  auto ens = optimize_vote_count({threshold_model(0), threshold_model(0), threshold_model(0)}, val,
                                 data::Metric::balanced_accuracy);
  CHECK(ens.n_used == 1);
}

TEST_CASE("aggregation chosen when it beats the modal model") {
  auto val = points({-1, -0.5, 0.5, 1}, {-1, -1, 1, 1});
  std::vector<QuboSvmModel> members{constant_model(1), threshold_model(0), threshold_model(0.1)};
  auto ens = optimize_vote_count(members, val, data::Metric::balanced_accuracy);
  CHECK(ens.n_used == 3);
  auto profile = vote_count_profile(ens, val, data::Metric::balanced_accuracy);
  CHECK(profile[0] == doctest::Approx(0.5));
  CHECK(profile[2] == doctest::Approx(1.0));
  CHECK(profile[ens.n_used - 1] >= profile[0]);
}

TEST_CASE("recall on all-positive validation picks the first all-positive prefix") {
  auto val = points({-1, 0.5, 1}, {1, 1, 1});
  auto ens = optimize_vote_count({constant_model(-1), constant_model(1), constant_model(1)}, val,
                                 data::Metric::recall);
  CHECK(ens.n_used == 2);
}

TEST_CASE("optimizer contracts") {
  auto val = points({1, 2}, {1, 1});
  CHECK_THROWS_AS(optimize_vote_count({constant_model(1)}, val, data::Metric::balanced_accuracy), DataError);
  CHECK_THROWS_AS(optimize_vote_count({}, val, data::Metric::recall), ContractError);
  CHECK_THROWS_AS(optimize_vote_count({constant_model(1)}, LabeledData{}, data::Metric::recall), ContractError);
}

TEST_CASE("empty members are dropped") {
  std::vector<QuboSvmModel> members{constant_model(1), threshold_model(0), constant_model(-1)};
  std::vector<double> weights{0.5, 0.3, 0.2};
  drop_empty_members(members, weights);
  REQUIRE(members.size() == 1);
  CHECK(members[0].support_count() == 2);
  CHECK(weights == std::vector<double>{0.3});
  std::vector<QuboSvmModel> empty{constant_model(1), constant_model(-1)};
  std::vector<double> none;
  drop_empty_members(empty, none);
  CHECK(empty.size() == 1);
}

TEST_CASE("ensemble from a distribution") {
  auto d = SolutionDistribution::from_counts({{BitString{1, 0, 1, 0}, 2}, {BitString{0, 1, 0, 1}, 6}});
  auto ens = ensemble_from_distribution(d, kLine, KernelSpec::linear(), EncodingSpec{}, true);
  REQUIRE(ens.members.size() == 2);
  CHECK(ens.members[0].source_bitstring() == BitString{0, 1, 0, 1});
  CHECK(ens.weights == std::vector<double>{0.75, 0.25});
}

TEST_CASE("stack: default bases give four meta features") {
  auto train = blobs(8, 3, 3.0, 1), val = blobs(40, 3, 3.0, 2);
  auto m = stack_train(default_stack_bases(), train, val, modal_only, {});
  CHECK(m.base_learners.size() == 4);
  CHECK(m.meta_dims() == 4);
  CHECK(m.meta.members.front().training().dims() == 4);
  auto held = blobs(100, 3, 3.0, 3);
  auto pred = stack_predict_all(m, held.x());
  std::size_t ok = 0;
  for (std::size_t i = 0; i < held.size(); ++i) ok += pred[i] == held.label(i);
  CHECK(ok >= 95);
}

TEST_CASE("stack: constant base learners give a constant model") {
  FeatureMatrix flat = FeatureMatrix::Zero(6, 2);
  LabeledData train(flat, {1, 1, 1, 1, -1, -1});
  auto m = stack_train({baselines::NaiveBayesSpec{}, baselines::NaiveBayesSpec{}}, train, train, modal_only,
                       {.keep_empty_members = true});
  auto held = blobs(30, 2, 2.0, 4);
  auto pred = stack_predict_all(m, held.x());
  for (int p : pred) CHECK(p == pred.front());
}

TEST_CASE("stack: one perfect base learner is reproduced") {
  auto train = blobs(6, 1, 4.0, 5), val = blobs(60, 1, 4.0, 6);
  auto m = stack_train({baselines::TreeSpec{}}, train, val, modal_only, {});
  auto base = baselines::predict_all(m.base_learners[0], val.x());
  REQUIRE(base == val.y());
  CHECK(stack_predict_all(m, val.x()) == base);
}

TEST_CASE("stack: duplicating a base learner grows the meta dimension") {
  auto train = blobs(6, 2, 3.0, 7);
  auto one = stack_train({baselines::KnnSpec{}}, train, train, modal_only, {});
  auto two = stack_train({baselines::KnnSpec{}, baselines::KnnSpec{}}, train, train, modal_only, {});
  CHECK(one.meta_dims() == 1);
  CHECK(two.meta_dims() == 2);
}

TEST_CASE("stack: optimized meta aggregation and base failures") {
  auto train = blobs(6, 2, 3.0, 8), val = blobs(30, 2, 3.0, 9);
  auto all_states = [](const QuboProblem& q) {
    std::vector<std::pair<BitString, std::uint64_t>> counts;
    for (const auto& s : brute_force_solve(q, 5)) counts.emplace_back(s.bits, 1);
    return SolutionDistribution::from_counts(std::move(counts));
  };
  auto m = stack_train(default_stack_bases(), train, val, all_states,
                       {.aggregation = MetaAggregation::optimized, .metric = data::Metric::balanced_accuracy});
  CHECK(m.meta.n_used >= 1);
  CHECK(m.meta.n_used <= m.meta.members.size());

  LabeledData one_class(FeatureMatrix::Zero(4, 2), {1, 1, 1, 1});
  try {
    stack_train({baselines::KnnSpec{}, baselines::LogisticSpec{}}, one_class, one_class, modal_only, {});
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("stack base learner 1 (logistic_regression)") != std::string::npos);
  }
}
