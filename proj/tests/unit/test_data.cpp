#include <doctest.h>

#include "qsvm/baselines.hpp"
#include "qsvm/data.hpp"
#include "qsvm/error.hpp"

#include <filesystem>
#include <fstream>
#include <set>

using namespace qsvm;
using namespace qsvm::data;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const std::string& name, const std::string& text) {
  fs::path dir = fs::temp_directory_path() / "qsvm_test_data";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

// rows 0..m-1 with the first `pos` rows positive
Dataset ramp(std::size_t m, std::size_t pos, std::size_t d = 2) {
  FeatureMatrix x(m, d);
  std::vector<int> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = i < pos ? 1 : -1;
    for (std::size_t j = 0; j < d; ++j) x(i, j) = static_cast<double>(i) * (j + 1) + (i < pos ? 0.25 : 0.0);
  }
  return Dataset(LabeledData(std::move(x), std::move(y)), {});
}

Metrics score(const ConfusionCounts& c) { return metrics(c); }

}  // namespace

TEST_CASE("csv labels map to +-1") {
  auto p = write_file("three.csv", "a,b,Class\n1,2,0\n3,4,1\n5,6,0\n");
  auto ds = load_csv(p);
  CHECK(ds.samples.y() == std::vector<int>{-1, 1, -1});
  CHECK(ds.dims() == 2);
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.samples.x()(2, 1) == 6.0);
}

TEST_CASE("kaggle-shaped csv has 30 features") {
  std::string header = "\"Time\"";
  for (int i = 1; i <= 28; ++i) header += ",\"V" + std::to_string(i) + "\"";
  header += ",\"Amount\",\"Class\"\n";
  std::string row = "0";
  for (int i = 1; i <= 28; ++i) row += ",-1.5e-1";
  std::string text = header + row + ",149.62,\"0\"\n" + row + ",2.69,\"1\"\n";
  auto ds = load_csv(write_file("kaggle.csv", text));
  CHECK(ds.dims() == 30);
  CHECK(ds.feature_names.front() == "Time");
  CHECK(ds.samples.y() == std::vector<int>{-1, 1});
}

TEST_CASE("csv errors name the offending cell") {
  auto bad = write_file("nan.csv", "a,b,Class\n1,2,0\n3,nan,1\n");
  try {
    load_csv(bad);
    FAIL("expected an error");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
  }
  CHECK_THROWS_AS(load_csv(write_file("nolabel.csv", "a,b\n1,2\n3,4\n")), DataError);
  CHECK_THROWS_AS(load_csv(write_file("labels.csv", "a,Class\n1,2\n3,0\n")), DataError);
  CHECK(load_csv(write_file("custom.csv", "y;f\n-1;0.5\n1;2\n"), {.label_column = "y", .delimiter = ';'}).size() == 2);
}

TEST_CASE("csv round trip") {
  auto ds = ramp(6, 2);
  auto p = fs::temp_directory_path() / "qsvm_test_data" / "round.csv";
  ds.feature_names = {"f0", "f1"};
  save_csv(ds, p);
  auto back = load_csv(p);
  CHECK(back.samples.x().isApprox(ds.samples.x()));
  CHECK(back.samples.y() == ds.samples.y());
}

TEST_CASE("smote at target is a no-op") {
  auto ds = ramp(10, 4);
  auto out = smote_oversample(ds, 4, 5, 1);
  CHECK(out.size() == 10);
  CHECK(out.samples.x().isApprox(ds.samples.x()));
}

TEST_CASE("smote between two points stays on the segment") {
  auto ds = ramp(8, 2);
  auto out = smote_oversample(ds, 3, 5, 2);
  REQUIRE(out.samples.count(1) == 3);
  std::size_t synthetic = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out.origins[i].synthetic()) continue;
    ++synthetic;
    Eigen::RowVectorXd a = ds.samples.x().row(0), b = ds.samples.x().row(1), p = out.samples.x().row(i);
    // collinear with a and b, and between them
    double t = (p - a).dot(b - a) / (b - a).squaredNorm();
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    CHECK((a + t * (b - a) - p).norm() < 1e-12);
  }
  CHECK(synthetic == 1);
}

TEST_CASE("smote reaches the exact target and is reconstructible") {
  auto ds = synth_fraud(3, 3000, 4, 50.0 / 3000, 2.0);
  auto out = smote_oversample(ds, 250, 5, 7);
  CHECK(out.samples.count(1) == 250);
  CHECK(out.samples.count(-1) == ds.samples.count(-1));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& o = out.origins[i];
    Eigen::RowVectorXd expect = ds.samples.x().row(o.first);
    if (o.synthetic()) expect += o.u * (ds.samples.x().row(*o.second) - expect);
    CHECK((out.samples.x().row(i) - expect).norm() < 1e-12);
  }
  CHECK_THROWS_AS(smote_oversample(ramp(5, 1), 3, 5, 0), DataError);
}

TEST_CASE("undersampling") {
  auto ds = ramp(40, 5);
  CHECK(random_undersample(ds, 35, 1).size() == 40);
  auto a = random_undersample(ds, 10, 9);
  auto b = random_undersample(ds, 10, 9);
  CHECK(a.samples.count(-1) == 10);
  CHECK(a.samples.count(1) == 5);
  CHECK(a.source_indices() == b.source_indices());
  CHECK(a.source_indices() != random_undersample(ds, 10, 10).source_indices());
}

TEST_CASE("balance composes to 250 per class") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto ds = synth_fraud(seed, 10000, 3, 0.004, 3.0);
    auto out = balance(ds, 250, 5, seed);
    CHECK(out.samples.count(1) == 250);
    CHECK(out.samples.count(-1) == 250);
  }
}

TEST_CASE("split protocol") {
  auto ds = synth_fraud(5, 20000, 6, 0.0017, 4.0);
  SplitPlan plan{.seed = 5, .n_train = 6, .repeats = 10};
  auto splits = paper_split(ds, plan);
  REQUIRE(splits.size() == 10);
  std::set<std::vector<std::size_t>> distinct;
  for (const auto& s : splits) {
    CHECK(s.train.size() == 6);
    CHECK(s.train.samples.count(1) == 3);
    CHECK(s.validation.size() == 494);
    CHECK(s.test.size() == 10000);
    CHECK(s.test.samples.count(1) == 17);
    CHECK(leakage_free(s));
    distinct.insert(s.test.source_indices());
  }
  CHECK(distinct.size() == 10);
  auto odd = paper_split_repeat(ds, {.seed = 1, .n_train = 7}, 0);
  CHECK(odd.train.samples.count(1) == 4);
  CHECK(odd.train.samples.count(-1) == 3);
  auto half = paper_split_repeat(ds, {.seed = 1, .n_train = 4, .validation_fraction = 0.5}, 0);
  CHECK(half.validation.size() == 248);
  CHECK_THROWS_AS(SplitPlan{.n_train = 1}.validate(), ContractError);
}

TEST_CASE("leak detection") {
  auto ds = synth_fraud(5, 2000, 3, 0.05, 4.0);
  auto s = paper_split_repeat(ds, {.seed = 2}, 0);
  s.train = s.test.subset(std::vector<std::size_t>{0});
  CHECK_FALSE(leakage_free(s));
}

TEST_CASE("metric examples") {
  CHECK(score({.tp = 3, .fn = 1}).recall == doctest::Approx(0.75));
  CHECK(score({.tp = 2, .fp = 5, .tn = 5, .fn = 2}).balanced_accuracy == doctest::Approx(0.5));
  auto perfect = score({.tp = 4, .tn = 9});
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.balanced_accuracy == 1.0);
  CHECK(perfect.f1 == 1.0);
  CHECK_FALSE(perfect.degenerate);
  auto balanced = score({.tp = 7, .fp = 2, .tn = 8, .fn = 3});
  CHECK(balanced.accuracy == doctest::Approx(balanced.balanced_accuracy));
  auto none = score({.tn = 5});
  CHECK(none.recall == 0.0);
  CHECK(none.degenerate);
}

TEST_CASE("confusion counts") {
  std::vector<int> truth{1, 1, -1, -1, 1}, pred{1, -1, -1, 1, 1};
  auto c = confusion(truth, pred);
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK(c.fp == 1);
  CHECK(c.total() == 5);
  CHECK(parse_metric(metric_name(Metric::balanced_accuracy)) == Metric::balanced_accuracy);
  CHECK_THROWS(parse_metric("auc"));
}

TEST_CASE("synthetic fraud data") {
  auto ds = synth_fraud(1, 20000, 30, 0.0017, 4.0);
  CHECK(ds.samples.count(1) == 34);
  CHECK(ds.dims() == 30);
  CHECK(synth_fraud(1, 500, 3, 0.1, 1.0).samples.x().isApprox(synth_fraud(1, 500, 3, 0.1, 1.0).samples.x()));
}

TEST_CASE("separation controls difficulty") {
  auto eval = [](double sep) {
    auto train = synth_fraud(11, 400, 5, 0.5, sep);
    auto test = synth_fraud(12, 4000, 5, 0.5, sep);
    auto m = baselines::train(baselines::SvmSpec{}, train.samples);
    return metrics(confusion(test.samples.y(), baselines::predict_all(m, test.samples.x()))).balanced_accuracy;
  };
  CHECK(eval(0.0) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(eval(6.0) > 0.95);
}
