#pragma once

#include "qsvm/labeled_data.hpp"
#include "qsvm/svm_qubo.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// Classical comparison models and stacking base learners. All models predict
// labels in {+1, -1}; ties resolve to +1 like the QUBO classifier.
namespace qsvm::baselines {

struct KnnSpec {
  std::size_t k = 3;
};

struct NaiveBayesSpec {
  double var_smoothing = 1e-9;  // fraction of the largest feature variance added to every variance
};

struct LogisticSpec {
  double learning_rate = 0.1;
  std::size_t epochs = 1000;
};

struct TreeSpec {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_split = 2;
  std::optional<std::size_t> max_features;  // unset = all features
};

struct ForestSpec {
  std::size_t trees = 100;
  TreeSpec tree;
  bool bootstrap = true;
  std::optional<std::size_t> max_features;  // unset = floor(sqrt(d))
};

struct SvmSpec {
  double c = 1.0;
  KernelSpec kernel;
  bool auto_gamma = true;  // rbf gamma = 1 / (d * var(X)) at training time
  double tolerance = 1e-3;
  std::size_t max_iterations = 1000000;
};

using BaselineSpec = std::variant<KnnSpec, NaiveBayesSpec, LogisticSpec, TreeSpec, ForestSpec, SvmSpec>;

struct KnnModel {
  std::shared_ptr<const LabeledData> train;
  std::size_t k = 3;
};

struct NaiveBayesModel {
  // index 0: class -1, index 1: class +1
  Eigen::MatrixXd mean;      // 2 x d
  Eigen::MatrixXd variance;  // 2 x d
  Eigen::Vector2d log_prior;
};

struct LogisticModel {
  Eigen::VectorXd weights;  // on standardized features
  double intercept = 0.0;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  int label = 1;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
  std::vector<TreeModel> trees;
};

/// Dual solution sum_i alpha_i y_i k(x_i, x) + bias, support vectors only.
struct SvmModel {
  KernelSpec kernel;
  FeatureMatrix support;
  std::vector<double> coef;  // alpha_i y_i
  double bias = 0.0;
  // Full dual vector and labels on the training set, kept for diagnostics.
  std::vector<double> alphas;
  std::vector<int> labels;
  double c = 1.0;
  std::size_t iterations = 0;
};

using ClassifierModel = std::variant<KnnModel, NaiveBayesModel, LogisticModel, TreeModel, ForestModel, SvmModel>;

/// Trains the model described by `spec`. Randomized learners (trees, forest)
/// draw from generators keyed by `seed`.
ClassifierModel train(const BaselineSpec& spec, const LabeledData& data, std::uint64_t seed = 0);

int predict(const ClassifierModel& model, Features x);
std::vector<int> predict_all(const ClassifierModel& model, const FeatureMatrix& x);

/// Real-valued score whose sign is the prediction (SVM and logistic margins,
/// vote fractions otherwise).
double decision_score(const ClassifierModel& model, Features x);

std::string kind_name(const BaselineSpec& spec);
std::string kind_name(const ClassifierModel& model);

TreeModel train_tree(const TreeSpec& spec, const LabeledData& data, std::uint64_t seed);
SvmModel train_svm(const SvmSpec& spec, const LabeledData& data);

}  // namespace qsvm::baselines
