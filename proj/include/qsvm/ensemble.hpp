#pragma once

#include "qsvm/baselines.hpp"
#include "qsvm/data.hpp"
#include "qsvm/svm_qubo.hpp"

#include <functional>
#include <vector>

namespace qsvm::ensemble {

/// Distinct-bitstring models ordered by descending state probability; the
/// first `n_used` vote.
struct VotingEnsemble {
  std::vector<QuboSvmModel> members;
  std::vector<double> weights;  // empty = unweighted; otherwise one per member
  std::size_t n_used = 0;
};

VotingEnsemble make_ensemble(std::vector<QuboSvmModel> members, std::size_t n_used = 0,
                             std::vector<double> weights = {});

/// Members built from every distinct bitstring of `dist`; probabilities kept as
/// weights when `weighted`.
VotingEnsemble ensemble_from_distribution(const SolutionDistribution& dist,
                                          std::shared_ptr<const TrainingSet> training, const KernelSpec& kernel,
                                          const EncodingSpec& encoding, bool weighted = false);

/// Removes members without support vectors (constant classifiers) and their
/// weights. Keeps the first member when every one is empty.
void drop_empty_members(std::vector<QuboSvmModel>& members, std::vector<double>& weights);

int vote_predict(const VotingEnsemble& ens, Features x);
std::vector<int> vote_predict_all(const VotingEnsemble& ens, const FeatureMatrix& x);

/// Tries n_used = 1..|members| and keeps the smallest count reaching the best
/// validation score.
VotingEnsemble optimize_vote_count(std::vector<QuboSvmModel> members, const LabeledData& validation,
                                   data::Metric metric, std::vector<double> weights = {});

/// Validation score for every prefix length, index n-1 for n members.
std::vector<double> vote_count_profile(const VotingEnsemble& ens, const LabeledData& validation,
                                       data::Metric metric);

using QuboSolver = std::function<SolutionDistribution(const QuboProblem&)>;

enum class MetaAggregation { modal, all, optimized };

struct StackOptions {
  KernelSpec kernel;
  EncodingSpec encoding;
  MetaAggregation aggregation = MetaAggregation::all;
  data::Metric metric = data::Metric::recall;  // for MetaAggregation::optimized
  bool weighted = false;
  bool keep_empty_members = false;
  std::uint64_t seed = 0;
};

struct StackedModel {
  std::vector<baselines::ClassifierModel> base_learners;
  VotingEnsemble meta;  // QUBO SVM models over the base-learner predictions
  double feature_scale = 1.0;

  std::size_t meta_dims() const { return base_learners.size(); }
};

/// Naive Bayes, Random Forest, Logistic Regression, KNN(k=3).
std::vector<baselines::BaselineSpec> default_stack_bases();

/// Base predictions (+1/-1) scaled by 1/sqrt(L) so that the meta kernel stays
/// in the same range for every base-set size.
FeatureMatrix meta_features(const std::vector<baselines::ClassifierModel>& bases, const FeatureMatrix& x,
                            double scale);

StackedModel stack_train(const std::vector<baselines::BaselineSpec>& base_specs, const LabeledData& train,
                         const LabeledData& validation, const QuboSolver& solver, const StackOptions& options);

int stack_predict(const StackedModel& m, Features x);
std::vector<int> stack_predict_all(const StackedModel& m, const FeatureMatrix& x);

}  // namespace qsvm::ensemble
