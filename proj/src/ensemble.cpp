#include "qsvm/ensemble.hpp"

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

#include <cmath>

namespace qsvm::ensemble {

namespace {

// members x samples matrix of +1/-1 predictions.
std::vector<std::vector<int>> member_predictions(const std::vector<QuboSvmModel>& members, const FeatureMatrix& x,
                                                 std::size_t count) {
  std::vector<std::vector<int>> out(count, std::vector<int>(static_cast<std::size_t>(x.rows())));
  for (std::size_t m = 0; m < count; ++m) {
    for (std::size_t i = 0; i < out[m].size(); ++i) out[m][i] = members[m].predict(row_of(x, i));
  }
  return out;
}

double member_weight(const VotingEnsemble& ens, std::size_t m) { return ens.weights.empty() ? 1.0 : ens.weights[m]; }

}  // namespace

VotingEnsemble make_ensemble(std::vector<QuboSvmModel> members, std::size_t n_used, std::vector<double> weights) {
  require(!members.empty(), "VotingEnsemble: no members");
  require(weights.empty() || weights.size() == members.size(), "VotingEnsemble: one weight per member required");
  for (double w : weights) require(std::isfinite(w) && w >= 0.0, "VotingEnsemble: weights must be non-negative");
  if (n_used == 0) n_used = members.size();
  require(n_used <= members.size(), "VotingEnsemble: n_used exceeds the member count");
  return VotingEnsemble{std::move(members), std::move(weights), n_used};
}

VotingEnsemble ensemble_from_distribution(const SolutionDistribution& dist,
                                          std::shared_ptr<const TrainingSet> training, const KernelSpec& kernel,
                                          const EncodingSpec& encoding, bool weighted) {
  auto members = models_from_distribution(dist, std::move(training), kernel, encoding);
  std::vector<double> weights;
  if (weighted) {
    for (const auto& e : dist.entries()) weights.push_back(e.probability);
  }
  return make_ensemble(std::move(members), 0, std::move(weights));
}

void drop_empty_members(std::vector<QuboSvmModel>& members, std::vector<double>& weights) {
  require(weights.empty() || weights.size() == members.size(), "drop_empty_members: one weight per member required");
  std::vector<QuboSvmModel> kept;
  std::vector<double> kept_weights;
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (members[m].support_count() == 0) continue;
    kept.push_back(members[m]);
    if (!weights.empty()) kept_weights.push_back(weights[m]);
  }
  if (kept.empty() && !members.empty()) {
    kept.push_back(members.front());
    if (!weights.empty()) kept_weights.push_back(weights.front());
  }
  members = std::move(kept);
  weights = std::move(kept_weights);
}

int vote_predict(const VotingEnsemble& ens, Features x) {
  require(!ens.members.empty() && ens.n_used >= 1 && ens.n_used <= ens.members.size(),
          "vote_predict: empty ensemble");
  double sum = 0.0;
  double total = 0.0;
  for (std::size_t m = 0; m < ens.n_used; ++m) {
    const double w = member_weight(ens, m);
    sum += w * ens.members[m].predict(x);
    total += w;
  }
  return sign_label(total > 0.0 ? sum / total : 0.0);
}

std::vector<int> vote_predict_all(const VotingEnsemble& ens, const FeatureMatrix& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vote_predict(ens, row_of(x, i));
  return out;
}

std::vector<double> vote_count_profile(const VotingEnsemble& ens, const LabeledData& validation,
                                       data::Metric metric) {
  require(!ens.members.empty(), "vote_count_profile: empty ensemble");
  require(!validation.empty(), "vote_count_profile: empty validation set");
  const auto preds = member_predictions(ens.members, validation.x(), ens.members.size());
  std::vector<double> running(validation.size(), 0.0);
  std::vector<int> voted(validation.size());
  std::vector<double> profile;
  profile.reserve(ens.members.size());
  for (std::size_t m = 0; m < ens.members.size(); ++m) {
    const double w = member_weight(ens, m);
    for (std::size_t i = 0; i < running.size(); ++i) {
      running[i] += w * preds[m][i];
      voted[i] = sign_label(running[i]);
    }
    profile.push_back(data::metric_value(data::metrics(data::confusion(validation.y(), voted)), metric));
  }
  return profile;
}

VotingEnsemble optimize_vote_count(std::vector<QuboSvmModel> members, const LabeledData& validation,
                                   data::Metric metric, std::vector<double> weights) {
  require(!members.empty(), "optimize_vote_count: no members");
  require(!validation.empty(), "optimize_vote_count: empty validation set");
  if (metric == data::Metric::balanced_accuracy && !validation.has_both_classes()) {
    throw DataError("optimize_vote_count: balanced accuracy needs both classes in the validation set");
  }
  VotingEnsemble ens = make_ensemble(std::move(members), 0, std::move(weights));
  const auto profile = vote_count_profile(ens, validation, metric);
  std::size_t best = 0;
  for (std::size_t n = 1; n < profile.size(); ++n) {
    if (profile[n] > profile[best]) best = n;
  }
  ens.n_used = best + 1;
  return ens;
}

std::vector<baselines::BaselineSpec> default_stack_bases() {
  return {baselines::NaiveBayesSpec{}, baselines::ForestSpec{}, baselines::LogisticSpec{}, baselines::KnnSpec{3}};
}

FeatureMatrix meta_features(const std::vector<baselines::ClassifierModel>& bases, const FeatureMatrix& x,
                            double scale) {
  FeatureMatrix out(x.rows(), static_cast<Eigen::Index>(bases.size()));
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out(i, static_cast<Eigen::Index>(b)) = scale * baselines::predict(bases[b], row_of(x, static_cast<std::size_t>(i)));
    }
  }
  return out;
}

StackedModel stack_train(const std::vector<baselines::BaselineSpec>& base_specs, const LabeledData& train,
                         const LabeledData& validation, const QuboSolver& solver, const StackOptions& options) {
  require(!base_specs.empty(), "stack_train: at least one base learner required");
  require(static_cast<bool>(solver), "stack_train: no solver given");
  StackedModel m;
  m.feature_scale = 1.0 / std::sqrt(static_cast<double>(base_specs.size()));
  for (std::size_t b = 0; b < base_specs.size(); ++b) {
    const std::string who = "stack base learner " + std::to_string(b) + " (" + baselines::kind_name(base_specs[b]) + ")";
    try {
      m.base_learners.push_back(
          baselines::train(base_specs[b], train, derive_seed(options.seed, streams::kBaseline, b)));
    } catch (const DataError& e) {
      throw DataError(who + ": " + e.what());
    } catch (const ContractError& e) {
      throw ContractError(who + ": " + e.what());
    }
  }

  auto meta_train = std::make_shared<const TrainingSet>(meta_features(m.base_learners, train.x(), m.feature_scale),
                                                        train.y());
  const QuboProblem q = build_qubo(*meta_train, options.kernel, options.encoding);
  const SolutionDistribution dist = solver(q);
  auto members = models_from_distribution(dist, meta_train, options.kernel, options.encoding);
  std::vector<double> weights;
  if (options.weighted) {
    for (const auto& e : dist.entries()) weights.push_back(e.probability);
  }
  if (!options.keep_empty_members) drop_empty_members(members, weights);

  switch (options.aggregation) {
    case MetaAggregation::modal:
      m.meta = make_ensemble(std::move(members), 1, std::move(weights));
      break;
    case MetaAggregation::all:
      m.meta = make_ensemble(std::move(members), 0, std::move(weights));
      break;
    case MetaAggregation::optimized: {
      const LabeledData meta_val(meta_features(m.base_learners, validation.x(), m.feature_scale), validation.y());
      m.meta = optimize_vote_count(std::move(members), meta_val, options.metric, std::move(weights));
      break;
    }
  }
  return m;
}

int stack_predict(const StackedModel& m, Features x) {
  require(!m.base_learners.empty(), "stack_predict: model has no base learners");
  require(m.meta.members.front().training().dims() == m.meta_dims(), "stack_predict: meta dimension mismatch");
  std::vector<double> f(m.base_learners.size());
  for (std::size_t b = 0; b < f.size(); ++b) f[b] = m.feature_scale * baselines::predict(m.base_learners[b], x);
  return vote_predict(m.meta, f);
}

std::vector<int> stack_predict_all(const StackedModel& m, const FeatureMatrix& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stack_predict(m, row_of(x, i));
  return out;
}

}  // namespace qsvm::ensemble
