#include "qsvm/baselines.hpp"

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qsvm::baselines {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_both_classes(const LabeledData& data, const char* who) {
  if (data.empty()) throw DataError(std::string(who) + ": empty training set");
  if (!data.has_both_classes()) throw DataError(std::string(who) + ": training set contains a single class");
}

double squared_distance(Features a, Features b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_dims(std::size_t expected, Features x, const char* who) {
  if (x.size() != expected) {
    throw ContractError(std::string(who) + ": expected " + std::to_string(expected) + " features, got " +
                        std::to_string(x.size()));
  }
}

// --- k nearest neighbours ---------------------------------------------------

double knn_score(const KnnModel& m, Features x) {
  const auto& train = *m.train;
  check_dims(train.dims(), x, "knn");
  std::vector<std::pair<double, std::size_t>> d(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) d[i] = {squared_distance(train.row(i), x), i};
  const std::size_t k = std::min(m.k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  // Exact matches outvote everything else.
  std::size_t exact = 0;
  while (exact < k && d[exact].first == 0.0) ++exact;
  const std::size_t voters = exact ? exact : k;
  double votes = 0.0;
  for (std::size_t i = 0; i < voters; ++i) votes += train.label(d[i].second);
  if (votes == 0.0) return train.label(d[0].second) * 1e-9;
  return votes / static_cast<double>(voters);
}

// --- Gaussian naive Bayes ---------------------------------------------------

NaiveBayesModel train_nb(const NaiveBayesSpec& spec, const LabeledData& data) {
  require_both_classes(data, "naive_bayes");
  const auto d = static_cast<Eigen::Index>(data.dims());
  NaiveBayesModel m;
  m.mean = Eigen::MatrixXd::Zero(2, d);
  m.variance = Eigen::MatrixXd::Zero(2, d);
  Eigen::Vector2d counts = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = data.label(i) > 0 ? 1 : 0;
    counts[c] += 1.0;
    m.mean.row(c) += data.x().row(static_cast<Eigen::Index>(i));
  }
  for (int c = 0; c < 2; ++c) m.mean.row(c) /= counts[c];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = data.label(i) > 0 ? 1 : 0;
    m.variance.row(c) += (data.x().row(static_cast<Eigen::Index>(i)) - m.mean.row(c)).array().square().matrix();
  }
  for (int c = 0; c < 2; ++c) m.variance.row(c) /= counts[c];

  const Eigen::RowVectorXd grand_mean = data.x().colwise().mean();
  const double max_var =
      (data.x().rowwise() - grand_mean).array().square().colwise().mean().maxCoeff();
  const double epsilon = std::max(spec.var_smoothing * max_var, 1e-300);
  m.variance.array() += epsilon;
  const double total = counts.sum();
  m.log_prior = (counts / total).array().log();
  return m;
}

double nb_score(const NaiveBayesModel& m, Features x) {
  check_dims(static_cast<std::size_t>(m.mean.cols()), x, "naive_bayes");
  double joint[2];
  for (int c = 0; c < 2; ++c) {
    double s = m.log_prior[c];
    for (Eigen::Index f = 0; f < m.mean.cols(); ++f) {
      const double var = m.variance(c, f);
      const double diff = x[static_cast<std::size_t>(f)] - m.mean(c, f);
      s -= 0.5 * (std::log(2.0 * 3.14159265358979323846 * var) + diff * diff / var);
    }
    joint[c] = s;
  }
  return joint[1] - joint[0];
}

// --- logistic regression ----------------------------------------------------

LogisticModel train_logistic(const LogisticSpec& spec, const LabeledData& data) {
  require_both_classes(data, "logistic_regression");
  require(spec.learning_rate > 0.0 && spec.epochs >= 1, "logistic_regression: positive rate and epochs required");
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto d = static_cast<Eigen::Index>(data.dims());
  LogisticModel m;
  m.feature_mean = data.x().colwise().mean().transpose();
  m.feature_scale = ((data.x().rowwise() - m.feature_mean.transpose()).array().square().colwise().mean().sqrt())
                        .transpose();
  for (Eigen::Index f = 0; f < d; ++f) {
    if (m.feature_scale[f] <= 1e-12) m.feature_scale[f] = 1.0;
  }
  const Eigen::MatrixXd z =
      (data.x().rowwise() - m.feature_mean.transpose()).array().rowwise() / m.feature_scale.transpose().array();
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) target[i] = data.label(static_cast<std::size_t>(i)) > 0 ? 1.0 : 0.0;

  m.weights = Eigen::VectorXd::Zero(d);
  m.intercept = 0.0;
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    const Eigen::VectorXd logits = (z * m.weights).array() + m.intercept;
    const Eigen::VectorXd p = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
    const Eigen::VectorXd err = p - target;
    m.weights -= spec.learning_rate * (z.transpose() * err) / static_cast<double>(n);
    m.intercept -= spec.learning_rate * err.mean();
  }
  return m;
}

double logistic_score(const LogisticModel& m, Features x) {
  check_dims(static_cast<std::size_t>(m.weights.size()), x, "logistic_regression");
  double s = m.intercept;
  for (Eigen::Index f = 0; f < m.weights.size(); ++f) {
    s += m.weights[f] * (x[static_cast<std::size_t>(f)] - m.feature_mean[f]) / m.feature_scale[f];
  }
  return s;
}

// --- CART decision tree -----------------------------------------------------

int majority(const LabeledData& data, std::span<const std::size_t> idx) {
  long long sum = 0;
  for (auto i : idx) sum += data.label(i);
  return sum >= 0 ? 1 : -1;
}

double gini(double pos, double total) {
  if (total <= 0.0) return 0.0;
  const double p = pos / total;
  return 2.0 * p * (1.0 - p);
}

struct TreeBuilder {
  const TreeSpec& spec;
  const LabeledData& data;
  Rng& rng;
  std::size_t features_per_split;
  TreeModel model;

  int build(std::vector<std::size_t> idx, std::size_t depth) {
    const int node_id = static_cast<int>(model.nodes.size());
    model.nodes.push_back({});
    model.nodes[static_cast<std::size_t>(node_id)].label = majority(data, idx);

    std::size_t pos = 0;
    for (auto i : idx) pos += data.label(i) > 0;
    const bool pure = pos == 0 || pos == idx.size();
    const bool depth_reached = spec.max_depth > 0 && depth >= spec.max_depth;
    if (pure || depth_reached || idx.size() < std::max<std::size_t>(spec.min_split, 2)) return node_id;

    std::vector<std::size_t> features(data.dims());
    std::iota(features.begin(), features.end(), 0);
    if (features_per_split < features.size()) {
      std::shuffle(features.begin(), features.end(), rng);
      features.resize(features_per_split);
      std::sort(features.begin(), features.end());
    }

    const double total = static_cast<double>(idx.size());
    const double parent = gini(static_cast<double>(pos), total);
    double best_impurity = parent - 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = idx;
    for (auto f : features) {
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        const double va = data.x()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f));
        const double vb = data.x()(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f));
        return va != vb ? va < vb : a < b;
      });
      double left_pos = 0.0;
      for (std::size_t s = 0; s + 1 < sorted.size(); ++s) {
        left_pos += data.label(sorted[s]) > 0;
        const double v0 = data.x()(static_cast<Eigen::Index>(sorted[s]), static_cast<Eigen::Index>(f));
        const double v1 = data.x()(static_cast<Eigen::Index>(sorted[s + 1]), static_cast<Eigen::Index>(f));
        if (v0 == v1) continue;
        const double nl = static_cast<double>(s + 1);
        const double nr = total - nl;
        const double impurity =
            (nl * gini(left_pos, nl) + nr * gini(static_cast<double>(pos) - left_pos, nr)) / total;
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (v0 + v1);
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      const double v = data.x()(static_cast<Eigen::Index>(i), best_feature);
      (v <= best_threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    auto& node = model.nodes[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return node_id;
  }
};

TreeModel build_tree(const TreeSpec& spec, const LabeledData& data, std::vector<std::size_t> idx,
                     std::size_t features_per_split, Rng& rng) {
  TreeBuilder builder{spec, data, rng, std::max<std::size_t>(1, features_per_split), {}};
  builder.build(std::move(idx), 0);
  return std::move(builder.model);
}

int tree_predict(const TreeModel& m, Features x) {
  require(!m.nodes.empty(), "decision_tree: empty model");
  std::size_t node = 0;
  while (m.nodes[node].feature >= 0) {
    const auto& n = m.nodes[node];
    require(static_cast<std::size_t>(n.feature) < x.size(), "decision_tree: feature index out of range");
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return m.nodes[node].label;
}

ForestModel train_forest(const ForestSpec& spec, const LabeledData& data, std::uint64_t seed) {
  require_both_classes(data, "random_forest");
  require(spec.trees >= 1, "random_forest: at least one tree required");
  const std::size_t d = data.dims();
  const std::size_t per_split =
      spec.max_features ? *spec.max_features
                        : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
  ForestModel forest;
  forest.trees.reserve(spec.trees);
  for (std::size_t t = 0; t < spec.trees; ++t) {
    Rng tree_rng = make_rng(seed, streams::kBaseline, t);
    std::vector<std::size_t> idx(data.size());
    if (spec.bootstrap) {
      Rng boot_rng = make_rng(seed, streams::kBaseline + 1, t);
      std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
      for (auto& i : idx) i = pick(boot_rng);
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    forest.trees.push_back(build_tree(spec.tree, data, std::move(idx), per_split, tree_rng));
  }
  return forest;
}

double forest_score(const ForestModel& m, Features x) {
  double votes = 0.0;
  for (const auto& t : m.trees) votes += tree_predict(t, x);
  return votes / static_cast<double>(m.trees.size());
}

double svm_score(const SvmModel& m, Features x) {
  check_dims(static_cast<std::size_t>(m.support.cols()), x, "svm");
  double f = m.bias;
  for (std::size_t s = 0; s < m.coef.size(); ++s) f += m.coef[s] * kernel_eval(m.kernel, row_of(m.support, s), x);
  return f;
}

}  // namespace

TreeModel train_tree(const TreeSpec& spec, const LabeledData& data, std::uint64_t seed) {
  require_both_classes(data, "decision_tree");
  Rng rng = make_rng(seed, streams::kBaseline, 0);
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  return build_tree(spec, data, std::move(idx), spec.max_features.value_or(data.dims()), rng);
}

// Sequential minimal optimization with maximal-violating-pair selection:
// min 1/2 a^T Q a - e^T a  s.t.  y^T a = 0, 0 <= a <= C,  Q_ij = y_i y_j k(x_i, x_j).
SvmModel train_svm(const SvmSpec& spec, const LabeledData& data) {
  require_both_classes(data, "svm");
  require(spec.c > 0.0, "svm: C must be positive");
  const std::size_t n = data.size();
  KernelSpec kernel = spec.kernel;
  if (kernel.kind == KernelSpec::Kind::rbf && spec.auto_gamma) {
    const double mean = data.x().mean();
    const double var = (data.x().array() - mean).square().mean();
    kernel.gamma = var > 0.0 ? 1.0 / (static_cast<double>(data.dims()) * var) : 1.0;
  }
  kernel.validate();

  Eigen::MatrixXd q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = data.label(i) * data.label(j) * kernel_eval(kernel, data.row(i), data.row(j));
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }

  const double c = spec.c;
  constexpr double kTau = 1e-12;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  const auto& y = data.y();
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c); };

  std::size_t iter = 0;
  for (; iter < spec.max_iterations; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
      if (in_low(t) && y[t] * grad[t] > gmax2) {
        gmax2 = y[t] * grad[t];
        j = t;
      }
    }
    if (i == n || j == n || gmax + gmax2 < spec.tolerance) break;

    const auto ii = static_cast<Eigen::Index>(i);
    const auto jj = static_cast<Eigen::Index>(j);
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = q(ii, ii) + q(jj, jj) + 2.0 * q(ii, jj);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q(ii, ii) + q(jj, jj) - 2.0 * q(ii, jj);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += q(static_cast<Eigen::Index>(t), ii) * di + q(static_cast<Eigen::Index>(t), jj) * dj;
    }
  }

  // rho from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);

  SvmModel m;
  m.kernel = kernel;
  m.bias = std::isfinite(rho) ? -rho : 0.0;
  m.alphas = alpha;
  m.labels = y;
  m.c = c;
  m.iterations = iter;
  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) sv.push_back(t);
  }
  m.support = FeatureMatrix(static_cast<Eigen::Index>(sv.size()), static_cast<Eigen::Index>(data.dims()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    m.support.row(static_cast<Eigen::Index>(s)) = data.x().row(static_cast<Eigen::Index>(sv[s]));
    m.coef.push_back(alpha[sv[s]] * y[sv[s]]);
  }
  return m;
}

ClassifierModel train(const BaselineSpec& spec, const LabeledData& data, std::uint64_t seed) {
  return std::visit(
      overloaded{
          [&](const KnnSpec& s) -> ClassifierModel {
            require(s.k >= 1, "knn: k must be positive");
            if (data.empty()) throw DataError("knn: empty training set");
            return KnnModel{std::make_shared<const LabeledData>(data), s.k};
          },
          [&](const NaiveBayesSpec& s) -> ClassifierModel { return train_nb(s, data); },
          [&](const LogisticSpec& s) -> ClassifierModel { return train_logistic(s, data); },
          [&](const TreeSpec& s) -> ClassifierModel { return train_tree(s, data, seed); },
          [&](const ForestSpec& s) -> ClassifierModel { return train_forest(s, data, seed); },
          [&](const SvmSpec& s) -> ClassifierModel { return train_svm(s, data); },
      },
      spec);
}

double decision_score(const ClassifierModel& model, Features x) {
  return std::visit(overloaded{
                        [&](const KnnModel& m) { return knn_score(m, x); },
                        [&](const NaiveBayesModel& m) { return nb_score(m, x); },
                        [&](const LogisticModel& m) { return logistic_score(m, x); },
                        [&](const TreeModel& m) { return static_cast<double>(tree_predict(m, x)); },
                        [&](const ForestModel& m) { return forest_score(m, x); },
                        [&](const SvmModel& m) { return svm_score(m, x); },
                    },
                    model);
}

int predict(const ClassifierModel& model, Features x) { return sign_label(decision_score(model, x)); }

std::vector<int> predict_all(const ClassifierModel& model, const FeatureMatrix& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = predict(model, row_of(x, i));
  return out;
}

std::string kind_name(const BaselineSpec& spec) {
  return std::visit(overloaded{
                        [](const KnnSpec&) { return std::string("knn"); },
                        [](const NaiveBayesSpec&) { return std::string("naive_bayes"); },
                        [](const LogisticSpec&) { return std::string("logistic_regression"); },
                        [](const TreeSpec&) { return std::string("decision_tree"); },
                        [](const ForestSpec&) { return std::string("random_forest"); },
                        [](const SvmSpec&) { return std::string("svm"); },
                    },
                    spec);
}

std::string kind_name(const ClassifierModel& model) {
  return std::visit(overloaded{
                        [](const KnnModel&) { return std::string("knn"); },
                        [](const NaiveBayesModel&) { return std::string("naive_bayes"); },
                        [](const LogisticModel&) { return std::string("logistic_regression"); },
                        [](const TreeModel&) { return std::string("decision_tree"); },
                        [](const ForestModel&) { return std::string("random_forest"); },
                        [](const SvmModel&) { return std::string("svm"); },
                    },
                    model);
}

}  // namespace qsvm::baselines
