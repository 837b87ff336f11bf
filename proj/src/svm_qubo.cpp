#include "qsvm/svm_qubo.hpp"

#include "qsvm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qsvm {

KernelSpec KernelSpec::rbf(double gamma) {
  KernelSpec spec{Kind::rbf, gamma};
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (kind == Kind::rbf) require(gamma > 0.0 && std::isfinite(gamma), "KernelSpec: rbf gamma must be positive");
}

double kernel_eval(const KernelSpec& spec, Features u, Features v) {
  if (u.size() != v.size()) {
    throw ContractError("kernel_eval: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()) + ")");
  }
  if (spec.kind == KernelSpec::Kind::linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    return dot;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    d2 += d * d;
  }
  return std::exp(-spec.gamma * d2);
}

void EncodingSpec::validate() const {
  require(digits >= 1, "EncodingSpec: K must be at least 1");
  require(base >= 1.0 && std::isfinite(base), "EncodingSpec: base must be >= 1");
  require(xi >= 0.0 && std::isfinite(xi), "EncodingSpec: xi must be nonnegative");
  const double c = encoding_max();
  require(std::isfinite(c) && c > 0.0, "EncodingSpec: coefficient cap must be finite");
}

double EncodingSpec::encoding_max() const {
  double c = 0.0;
  for (int k = 0; k < digits; ++k) c += std::pow(base, k);
  return c;
}

double EncodingSpec::cap() const {
  if (cap_convention == CapConvention::encoding_max) return encoding_max();
  double c = 0.0;
  for (int k = 1; k <= digits; ++k) c += std::pow(base, k);
  return c;
}

void fill_qubo_matrix(const TrainingSet& ts, const KernelSpec& kernel, const EncodingSpec& enc, Eigen::MatrixXd& q,
                      const QuboBuildOptions& options) {
  kernel.validate();
  enc.validate();
  const std::size_t n = ts.size();
  if (n < 2) throw DataError("build_qubo: at least two training samples required");
  if (!ts.has_both_classes()) throw DataError("build_qubo: training set contains a single class");
  const auto digits = static_cast<std::size_t>(enc.digits);
  if (n * digits > options.max_variables) {
    throw CapacityError("build_qubo: " + std::to_string(n * digits) +
                        " binary variables exceed the register capacity of " +
                        std::to_string(options.max_variables));
  }

  std::vector<double> powers(digits);
  for (std::size_t k = 0; k < digits; ++k) powers[k] = std::pow(enc.base, static_cast<double>(k));

  const FeatureMatrix& x = ts.x();
  const std::size_t dims = ts.dims();
  Eigen::VectorXd sq;
  if (kernel.kind == KernelSpec::Kind::rbf) sq = x.rowwise().squaredNorm();
  Eigen::VectorXd y(n);
  for (std::size_t a = 0; a < n; ++a) y(static_cast<Eigen::Index>(a)) = ts.label(a);

  const auto size = static_cast<Eigen::Index>(n * digits);
  q.resize(size, size);
  // Column (m, j) is column (m, 0) scaled by B^j.
  Eigen::VectorXd kcol(n);
  for (std::size_t m = 0; m < n; ++m) {
    const auto mi = static_cast<Eigen::Index>(m);
    const double* xm = x.row(mi).data();
    for (std::size_t nn = 0; nn < n; ++nn) {
      const double* xn = x.row(static_cast<Eigen::Index>(nn)).data();
      double dot = 0.0;
      for (std::size_t i = 0; i < dims; ++i) dot += xn[i] * xm[i];
      kcol(static_cast<Eigen::Index>(nn)) = dot;
    }
    if (kernel.kind == KernelSpec::Kind::rbf) {
      kcol = (-kernel.gamma * ((sq.array() + sq(mi)) - 2.0 * kcol.array()).max(0.0)).exp().matrix();
    }
    const auto first = static_cast<Eigen::Index>(m * digits);
    double* head = q.col(first).data();
    const double ym = 0.5 * y(mi);
    for (std::size_t nn = 0; nn < n; ++nn) {
      const double c = ym * y(static_cast<Eigen::Index>(nn)) * (kcol(static_cast<Eigen::Index>(nn)) + enc.xi);
      for (std::size_t k = 0; k < digits; ++k) head[nn * digits + k] = c * powers[k];
    }
    for (std::size_t j = 1; j < digits; ++j) {
      q.col(first + static_cast<Eigen::Index>(j)).noalias() = powers[j] * q.col(first);
    }
    for (std::size_t j = 0; j < digits; ++j) q(first + static_cast<Eigen::Index>(j), first + static_cast<Eigen::Index>(j)) -= powers[j];
  }
}

QuboProblem build_qubo(const TrainingSet& ts, const KernelSpec& kernel, const EncodingSpec& enc,
                       const QuboBuildOptions& options) {
  Eigen::MatrixXd q;
  fill_qubo_matrix(ts, kernel, enc, q, options);
  return QuboProblem::from_symmetric(std::move(q));
}

std::vector<double> decode_alphas(const BitString& bits, const EncodingSpec& enc, std::size_t n) {
  enc.validate();
  const auto digits = static_cast<std::size_t>(enc.digits);
  if (bits.size() != digits * n) {
    throw ContractError("decode_alphas: expected " + std::to_string(digits * n) + " bits, got " +
                        std::to_string(bits.size()));
  }
  std::vector<double> alphas(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double power = 1.0;
    for (std::size_t k = 0; k < digits; ++k) {
      if (bits[digits * s + k]) alphas[s] += power;
      power *= enc.base;
    }
  }
  return alphas;
}

double compute_bias(const TrainingSet& ts, const KernelSpec& kernel, std::span<const double> alphas,
                    double c) {
  const std::size_t n = ts.size();
  require(alphas.size() == n, "compute_bias: one alpha per training sample required");

  auto margin_residual = [&](std::size_t s) {
    double sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (alphas[m] != 0.0) sum += alphas[m] * ts.label(m) * kernel_eval(kernel, ts.row(s), ts.row(m));
    }
    return ts.label(s) - sum;
  };

  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double w = alphas[s] * (c - alphas[s]);
    if (w == 0.0) continue;
    numerator += w * margin_residual(s);
    denominator += w;
  }
  if (std::abs(denominator) >= 1e-12) return numerator / denominator;

  double sum = 0.0;
  std::size_t support = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (alphas[s] > 0.0) {
      sum += margin_residual(s);
      ++support;
    }
  }
  return support ? sum / static_cast<double>(support) : 0.0;
}

QuboSvmModel::QuboSvmModel(std::shared_ptr<const TrainingSet> training, KernelSpec kernel,
                           EncodingSpec encoding, std::vector<double> alphas, double bias,
                           BitString source)
    : training_(std::move(training)),
      kernel_(kernel),
      encoding_(encoding),
      alphas_(std::move(alphas)),
      bias_(bias),
      source_(std::move(source)) {
  require(training_ != nullptr, "QuboSvmModel: training set required");
  require(alphas_.size() == training_->size(), "QuboSvmModel: one alpha per training sample required");
  const double cmax = encoding_.encoding_max();
  for (double a : alphas_) require(a >= 0.0 && a <= cmax, "QuboSvmModel: alpha outside [0, C]");
}

QuboSvmModel QuboSvmModel::from_bitstring(std::shared_ptr<const TrainingSet> training,
                                          const KernelSpec& kernel, const EncodingSpec& encoding,
                                          const BitString& bits) {
  require(training != nullptr, "QuboSvmModel: training set required");
  auto alphas = decode_alphas(bits, encoding, training->size());
  const double bias = compute_bias(*training, kernel, alphas, encoding.cap());
  return QuboSvmModel(std::move(training), kernel, encoding, std::move(alphas), bias, bits);
}

double QuboSvmModel::decision_function(Features x) const {
  if (x.size() != training_->dims()) {
    throw ContractError("decision_function: expected " + std::to_string(training_->dims()) +
                        " features, got " + std::to_string(x.size()));
  }
  double f = bias_;
  for (std::size_t s = 0; s < alphas_.size(); ++s) {
    if (alphas_[s] != 0.0) f += alphas_[s] * training_->label(s) * kernel_eval(kernel_, training_->row(s), x);
  }
  return f;
}

std::size_t QuboSvmModel::support_count() const {
  std::size_t count = 0;
  for (double a : alphas_) count += a > 0.0;
  return count;
}

double decision_function(const QuboSvmModel& model, Features x) { return model.decision_function(x); }

int predict(const QuboSvmModel& model, Features x) { return model.predict(x); }

std::vector<QuboSvmModel> models_from_distribution(const SolutionDistribution& dist,
                                                   std::shared_ptr<const TrainingSet> training,
                                                   const KernelSpec& kernel,
                                                   const EncodingSpec& encoding) {
  require(training != nullptr, "models_from_distribution: training set required");
  std::vector<QuboSvmModel> models;
  models.reserve(dist.size());
  for (const auto& entry : dist.entries()) {
    models.push_back(QuboSvmModel::from_bitstring(training, kernel, encoding, entry.bits));
  }
  return models;
}

}  // namespace qsvm
