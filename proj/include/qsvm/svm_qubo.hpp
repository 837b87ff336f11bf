#pragma once

#include "qsvm/labeled_data.hpp"
#include "qsvm/qubo.hpp"

#include <memory>
#include <vector>

namespace qsvm {

struct KernelSpec {
  enum class Kind { linear, rbf };

  Kind kind = Kind::linear;
  double gamma = 1.0;  // rbf only

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(double gamma);
  void validate() const;
};

double kernel_eval(const KernelSpec& spec, Features u, Features v);

/// Which value plays the role of C in the bias weights alpha_n (C - alpha_n).
enum class CapConvention {
  encoding_max,  // sum_{k=0}^{K-1} B^k, the largest decodable alpha
  shifted_sum,   // sum_{k=1}^{K} B^k
};

/// Binary expansion of each multiplier: alpha_n = sum_k B^k a_{Kn+k}.
struct EncodingSpec {
  int digits = 2;     // K
  double base = 2.0;  // B
  double xi = 0.5;    // weight of the squared sum(alpha y) penalty
  CapConvention cap_convention = CapConvention::encoding_max;

  void validate() const;
  double encoding_max() const;
  double cap() const;
};

struct QuboBuildOptions {
  std::size_t max_variables = 16384;
};

/// Q_{Kn+k, Km+j} = 1/2 B^{k+j} y_n y_m (k(x_n, x_m) + xi) - delta_nm delta_kj B^k.
QuboProblem build_qubo(const TrainingSet& ts, const KernelSpec& kernel, const EncodingSpec& enc,
                       const QuboBuildOptions& options = {});
/// The same matrix written into `out`, which is resized only when its shape differs.
void fill_qubo_matrix(const TrainingSet& ts, const KernelSpec& kernel, const EncodingSpec& enc, Eigen::MatrixXd& out,
                      const QuboBuildOptions& options = {});

std::vector<double> decode_alphas(const BitString& bits, const EncodingSpec& enc, std::size_t n);

/// Weighted bias with weights alpha_n (C - alpha_n). When every weight vanishes
/// (e.g. all alpha in {0, C}) falls back to the plain mean over support vectors,
/// and to 0 when there are none.
double compute_bias(const TrainingSet& ts, const KernelSpec& kernel, std::span<const double> alphas,
                    double c);

/// Sign with the tie rule f == 0 -> +1.
inline int sign_label(double f) { return f >= 0.0 ? 1 : -1; }

class QuboSvmModel {
 public:
  QuboSvmModel(std::shared_ptr<const TrainingSet> training, KernelSpec kernel, EncodingSpec encoding,
               std::vector<double> alphas, double bias, BitString source);

  /// Decodes `bits` and derives the bias with C = encoding.cap().
  static QuboSvmModel from_bitstring(std::shared_ptr<const TrainingSet> training,
                                     const KernelSpec& kernel, const EncodingSpec& encoding,
                                     const BitString& bits);

  double decision_function(Features x) const;
  int predict(Features x) const { return sign_label(decision_function(x)); }

  const TrainingSet& training() const { return *training_; }
  const std::shared_ptr<const TrainingSet>& training_ptr() const { return training_; }
  const KernelSpec& kernel() const { return kernel_; }
  const EncodingSpec& encoding() const { return encoding_; }
  const std::vector<double>& alphas() const { return alphas_; }
  double bias() const { return bias_; }
  const BitString& source_bitstring() const { return source_; }
  std::size_t support_count() const;

 private:
  std::shared_ptr<const TrainingSet> training_;
  KernelSpec kernel_;
  EncodingSpec encoding_;
  std::vector<double> alphas_;
  double bias_ = 0.0;
  BitString source_;
};

double decision_function(const QuboSvmModel& model, Features x);
int predict(const QuboSvmModel& model, Features x);

/// One model per distinct bit string, in distribution order (modal first).
std::vector<QuboSvmModel> models_from_distribution(const SolutionDistribution& dist,
                                                   std::shared_ptr<const TrainingSet> training,
                                                   const KernelSpec& kernel,
                                                   const EncodingSpec& encoding);

}  // namespace qsvm
