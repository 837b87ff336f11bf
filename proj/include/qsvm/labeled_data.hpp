#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace qsvm {

/// Samples stored one per row so each feature vector is contiguous.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Features = std::span<const double>;

inline Features row_of(const FeatureMatrix& x, std::size_t i) {
  return {x.data() + static_cast<Eigen::Index>(i) * x.cols(), static_cast<std::size_t>(x.cols())};
}

/// Feature matrix plus {+1, -1} labels of equal length.
class LabeledData {
 public:
  LabeledData() = default;
  LabeledData(FeatureMatrix x, std::vector<int> y);

  std::size_t size() const { return y_.size(); }
  std::size_t dims() const { return static_cast<std::size_t>(x_.cols()); }
  bool empty() const { return y_.empty(); }

  const FeatureMatrix& x() const { return x_; }
  const std::vector<int>& y() const { return y_; }
  Features row(std::size_t i) const { return row_of(x_, i); }
  int label(std::size_t i) const { return y_[i]; }

  std::size_t count(int label) const;
  bool has_both_classes() const { return count(1) > 0 && count(-1) > 0; }

  LabeledData subset(std::span<const std::size_t> indices) const;

 private:
  FeatureMatrix x_;
  std::vector<int> y_;
};

using TrainingSet = LabeledData;

}  // namespace qsvm
