#include "qsvm/labeled_data.hpp"

#include "qsvm/error.hpp"

#include <algorithm>
#include <string>

namespace qsvm {

LabeledData::LabeledData(FeatureMatrix x, std::vector<int> y) : x_(std::move(x)), y_(std::move(y)) {
  if (static_cast<std::size_t>(x_.rows()) != y_.size()) {
    throw ContractError("LabeledData: " + std::to_string(x_.rows()) + " feature rows but " +
                        std::to_string(y_.size()) + " labels");
  }
  for (int label : y_) require(label == 1 || label == -1, "LabeledData: labels must be +1 or -1");
  require(x_.allFinite(), "LabeledData: features must be finite");
}

std::size_t LabeledData::count(int label) const {
  return static_cast<std::size_t>(std::count(y_.begin(), y_.end(), label));
}

LabeledData LabeledData::subset(std::span<const std::size_t> indices) const {
  FeatureMatrix x(static_cast<Eigen::Index>(indices.size()), x_.cols());
  std::vector<int> y;
  y.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    require(indices[r] < size(), "LabeledData::subset: index out of range");
    x.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(indices[r]));
    y.push_back(y_[indices[r]]);
  }
  return LabeledData(std::move(x), std::move(y));
}

}  // namespace qsvm
