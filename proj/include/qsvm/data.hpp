#pragma once

#include "qsvm/labeled_data.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qsvm::data {

/// Where a row came from. Original rows point at their index in the source
/// file; SMOTE rows are x[first] + u * (x[second] - x[first]).
struct RowOrigin {
  std::size_t first = 0;
  std::optional<std::size_t> second;
  double u = 0.0;

  bool synthetic() const { return second.has_value(); }
};

struct Dataset {
  LabeledData samples;
  std::vector<std::string> feature_names;
  std::vector<RowOrigin> origins;  // one per row, indices into the loaded file

  Dataset() = default;
  Dataset(LabeledData samples, std::vector<std::string> names);
  Dataset(LabeledData samples, std::vector<std::string> names, std::vector<RowOrigin> origins);

  std::size_t size() const { return samples.size(); }
  std::size_t dims() const { return samples.dims(); }

  /// Rows in the given order, provenance carried along.
  Dataset subset(std::span<const std::size_t> rows) const;
  /// Every original-file index a row depends on (one or two per row).
  std::vector<std::size_t> source_indices() const;
};

struct CsvOptions {
  std::string label_column = "Class";
  char delimiter = ',';
};

/// Header row required. Labels may be {0, 1} (mapped to {-1, +1}) or {-1, +1};
/// every other column is a feature.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void save_csv(const Dataset& ds, const std::filesystem::path& path, const CsvOptions& options = {});

/// Interpolates new minority rows toward one of the k nearest minority
/// neighbours until the minority class holds `target_minority` rows.
Dataset smote_oversample(const Dataset& ds, std::size_t target_minority, std::size_t k_neighbors,
                         std::uint64_t seed);

/// Uniform subsample without replacement of the majority class down to
/// `target_majority`; row order otherwise preserved.
Dataset random_undersample(const Dataset& ds, std::size_t target_majority, std::uint64_t seed);

/// SMOTE then undersampling so that each class holds exactly `per_class` rows.
Dataset balance(const Dataset& ds, std::size_t per_class, std::size_t k_neighbors, std::uint64_t seed);

struct SplitPlan {
  std::uint64_t seed = 0;
  std::size_t n_train = 6;
  double validation_fraction = 1.0;  // share of the balanced remainder kept for validation
  std::size_t repeats = 10;
  std::size_t balanced_per_class = 250;
  std::size_t smote_k = 5;

  void validate() const;
};

struct Split {
  std::size_t repeat = 0;
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Stratified halves: the first is the untouched test set, the second is
/// balanced and cut into train (n_train rows) and validation.
std::vector<Split> paper_split(const Dataset& ds, const SplitPlan& plan);
Split paper_split_repeat(const Dataset& ds, const SplitPlan& plan, std::size_t repeat);

/// True when no test row shares an original-file index with train or validation.
bool leakage_free(const Split& split);

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted);

struct Metrics {
  double recall = 0.0;
  double balanced_accuracy = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some ratio had a zero denominator and was taken as 0
};

Metrics metrics(const ConfusionCounts& c);

enum class Metric { recall, balanced_accuracy, accuracy, precision, f1 };

double metric_value(const Metrics& m, Metric which);
Metric parse_metric(const std::string& name);
std::string metric_name(Metric which);

/// Two unit-variance Gaussian blobs whose means are `separation` apart along
/// the diagonal; round(m * positive_rate) positives.
Dataset synth_fraud(std::uint64_t seed, std::size_t m, std::size_t d, double positive_rate, double separation);

}  // namespace qsvm::data
