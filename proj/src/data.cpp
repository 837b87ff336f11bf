#include "qsvm/data.hpp"

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace qsvm::data {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == delim && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DataError("load_csv: non-numeric value '" + cell + "' at row " + std::to_string(row) + ", column '" +
                    column + "'");
  }
  return v;
}

// Indices of rows per class: [0] = -1, [1] = +1.
std::array<std::vector<std::size_t>, 2> by_class(const LabeledData& d) {
  std::array<std::vector<std::size_t>, 2> out;
  for (std::size_t i = 0; i < d.size(); ++i) out[d.label(i) > 0 ? 1 : 0].push_back(i);
  return out;
}

Dataset concat_rows(const Dataset& ds, const std::vector<std::size_t>& keep, const std::vector<double>& extra_x,
                    const std::vector<int>& extra_y, const std::vector<RowOrigin>& extra_origin) {
  const auto d = static_cast<Eigen::Index>(ds.dims());
  const std::size_t rows = keep.size() + extra_y.size();
  FeatureMatrix x(static_cast<Eigen::Index>(rows), d);
  std::vector<int> y;
  std::vector<RowOrigin> origins;
  y.reserve(rows);
  origins.reserve(rows);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = ds.samples.x().row(static_cast<Eigen::Index>(keep[r]));
    y.push_back(ds.samples.label(keep[r]));
    origins.push_back(ds.origins[keep[r]]);
  }
  for (std::size_t r = 0; r < extra_y.size(); ++r) {
    for (Eigen::Index f = 0; f < d; ++f) {
      x(static_cast<Eigen::Index>(keep.size() + r), f) = extra_x[r * static_cast<std::size_t>(d) + static_cast<std::size_t>(f)];
    }
    y.push_back(extra_y[r]);
    origins.push_back(extra_origin[r]);
  }
  return Dataset(LabeledData(std::move(x), std::move(y)), ds.feature_names, std::move(origins));
}

int minority_label(const LabeledData& d) { return d.count(1) <= d.count(-1) ? 1 : -1; }

}  // namespace

Dataset::Dataset(LabeledData s, std::vector<std::string> names) : samples(std::move(s)), feature_names(std::move(names)) {
  origins.resize(samples.size());
  for (std::size_t i = 0; i < origins.size(); ++i) origins[i].first = i;
  if (feature_names.empty()) {
    for (std::size_t f = 0; f < samples.dims(); ++f) feature_names.push_back("x" + std::to_string(f + 1));
  }
  require(feature_names.size() == samples.dims(), "Dataset: one feature name per column required");
}

Dataset::Dataset(LabeledData s, std::vector<std::string> names, std::vector<RowOrigin> o)
    : samples(std::move(s)), feature_names(std::move(names)), origins(std::move(o)) {
  require(origins.size() == samples.size(), "Dataset: one origin per row required");
  require(feature_names.size() == samples.dims(), "Dataset: one feature name per column required");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<RowOrigin> o;
  o.reserve(rows.size());
  for (auto r : rows) {
    require(r < size(), "Dataset::subset: index out of range");
    o.push_back(origins[r]);
  }
  return Dataset(samples.subset(rows), feature_names, std::move(o));
}

std::vector<std::size_t> Dataset::source_indices() const {
  std::vector<std::size_t> out;
  for (const auto& o : origins) {
    out.push_back(o.first);
    if (o.second) out.push_back(*o.second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("load_csv: " + path.string() + " has no header row");
  const auto header = split_line(line, options.delimiter);
  const auto label_it = std::find(header.begin(), header.end(), options.label_column);
  if (label_it == header.end()) {
    throw DataError("load_csv: label column '" + options.label_column + "' not found in " + path.string());
  }
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) names.push_back(header[c]);
  }

  std::vector<double> values;
  std::vector<double> raw_labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line, options.delimiter);
    if (cells.size() != header.size()) {
      throw DataError("load_csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], row, header[c]);
      (c == label_col ? raw_labels : values).push_back(v);
    }
  }
  if (raw_labels.size() < 2) throw DataError("load_csv: " + path.string() + " needs at least two data rows");

  const bool zero_one = std::all_of(raw_labels.begin(), raw_labels.end(), [](double v) { return v == 0.0 || v == 1.0; });
  const bool signed_labels =
      std::all_of(raw_labels.begin(), raw_labels.end(), [](double v) { return v == -1.0 || v == 1.0; });
  if (!zero_one && !signed_labels) {
    throw DataError("load_csv: label column '" + options.label_column + "' must hold {0,1} or {-1,+1}");
  }
  std::vector<int> y;
  y.reserve(raw_labels.size());
  for (double v : raw_labels) y.push_back(v == 1.0 ? 1 : -1);

  const auto d = static_cast<Eigen::Index>(names.size());
  FeatureMatrix x = Eigen::Map<FeatureMatrix>(values.data(), static_cast<Eigen::Index>(y.size()), d);
  return Dataset(LabeledData(std::move(x), std::move(y)), std::move(names));
}

void save_csv(const Dataset& ds, const std::filesystem::path& path, const CsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw DataError("save_csv: cannot write " + path.string());
  out.precision(17);
  for (const auto& n : ds.feature_names) out << n << options.delimiter;
  out << options.label_column << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.samples.row(i)) out << v << options.delimiter;
    out << (ds.samples.label(i) > 0 ? 1 : 0) << '\n';
  }
}

Dataset smote_oversample(const Dataset& ds, std::size_t target_minority, std::size_t k_neighbors,
                         std::uint64_t seed) {
  require(k_neighbors >= 1, "smote_oversample: k_neighbors must be at least 1");
  const int minority = minority_label(ds.samples);
  const auto classes = by_class(ds.samples);
  const auto& pool = classes[minority > 0 ? 1 : 0];
  if (pool.size() >= target_minority) return ds;
  if (pool.size() < 2) throw DataError("smote_oversample: minority class needs at least 2 samples");

  const std::size_t k = std::min(k_neighbors, pool.size() - 1);
  // Nearest minority neighbours of each minority row, ties broken by index.
  std::vector<std::vector<std::size_t>> neighbours(pool.size());
  for (std::size_t a = 0; a < pool.size(); ++a) {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t b = 0; b < pool.size(); ++b) {
      if (a == b) continue;
      const auto diff = ds.samples.x().row(static_cast<Eigen::Index>(pool[a])) -
                        ds.samples.x().row(static_cast<Eigen::Index>(pool[b]));
      dist.emplace_back(diff.squaredNorm(), b);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j) neighbours[a].push_back(dist[j].second);
  }

  Rng rng = make_rng(seed, streams::kSmote);
  std::uniform_int_distribution<std::size_t> pick_row(0, pool.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_nn(0, k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t needed = target_minority - pool.size();
  const std::size_t d = ds.dims();
  std::vector<double> xs;
  std::vector<int> ys;
  std::vector<RowOrigin> os;
  xs.reserve(needed * d);
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t a = pick_row(rng);
    const std::size_t b = neighbours[a][pick_nn(rng)];
    const double u = unit(rng);
    const auto xa = ds.samples.row(pool[a]);
    const auto xb = ds.samples.row(pool[b]);
    for (std::size_t f = 0; f < d; ++f) xs.push_back(xa[f] + u * (xb[f] - xa[f]));
    ys.push_back(minority);
    const auto& oa = ds.origins[pool[a]];
    const auto& ob = ds.origins[pool[b]];
    require(!oa.synthetic() && !ob.synthetic(), "smote_oversample: input rows must be original samples");
    os.push_back({oa.first, ob.first, u});
  }
  std::vector<std::size_t> keep(ds.size());
  std::iota(keep.begin(), keep.end(), 0);
  return concat_rows(ds, keep, xs, ys, os);
}

Dataset random_undersample(const Dataset& ds, std::size_t target_majority, std::uint64_t seed) {
  const int majority = -minority_label(ds.samples);
  const auto classes = by_class(ds.samples);
  std::vector<std::size_t> pool = classes[majority > 0 ? 1 : 0];
  if (pool.size() <= target_majority) return ds;
  Rng rng = make_rng(seed, streams::kUndersample);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(target_majority);
  std::vector<std::size_t> keep = classes[majority > 0 ? 0 : 1];
  keep.insert(keep.end(), pool.begin(), pool.end());
  std::sort(keep.begin(), keep.end());
  return ds.subset(keep);
}

Dataset balance(const Dataset& ds, std::size_t per_class, std::size_t k_neighbors, std::uint64_t seed) {
  require(per_class >= 1, "balance: per_class must be positive");
  Dataset out = smote_oversample(ds, per_class, k_neighbors, seed);
  out = random_undersample(out, per_class, seed);
  // Both classes may start above the target; trim the other one too.
  if (out.samples.count(1) != per_class || out.samples.count(-1) != per_class) {
    out = random_undersample(out, per_class, derive_seed(seed, streams::kUndersample, 1));
  }
  if (out.samples.count(1) != per_class || out.samples.count(-1) != per_class) {
    throw DataError("balance: could not reach " + std::to_string(per_class) + " rows per class");
  }
  return out;
}

void SplitPlan::validate() const {
  require(n_train >= 2, "SplitPlan: n_train must be at least 2");
  require(repeats >= 1, "SplitPlan: repeats must be at least 1");
  require(validation_fraction >= 0.0 && validation_fraction <= 1.0, "SplitPlan: validation_fraction must lie in [0, 1]");
  require(balanced_per_class * 2 > n_train, "SplitPlan: balanced set must exceed the training size");
  require(smote_k >= 1, "SplitPlan: smote_k must be positive");
}

Split paper_split_repeat(const Dataset& ds, const SplitPlan& plan, std::size_t repeat) {
  plan.validate();
  if (!ds.samples.has_both_classes()) throw DataError("paper_split: dataset must contain both classes");
  Rng rng = make_rng(plan.seed, streams::kSplit, repeat);

  auto classes = by_class(ds.samples);
  std::vector<std::size_t> test_rows, pool_rows;
  for (auto& rows : classes) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t half = (rows.size() + 1) / 2;
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(half));
    pool_rows.insert(pool_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(half), rows.end());
  }
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(pool_rows.begin(), pool_rows.end());

  Split split;
  split.repeat = repeat;
  split.test = ds.subset(test_rows);
  const Dataset pool = ds.subset(pool_rows);
  const std::uint64_t repeat_seed = derive_seed(plan.seed, streams::kSplit, repeat);
  const Dataset balanced = balance(pool, plan.balanced_per_class, plan.smote_k, repeat_seed);

  auto bal_classes = by_class(balanced.samples);
  const std::size_t n_pos = (plan.n_train + 1) / 2;
  const std::size_t n_neg = plan.n_train / 2;
  std::vector<std::size_t> train_rows, val_rows;
  for (int c = 1; c >= 0; --c) {
    auto& rows = bal_classes[static_cast<std::size_t>(c)];
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t take = c == 1 ? n_pos : n_neg;
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
    const std::size_t rest = rows.size() - take;
    const auto keep = static_cast<std::size_t>(std::llround(plan.validation_fraction * static_cast<double>(rest)));
    val_rows.insert(val_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(take),
                    rows.begin() + static_cast<std::ptrdiff_t>(take + keep));
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  split.train = balanced.subset(train_rows);
  split.validation = balanced.subset(val_rows);
  return split;
}

std::vector<Split> paper_split(const Dataset& ds, const SplitPlan& plan) {
  plan.validate();
  std::vector<Split> out;
  out.reserve(plan.repeats);
  for (std::size_t r = 0; r < plan.repeats; ++r) out.push_back(paper_split_repeat(ds, plan, r));
  return out;
}

bool leakage_free(const Split& split) {
  const auto test = split.test.source_indices();
  auto used = split.train.source_indices();
  const auto val = split.validation.source_indices();
  used.insert(used.end(), val.begin(), val.end());
  std::sort(used.begin(), used.end());
  std::vector<std::size_t> common;
  std::set_intersection(test.begin(), test.end(), used.begin(), used.end(), std::back_inserter(common));
  return common.empty();
}

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted) {
  require(truth.size() == predicted.size(), "confusion: label vectors differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require((truth[i] == 1 || truth[i] == -1) && (predicted[i] == 1 || predicted[i] == -1),
            "confusion: labels must be +1 or -1");
    if (truth[i] > 0) (predicted[i] > 0 ? c.tp : c.fn)++;
    else (predicted[i] > 0 ? c.fp : c.tn)++;
  }
  return c;
}

Metrics metrics(const ConfusionCounts& c) {
  Metrics m;
  auto ratio = [&](std::size_t num, std::size_t den) {
    if (den == 0) {
      m.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.recall = ratio(c.tp, c.tp + c.fn);
  const double specificity = ratio(c.tn, c.tn + c.fp);
  m.balanced_accuracy = 0.5 * (m.recall + specificity);
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  const double pr = m.precision + m.recall;
  m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
  return m;
}

double metric_value(const Metrics& m, Metric which) {
  switch (which) {
    case Metric::recall: return m.recall;
    case Metric::balanced_accuracy: return m.balanced_accuracy;
    case Metric::accuracy: return m.accuracy;
    case Metric::precision: return m.precision;
    case Metric::f1: return m.f1;
  }
  return 0.0;
}

Metric parse_metric(const std::string& name) {
  if (name == "recall") return Metric::recall;
  if (name == "balanced_accuracy") return Metric::balanced_accuracy;
  if (name == "accuracy") return Metric::accuracy;
  if (name == "precision") return Metric::precision;
  if (name == "f1") return Metric::f1;
  throw ContractError("unknown metric '" + name + "'");
}

std::string metric_name(Metric which) {
  switch (which) {
    case Metric::recall: return "recall";
    case Metric::balanced_accuracy: return "balanced_accuracy";
    case Metric::accuracy: return "accuracy";
    case Metric::precision: return "precision";
    case Metric::f1: return "f1";
  }
  return "";
}

Dataset synth_fraud(std::uint64_t seed, std::size_t m, std::size_t d, double positive_rate, double separation) {
  require(m >= 2 && d >= 1, "synth_fraud: need m >= 2 and d >= 1");
  require(positive_rate >= 0.0 && positive_rate <= 1.0, "synth_fraud: positive_rate must lie in [0, 1]");
  require(separation >= 0.0, "synth_fraud: separation must be non-negative");
  const auto positives = static_cast<std::size_t>(std::llround(static_cast<double>(m) * positive_rate));
  Rng rng = make_rng(seed, streams::kSynthetic);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double shift = separation / std::sqrt(static_cast<double>(d));

  std::vector<int> y(m, -1);
  std::fill(y.end() - static_cast<std::ptrdiff_t>(positives), y.end(), 1);
  std::shuffle(y.begin(), y.end(), rng);
  FeatureMatrix x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t f = 0; f < d; ++f) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = noise(rng) + (y[i] > 0 ? shift : 0.0);
    }
  }
  return Dataset(LabeledData(std::move(x), std::move(y)), {});
}

}  // namespace qsvm::data
