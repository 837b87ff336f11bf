#pragma once

#include "qsvm/annealer.hpp"
#include "qsvm/baselines.hpp"
#include "qsvm/data.hpp"
#include "qsvm/embedding.hpp"
#include "qsvm/ensemble.hpp"
#include "qsvm/io.hpp"
#include "qsvm/rydberg.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qsvm::experiment {

enum class Backend { brute_force, sim_anneal, rydberg_ideal, rydberg_noisy };

Backend parse_backend(const std::string& name);
std::string backend_name(Backend b);

enum class Family { classical, qubo_vote, qubo_stack };

/// One row of the model table. Names are the figure-legend strings.
struct RosterEntry {
  std::string name;
  Family family = Family::classical;
  std::optional<baselines::BaselineSpec> classical;
  bool noisy = false;      // trained with the noisy backend
  bool optimized = false;  // vote count chosen on validation
  bool device = false;     // emulates the hardware runs: device duration and shot count
  std::size_t shots = 0;
};

const std::vector<RosterEntry>& roster();
const RosterEntry& find_roster(const std::string& name);
std::vector<std::string> roster_names();

struct SyntheticSpec {
  std::size_t m = 20000;
  std::size_t d = 30;
  double positive_rate = 0.0017;
  double separation = 4.0;
  std::uint64_t seed = 0;
};

struct DataSource {
  std::optional<std::filesystem::path> csv;
  std::string label_column = "Class";
  SyntheticSpec synthetic;
};

struct SimulationSettings {
  double duration = rydberg::kSimulationDuration;
  double device_duration = rydberg::kDeviceDuration;
  double omega_max = rydberg::kDeviceOmegaMax;
  std::size_t ideal_shots = 1000;
  std::size_t device_shots = rydberg::kDeviceAverageShots;
  rydberg::EvolveOptions evolve;
};

struct SolverSettings {
  Backend ideal_backend = Backend::rydberg_ideal;
  Backend noisy_backend = Backend::rydberg_noisy;
  std::map<std::string, Backend> overrides;  // roster name -> backend
  AnnealSchedule anneal;
  rydberg::NoiseConfig noise;
  embedding::EmbeddingConfig embedding;
  SimulationSettings simulation;
  std::size_t brute_force_top_k = 1;
  std::size_t max_atoms = rydberg::kMaxAtoms;
};

enum class Voting { all, modal };

struct ExperimentConfig {
  DataSource data;
  data::SplitPlan plan;
  std::vector<std::string> models;  // roster names
  SolverSettings solver;
  KernelSpec kernel;
  EncodingSpec encoding;
  Voting voting = Voting::all;
  data::Metric opt_metric = data::Metric::recall;
  bool weighted_votes = false;
  bool keep_empty_members = false;  // members decoding to no support vector
  bool standardize = true;  // fit on train + validation, then scale by 1/sqrt(d)
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  void validate() const;
  Backend backend_for(const RosterEntry& e) const;
};

io::json config_to_json(const ExperimentConfig& c);
/// Keys absent from `doc` keep the values of `base`.
ExperimentConfig config_from_json(const io::json& doc, ExperimentConfig base = {});

/// What a QUBO solve reported besides the distribution.
struct SolveDiagnostics {
  std::string backend;
  std::size_t variables = 0;
  std::size_t shots = 0;
  std::size_t distinct_states = 0;
  double energy_scale = 1.0;
  std::optional<double> embedding_objective;
  std::optional<double> clipped_mass;
  std::optional<double> norm_drift;
  std::optional<double> min_gap;
  std::vector<std::string> warnings;
};

struct SolveResult {
  SolutionDistribution distribution;
  SolveDiagnostics diagnostics;
  std::optional<rydberg::AtomRegister> reg;
  std::optional<rydberg::PulseSchedule> schedule;
};

/// Solves `q` with the given backend. Rydberg backends rescale Q so that the
/// largest diagonal entry matches the final detuning, embed the scaled
/// couplings and sample `shots` readouts; problems above the atom bound fall
/// back to simulated annealing with a warning.
SolveResult solve_qubo(const QuboProblem& q, Backend backend, const SolverSettings& settings, std::size_t shots,
                       double duration, std::uint64_t seed);

struct ModelOutcome {
  io::AnyModel model;
  std::optional<SolveDiagnostics> solve;
  std::size_t members = 0;
  std::size_t n_used = 0;
};

/// Trains one roster entry on `train` (validation used by "opt" variants).
ModelOutcome train_roster_model(const RosterEntry& entry, const ExperimentConfig& cfg,
                                std::shared_ptr<const TrainingSet> train, const LabeledData& validation,
                                std::uint64_t seed);

/// Affine feature map fitted on training-side data.
struct FeatureScaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static FeatureScaler fit(const FeatureMatrix& x);
  FeatureMatrix apply(const FeatureMatrix& x) const;
};

data::Dataset load_dataset(const DataSource& source);

struct RepeatRecord {
  std::size_t repeat = 0;
  data::ConfusionCounts counts;
  data::Metrics metrics;
  std::size_t members = 0;
  std::size_t n_used = 0;
  std::optional<SolveDiagnostics> solve;
  double seconds = 0.0;
};

struct ModelReport {
  std::string name;
  std::string backend;  // "classical" for the baselines
  std::vector<RepeatRecord> repeats;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ModelReport> models;
  std::size_t dataset_rows = 0;
  std::size_t dataset_positives = 0;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over repeats
};

Summary summarize(const std::vector<double>& values);
std::vector<double> metric_series(const ModelReport& m, data::Metric metric);

ExperimentReport run(const ExperimentConfig& cfg);
ExperimentReport run(const ExperimentConfig& cfg, const data::Dataset& ds);

/// Timings go under a separate "timings" key, so dropping that key leaves a
/// document that depends only on config and seed.
io::json report_to_json(const ExperimentReport& r, bool include_timings = true);

struct SweepPoint {
  double value = 0.0;  // scale percent or n_train
  ExperimentReport report;
};

/// One run per noise scale (percent of the default levels).
std::vector<SweepPoint> noise_sweep(const ExperimentConfig& cfg, const std::vector<double>& scales);
/// One run per training-set size.
std::vector<SweepPoint> size_sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& n_train);
io::json sweep_to_json(const std::string& parameter, const std::vector<SweepPoint>& points,
                       bool include_timings = true);

/// CSV rows: sweep value, model, metric, mean, std.
void write_sweep_table(std::ostream& out, const std::string& parameter, const std::vector<SweepPoint>& points);
/// CSV rows: model, backend, metric mean/std for recall and balanced accuracy.
void write_summary_table(std::ostream& out, const io::json& report);

struct ComplexityRow {
  std::size_t n = 0;
  int k = 0;
  std::size_t qubits = 0;
  double seconds = 0.0;
};

struct ComplexityResult {
  std::vector<ComplexityRow> rows;
  double slope_n = 0.0;  // least-squares exponents of t ~ N^a K^b
  double slope_k = 0.0;
  std::map<int, double> slope_n_at_k;
  std::map<std::size_t, double> slope_k_at_n;
};

struct ComplexityOptions {
  std::size_t dims = 2;
  std::size_t repeats = 5;
  double min_seconds = 0.02;  // each timing sample loops until this much time passed
  std::uint64_t seed = 0;
};

ComplexityResult complexity_probe(const std::vector<std::size_t>& n_list, const std::vector<int>& k_list,
                                  const ComplexityOptions& options = {});
io::json complexity_to_json(const ComplexityResult& r);

}  // namespace qsvm::experiment
