#include "qsvm/experiment.hpp"

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace qsvm::experiment {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class F>
auto with_context(const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const CapacityError& e) {
    throw CapacityError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const ContractError& e) {
    throw ContractError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

std::vector<RosterEntry> build_roster() {
  using namespace baselines;
  std::vector<RosterEntry> r;
  auto classical = [&](std::string name, BaselineSpec spec) {
    RosterEntry e;
    e.name = std::move(name);
    e.classical = std::move(spec);
    r.push_back(std::move(e));
  };
  classical("KNN", KnnSpec{3});
  classical("Random Forest", ForestSpec{});
  classical("Decision Tree", TreeSpec{});
  classical("Naive Bayes", NaiveBayesSpec{});
  classical("Logistic Regression", LogisticSpec{});
  classical("SVM Lin", SvmSpec{});
  SvmSpec rbf;
  rbf.kernel = KernelSpec::rbf(1.0);
  classical("SVM RBF", rbf);

  auto qubo = [&](std::string name, Family family, bool noisy, bool optimized, bool device, std::size_t shots) {
    RosterEntry e;
    e.name = std::move(name);
    e.family = family;
    e.noisy = noisy;
    e.optimized = optimized;
    e.device = device;
    e.shots = shots;
    r.push_back(std::move(e));
  };
  qubo("QUBO SVM i", Family::qubo_vote, false, false, false, 0);
  qubo("QUBO SVM i opt", Family::qubo_vote, false, true, false, 0);
  qubo("QUBO SVM N", Family::qubo_vote, true, false, false, 1000);
  qubo("QUBO SVM N opt", Family::qubo_vote, true, true, false, 1000);
  qubo("QUBO SVM 500", Family::qubo_vote, true, false, false, 500);
  qubo("QUBO SVM N opt 500", Family::qubo_vote, true, true, false, 500);
  qubo("QUBO SVM N 100", Family::qubo_vote, true, false, false, 100);
  qubo("QUBO SVM N opt 100", Family::qubo_vote, true, true, false, 100);
  qubo("QUBO SVM opt QPU", Family::qubo_vote, true, true, true, 0);
  qubo("QUBO SVM i Stack", Family::qubo_stack, false, false, false, 0);
  qubo("QUBO SVM N Stack", Family::qubo_stack, true, false, false, 1000);
  qubo("QUBO SVM Stack QPU", Family::qubo_stack, true, false, true, 0);
  return r;
}

std::string cache_tag(Family f) { return f == Family::qubo_stack ? "stack" : "svm"; }

std::uint64_t tag_stream(const std::string& tag) { return tag == "stack" ? 0x57AC4 : 0x5F33; }

// Rydberg solve split into the expensive part (embedding + evolution), which
// shot presets share, and the sampling.
struct PreparedRydberg {
  rydberg::AtomRegister reg;
  rydberg::PulseSchedule schedule;
  rydberg::NoiseConfig noise;
  std::vector<rydberg::EvolutionResult> realizations;
  SolveDiagnostics diagnostics;
};

bool uses_rydberg(Backend b) { return b == Backend::rydberg_ideal || b == Backend::rydberg_noisy; }

rydberg::NoiseConfig effective_noise(Backend b, const SolverSettings& s) {
  return b == Backend::rydberg_noisy ? s.noise : rydberg::NoiseConfig::ideal();
}

PreparedRydberg prepare_rydberg(const QuboProblem& q, Backend backend, const SolverSettings& settings,
                                double duration, std::uint64_t seed) {
  const double final_detuning = std::abs(rydberg::paper_schedule(q, duration, settings.simulation.omega_max).delta(duration));
  const Eigen::MatrixXd& m = q.matrix();
  double diag_max = m.diagonal().cwiseAbs().maxCoeff();
  if (diag_max == 0.0) diag_max = q.max_abs_entry();
  const double scale = diag_max > 0.0 && final_detuning > 0.0 ? final_detuning / diag_max : 1.0;
  const QuboProblem scaled(m * scale);

  embedding::EmbeddingConfig ecfg = settings.embedding;
  ecfg.seed = derive_seed(settings.embedding.seed, streams::kEmbedding, seed);
  auto report = embedding::embed(scaled, ecfg);
  auto schedule = rydberg::paper_schedule(scaled, duration, settings.simulation.omega_max);
  const auto noise = effective_noise(backend, settings);
  rydberg::EvolveOptions evolve = settings.simulation.evolve;
  evolve.max_atoms = std::min(evolve.max_atoms, settings.max_atoms);
  auto realizations = rydberg::simulate_realizations(report.reg, schedule, noise, seed, evolve);

  SolveDiagnostics d;
  d.backend = backend_name(backend);
  d.variables = q.size();
  d.energy_scale = scale;
  d.embedding_objective = report.objective;
  d.clipped_mass = report.target.clipped_mass;
  double drift = 0.0;
  std::optional<double> gap;
  for (const auto& r : realizations) {
    drift = std::max(drift, r.norm_drift);
    if (r.min_gap) gap = gap ? std::min(*gap, *r.min_gap) : *r.min_gap;
  }
  d.norm_drift = drift;
  d.min_gap = gap;
  return {std::move(report.reg), std::move(schedule), noise, std::move(realizations), std::move(d)};
}

SolveResult sample_prepared(const PreparedRydberg& p, std::size_t shots, std::uint64_t seed) {
  SolveResult r;
  r.distribution = rydberg::sample_realizations(p.realizations, shots, p.noise, seed);
  r.diagnostics = p.diagnostics;
  r.diagnostics.shots = shots;
  r.diagnostics.distinct_states = r.distribution.size();
  r.reg = p.reg;
  r.schedule = p.schedule;
  return r;
}

SolveResult solve_classical(const QuboProblem& q, Backend backend, const SolverSettings& settings,
                            std::uint64_t seed) {
  SolveResult r;
  r.diagnostics.backend = backend_name(backend);
  r.diagnostics.variables = q.size();
  if (backend == Backend::brute_force) {
    const std::size_t k = std::max<std::size_t>(settings.brute_force_top_k, 1);
    const auto best = brute_force_solve(q, k);
    std::vector<std::pair<BitString, std::uint64_t>> counts;
    // Counts k, k-1, ... keep the energy order in the distribution order.
    for (std::size_t i = 0; i < best.size(); ++i) counts.emplace_back(best[i].bits, best.size() - i);
    r.distribution = SolutionDistribution::from_counts(std::move(counts));
  } else {
    AnnealSchedule s = settings.anneal;
    s.seed = derive_seed(settings.anneal.seed, streams::kAnneal, seed);
    r.distribution = sa_solve(q, s);
  }
  r.diagnostics.shots = static_cast<std::size_t>(r.distribution.total_shots());
  r.diagnostics.distinct_states = r.distribution.size();
  return r;
}

// Falls back to simulated annealing when the register would exceed the bound.
Backend resolve_backend(Backend b, const QuboProblem& q, const SolverSettings& s, std::string* warning) {
  if (uses_rydberg(b) && q.size() > s.max_atoms) {
    if (warning) {
      *warning = backend_name(b) + " needs " + std::to_string(q.size()) + " atoms, above the bound of " +
                 std::to_string(s.max_atoms) + "; used sim_anneal instead";
    }
    return Backend::sim_anneal;
  }
  return b;
}

using SolveFn = std::function<SolveResult(const QuboProblem&, Backend, std::size_t shots, double duration,
                                          const std::string& tag)>;

ModelOutcome train_entry(const RosterEntry& entry, const ExperimentConfig& cfg,
                         std::shared_ptr<const TrainingSet> train, const LabeledData& validation, std::uint64_t seed,
                         const SolveFn& solve) {
  ModelOutcome out{baselines::ClassifierModel{}, std::nullopt, 0, 0};
  if (entry.family == Family::classical) {
    out.model = baselines::train(*entry.classical, *train, derive_seed(seed, streams::kBaseline));
    return out;
  }

  const Backend backend = cfg.backend_for(entry);
  const auto& sim = cfg.solver.simulation;
  const double duration = entry.device ? sim.device_duration : sim.duration;
  std::size_t shots = entry.shots;
  if (entry.device) shots = sim.device_shots;
  if (shots == 0) shots = sim.ideal_shots;
  const std::string tag = cache_tag(entry.family);

  if (entry.family == Family::qubo_vote) {
    const QuboProblem q = build_qubo(*train, cfg.kernel, cfg.encoding);
    SolveResult solved = solve(q, backend, shots, duration, tag);
    auto members = models_from_distribution(solved.distribution, train, cfg.kernel, cfg.encoding);
    std::vector<double> weights;
    if (cfg.weighted_votes) {
      for (const auto& e : solved.distribution.entries()) weights.push_back(e.probability);
    }
    if (!cfg.keep_empty_members) ensemble::drop_empty_members(members, weights);
    ensemble::VotingEnsemble ens;
    if (entry.optimized) {
      ens = ensemble::optimize_vote_count(std::move(members), validation, cfg.opt_metric, std::move(weights));
    } else {
      ens = ensemble::make_ensemble(std::move(members), cfg.voting == Voting::modal ? 1 : 0, std::move(weights));
    }
    out.members = ens.members.size();
    out.n_used = ens.n_used;
    out.solve = std::move(solved.diagnostics);
    out.model = std::move(ens);
    return out;
  }

  ensemble::StackOptions opts;
  opts.kernel = cfg.kernel;
  opts.encoding = cfg.encoding;
  opts.aggregation = entry.optimized ? ensemble::MetaAggregation::optimized
                                     : (cfg.voting == Voting::modal ? ensemble::MetaAggregation::modal
                                                                    : ensemble::MetaAggregation::all);
  opts.metric = cfg.opt_metric;
  opts.weighted = cfg.weighted_votes;
  opts.keep_empty_members = cfg.keep_empty_members;
  opts.seed = seed;
  std::optional<SolveDiagnostics> diag;
  auto solver = [&](const QuboProblem& q) {
    SolveResult r = solve(q, backend, shots, duration, tag);
    diag = std::move(r.diagnostics);
    return std::move(r.distribution);
  };
  auto stacked = ensemble::stack_train(ensemble::default_stack_bases(), *train, validation, solver, opts);
  out.members = stacked.meta.members.size();
  out.n_used = stacked.meta.n_used;
  out.solve = std::move(diag);
  out.model = std::move(stacked);
  return out;
}

io::json diagnostics_to_json(const SolveDiagnostics& d) {
  io::json j = {{"backend", d.backend},
                {"variables", d.variables},
                {"shots", d.shots},
                {"distinct_states", d.distinct_states},
                {"energy_scale", d.energy_scale}};
  if (d.embedding_objective) j["embedding_objective"] = *d.embedding_objective;
  if (d.clipped_mass) j["clipped_mass"] = *d.clipped_mass;
  if (d.norm_drift) j["norm_drift"] = *d.norm_drift;
  if (d.min_gap) j["min_gap"] = *d.min_gap;
  if (!d.warnings.empty()) j["warnings"] = d.warnings;
  return j;
}

io::json metrics_to_json(const data::Metrics& m) {
  return {{"recall", m.recall},       {"balanced_accuracy", m.balanced_accuracy},
          {"accuracy", m.accuracy},   {"precision", m.precision},
          {"f1", m.f1},               {"degenerate", m.degenerate}};
}

constexpr data::Metric kAllMetrics[] = {data::Metric::recall, data::Metric::balanced_accuracy, data::Metric::accuracy,
                                        data::Metric::precision, data::Metric::f1};

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

Backend parse_backend(const std::string& name) {
  if (name == "brute_force") return Backend::brute_force;
  if (name == "sim_anneal") return Backend::sim_anneal;
  if (name == "rydberg_ideal") return Backend::rydberg_ideal;
  if (name == "rydberg_noisy") return Backend::rydberg_noisy;
  throw ContractError("unknown backend '" + name + "' (brute_force, sim_anneal, rydberg_ideal, rydberg_noisy)");
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::brute_force: return "brute_force";
    case Backend::sim_anneal: return "sim_anneal";
    case Backend::rydberg_ideal: return "rydberg_ideal";
    case Backend::rydberg_noisy: return "rydberg_noisy";
  }
  return "";
}

const std::vector<RosterEntry>& roster() {
  static const std::vector<RosterEntry> entries = build_roster();
  return entries;
}

const RosterEntry& find_roster(const std::string& name) {
  for (const auto& e : roster()) {
    if (e.name == name) return e;
  }
  throw ContractError("unknown roster model '" + name + "'");
}

std::vector<std::string> roster_names() {
  std::vector<std::string> names;
  for (const auto& e : roster()) names.push_back(e.name);
  return names;
}

void ExperimentConfig::validate() const {
  plan.validate();
  require(!models.empty(), "config: no models selected");
  std::set<std::string> seen;
  for (const auto& m : models) {
    find_roster(m);
    require(seen.insert(m).second, "config: model '" + m + "' listed twice");
  }
  for (const auto& [name, backend] : solver.overrides) find_roster(name);
  kernel.validate();
  encoding.validate();
  solver.noise.validate();
  solver.embedding.validate();
  require(solver.simulation.duration > 0.0 && solver.simulation.device_duration > 0.0,
          "config: durations must be positive");
  require(solver.simulation.ideal_shots >= 1 && solver.simulation.device_shots >= 1, "config: shots must be positive");
  require(solver.max_atoms >= 1 && solver.max_atoms <= rydberg::kMaxAtoms,
          "config: max_atoms must lie in [1, " + std::to_string(rydberg::kMaxAtoms) + "]");
  if (!data.csv) {
    require(data.synthetic.m >= 2 && data.synthetic.d >= 1, "config: synthetic data needs m >= 2 and d >= 1");
  }
}

Backend ExperimentConfig::backend_for(const RosterEntry& e) const {
  if (auto it = solver.overrides.find(e.name); it != solver.overrides.end()) return it->second;
  return e.noisy ? solver.noisy_backend : solver.ideal_backend;
}

SolveResult solve_qubo(const QuboProblem& q, Backend backend, const SolverSettings& settings, std::size_t shots,
                       double duration, std::uint64_t seed) {
  std::string warning;
  const Backend used = resolve_backend(backend, q, settings, &warning);
  SolveResult r;
  if (uses_rydberg(used)) {
    r = sample_prepared(prepare_rydberg(q, used, settings, duration, seed), shots, seed);
  } else {
    r = solve_classical(q, used, settings, seed);
  }
  if (!warning.empty()) r.diagnostics.warnings.push_back(warning);
  return r;
}

ModelOutcome train_roster_model(const RosterEntry& entry, const ExperimentConfig& cfg,
                                std::shared_ptr<const TrainingSet> train, const LabeledData& validation,
                                std::uint64_t seed) {
  auto solve = [&](const QuboProblem& q, Backend b, std::size_t shots, double duration, const std::string& tag) {
    return solve_qubo(q, b, cfg.solver, shots, duration, derive_seed(seed, tag_stream(tag)));
  };
  return train_entry(entry, cfg, std::move(train), validation, seed, solve);
}

FeatureScaler FeatureScaler::fit(const FeatureMatrix& x) {
  require(x.rows() >= 1, "FeatureScaler: no rows");
  FeatureScaler s;
  s.mean = x.colwise().mean();
  const Eigen::RowVectorXd sd = (x.rowwise() - s.mean).array().square().colwise().mean().sqrt();
  const double root_d = std::sqrt(static_cast<double>(x.cols()));
  s.scale.resize(x.cols());
  for (Eigen::Index f = 0; f < x.cols(); ++f) s.scale[f] = (sd[f] > 1e-12 ? sd[f] : 1.0) * root_d;
  return s;
}

FeatureMatrix FeatureScaler::apply(const FeatureMatrix& x) const {
  require(x.cols() == mean.size(), "FeatureScaler: dimension mismatch");
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

data::Dataset load_dataset(const DataSource& source) {
  if (source.csv) {
    data::CsvOptions opts;
    opts.label_column = source.label_column;
    return data::load_csv(*source.csv, opts);
  }
  const auto& s = source.synthetic;
  return data::synth_fraud(s.seed, s.m, s.d, s.positive_rate, s.separation);
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

std::vector<double> metric_series(const ModelReport& m, data::Metric metric) {
  std::vector<double> out;
  for (const auto& r : m.repeats) out.push_back(data::metric_value(r.metrics, metric));
  return out;
}

ExperimentReport run(const ExperimentConfig& cfg) {
  cfg.validate();
  return run(cfg, load_dataset(cfg.data));
}

ExperimentReport run(const ExperimentConfig& cfg, const data::Dataset& ds) {
  cfg.validate();
  const auto t0 = Clock::now();
  ExperimentReport report;
  report.config = cfg;
  report.dataset_rows = ds.size();
  report.dataset_positives = ds.samples.count(1);

  std::vector<const RosterEntry*> entries;
  for (const auto& name : cfg.models) entries.push_back(&find_roster(name));
  const std::size_t variables = static_cast<std::size_t>(cfg.encoding.digits) * cfg.plan.n_train;
  for (const auto* e : entries) {
    if (e->family != Family::classical && uses_rydberg(cfg.backend_for(*e)) && variables > cfg.solver.max_atoms) {
      report.warnings.push_back(e->name + ": " + std::to_string(variables) + " atoms exceed the simulator bound of " +
                                std::to_string(cfg.solver.max_atoms) + "; falls back to sim_anneal");
    }
  }

  // per_repeat[r][model]
  std::vector<std::vector<RepeatRecord>> per_repeat(cfg.plan.repeats);
  parallel_for(cfg.plan.repeats, cfg.threads, [&](std::size_t r) {
    const auto split = with_context("repeat " + std::to_string(r), [&] { return data::paper_split_repeat(ds, cfg.plan, r); });
    FeatureMatrix train_x = split.train.samples.x();
    FeatureMatrix val_x = split.validation.samples.x();
    FeatureMatrix test_x = split.test.samples.x();
    if (cfg.standardize) {
      FeatureMatrix fit_rows(train_x.rows() + val_x.rows(), train_x.cols());
      fit_rows << train_x, val_x;
      const auto scaler = FeatureScaler::fit(fit_rows);
      train_x = scaler.apply(train_x);
      val_x = scaler.apply(val_x);
      test_x = scaler.apply(test_x);
    }
    auto train = std::make_shared<const TrainingSet>(train_x, split.train.samples.y());
    const LabeledData validation(val_x, split.validation.samples.y());
    const std::uint64_t repeat_seed = derive_seed(cfg.seed, streams::kSplit, r);

    std::map<std::string, std::shared_ptr<PreparedRydberg>> cache;
    auto solve = [&](const QuboProblem& q, Backend b, std::size_t shots, double duration, const std::string& tag) {
      const std::uint64_t seed = derive_seed(repeat_seed, tag_stream(tag));
      std::string warning;
      const Backend used = resolve_backend(b, q, cfg.solver, &warning);
      SolveResult res;
      if (uses_rydberg(used)) {
        std::ostringstream key;
        key << tag << '|' << io::noise_to_json(effective_noise(used, cfg.solver)).dump() << '|'
            << std::setprecision(17) << duration << '|' << io::qubo_to_json(q).dump();
        auto& slot = cache[key.str()];
        if (!slot) slot = std::make_shared<PreparedRydberg>(prepare_rydberg(q, used, cfg.solver, duration, seed));
        res = sample_prepared(*slot, shots, seed);
        res.diagnostics.backend = backend_name(used);
      } else {
        res = solve_classical(q, used, cfg.solver, seed);
      }
      if (!warning.empty()) res.diagnostics.warnings.push_back(warning);
      return res;
    };

    for (const auto* e : entries) {
      const auto m0 = Clock::now();
      RepeatRecord rec;
      rec.repeat = r;
      with_context("repeat " + std::to_string(r) + ", model '" + e->name + "'", [&] {
        auto outcome = train_entry(*e, cfg, train, validation, repeat_seed, solve);
        const auto pred = io::predict_all(outcome.model, test_x);
        rec.counts = data::confusion(split.test.samples.y(), pred);
        rec.metrics = data::metrics(rec.counts);
        rec.members = outcome.members;
        rec.n_used = outcome.n_used;
        rec.solve = std::move(outcome.solve);
      });
      rec.seconds = seconds_since(m0);
      per_repeat[r].push_back(std::move(rec));
    }
  });

  for (std::size_t m = 0; m < entries.size(); ++m) {
    ModelReport mr;
    mr.name = entries[m]->name;
    mr.backend = entries[m]->family == Family::classical ? "classical" : backend_name(cfg.backend_for(*entries[m]));
    for (std::size_t r = 0; r < cfg.plan.repeats; ++r) mr.repeats.push_back(per_repeat[r][m]);
    report.models.push_back(std::move(mr));
  }
  report.seconds = seconds_since(t0);
  return report;
}

io::json config_to_json(const ExperimentConfig& c) {
  io::json data;
  if (c.data.csv) {
    data = {{"csv", c.data.csv->string()}, {"label_column", c.data.label_column}};
  } else {
    const auto& s = c.data.synthetic;
    data = {{"synthetic",
             {{"m", s.m}, {"d", s.d}, {"positive_rate", s.positive_rate}, {"separation", s.separation}, {"seed", s.seed}}}};
  }
  io::json overrides = io::json::object();
  for (const auto& [name, b] : c.solver.overrides) overrides[name] = backend_name(b);
  const auto& sim = c.solver.simulation;
  return {
      {"data", data},
      {"split",
       {{"seed", c.plan.seed},
        {"n_train", c.plan.n_train},
        {"validation_fraction", c.plan.validation_fraction},
        {"repeats", c.plan.repeats},
        {"balanced_per_class", c.plan.balanced_per_class},
        {"smote_k", c.plan.smote_k}}},
      {"models", c.models},
      {"backends",
       {{"ideal", backend_name(c.solver.ideal_backend)},
        {"noisy", backend_name(c.solver.noisy_backend)},
        {"overrides", overrides},
        {"brute_force_top_k", c.solver.brute_force_top_k},
        {"max_atoms", c.solver.max_atoms}}},
      {"anneal", io::anneal_schedule_to_json(c.solver.anneal)},
      {"noise", io::noise_to_json(c.solver.noise)},
      {"embedding", io::embedding_config_to_json(c.solver.embedding)},
      {"simulation",
       {{"duration", sim.duration},
        {"device_duration", sim.device_duration},
        {"omega_max", sim.omega_max},
        {"ideal_shots", sim.ideal_shots},
        {"device_shots", sim.device_shots},
        {"dt", sim.evolve.dt},
        {"min_steps", sim.evolve.min_steps},
        {"max_steps", sim.evolve.max_steps},
        {"gap_samples", sim.evolve.gap_samples},
        {"gap_max_atoms", sim.evolve.gap_max_atoms}}},
      {"kernel", io::kernel_to_json(c.kernel)},
      {"encoding", io::encoding_to_json(c.encoding)},
      {"voting", c.voting == Voting::all ? "all" : "modal"},
      {"opt_metric", data::metric_name(c.opt_metric)},
      {"weighted_votes", c.weighted_votes},
      {"keep_empty_members", c.keep_empty_members},
      {"standardize", c.standardize},
      {"threads", c.threads},
      {"seed", c.seed},
      {"output_dir", c.output_dir.string()},
  };
}

namespace {

void check_object_keys(const io::json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!doc.is_object()) throw DataError(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : doc.items()) {
    if (!ok.contains(key)) throw DataError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void take(const io::json& doc, const char* key, T& out, const std::string& where) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const io::json::exception& e) {
    throw DataError(where + ": bad '" + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const io::json& doc, ExperimentConfig c) {
  check_object_keys(doc,
                    {"data", "split", "models", "backends", "anneal", "noise", "embedding", "simulation", "kernel",
                     "encoding", "voting", "opt_metric", "weighted_votes", "keep_empty_members", "standardize", "threads", "seed",
                     "output_dir"},
                    "config");
  if (doc.contains("data")) {
    const auto& d = doc["data"];
    check_object_keys(d, {"csv", "label_column", "synthetic"}, "config.data");
    if (d.contains("csv") && !d["csv"].is_null()) c.data.csv = d["csv"].get<std::string>();
    take(d, "label_column", c.data.label_column, "config.data");
    if (d.contains("synthetic")) {
      const auto& s = d["synthetic"];
      const std::string w = "config.data.synthetic";
      check_object_keys(s, {"m", "d", "positive_rate", "separation", "seed"}, w);
      take(s, "m", c.data.synthetic.m, w);
      take(s, "d", c.data.synthetic.d, w);
      take(s, "positive_rate", c.data.synthetic.positive_rate, w);
      take(s, "separation", c.data.synthetic.separation, w);
      take(s, "seed", c.data.synthetic.seed, w);
      c.data.csv.reset();
    }
  }
  if (doc.contains("split")) {
    const auto& s = doc["split"];
    const std::string w = "config.split";
    check_object_keys(s, {"seed", "n_train", "validation_fraction", "repeats", "balanced_per_class", "smote_k"}, w);
    take(s, "seed", c.plan.seed, w);
    take(s, "n_train", c.plan.n_train, w);
    take(s, "validation_fraction", c.plan.validation_fraction, w);
    take(s, "repeats", c.plan.repeats, w);
    take(s, "balanced_per_class", c.plan.balanced_per_class, w);
    take(s, "smote_k", c.plan.smote_k, w);
  }
  if (doc.contains("models")) {
    const auto& m = doc["models"];
    if (m.is_string() && m.get<std::string>() == "all") c.models = roster_names();
    else take(doc, "models", c.models, "config");
  }
  if (doc.contains("backends")) {
    const auto& b = doc["backends"];
    const std::string w = "config.backends";
    check_object_keys(b, {"ideal", "noisy", "overrides", "brute_force_top_k", "max_atoms"}, w);
    if (b.contains("ideal")) c.solver.ideal_backend = parse_backend(b["ideal"].get<std::string>());
    if (b.contains("noisy")) c.solver.noisy_backend = parse_backend(b["noisy"].get<std::string>());
    if (b.contains("overrides")) {
      for (const auto& [name, v] : b["overrides"].items()) c.solver.overrides[name] = parse_backend(v.get<std::string>());
    }
    take(b, "brute_force_top_k", c.solver.brute_force_top_k, w);
    take(b, "max_atoms", c.solver.max_atoms, w);
  }
  if (doc.contains("anneal")) c.solver.anneal = io::anneal_schedule_from_json(doc["anneal"], c.solver.anneal);
  if (doc.contains("noise")) c.solver.noise = io::noise_from_json(doc["noise"], c.solver.noise);
  if (doc.contains("embedding")) c.solver.embedding = io::embedding_config_from_json(doc["embedding"], c.solver.embedding);
  if (doc.contains("simulation")) {
    const auto& s = doc["simulation"];
    const std::string w = "config.simulation";
    auto& sim = c.solver.simulation;
    check_object_keys(s,
                      {"duration", "device_duration", "omega_max", "ideal_shots", "device_shots", "dt", "min_steps",
                       "max_steps", "gap_samples", "gap_max_atoms"},
                      w);
    take(s, "duration", sim.duration, w);
    take(s, "device_duration", sim.device_duration, w);
    take(s, "omega_max", sim.omega_max, w);
    take(s, "ideal_shots", sim.ideal_shots, w);
    take(s, "device_shots", sim.device_shots, w);
    take(s, "dt", sim.evolve.dt, w);
    take(s, "min_steps", sim.evolve.min_steps, w);
    take(s, "max_steps", sim.evolve.max_steps, w);
    take(s, "gap_samples", sim.evolve.gap_samples, w);
    take(s, "gap_max_atoms", sim.evolve.gap_max_atoms, w);
  }
  if (doc.contains("kernel")) c.kernel = io::kernel_from_json(doc["kernel"]);
  if (doc.contains("encoding")) c.encoding = io::encoding_from_json(doc["encoding"], c.encoding);
  if (doc.contains("voting")) {
    const auto v = doc["voting"].get<std::string>();
    if (v == "all") c.voting = Voting::all;
    else if (v == "modal") c.voting = Voting::modal;
    else throw DataError("config: voting must be 'all' or 'modal'");
  }
  if (doc.contains("opt_metric")) c.opt_metric = data::parse_metric(doc["opt_metric"].get<std::string>());
  take(doc, "weighted_votes", c.weighted_votes, "config");
  take(doc, "keep_empty_members", c.keep_empty_members, "config");
  take(doc, "standardize", c.standardize, "config");
  take(doc, "threads", c.threads, "config");
  take(doc, "seed", c.seed, "config");
  if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
  return c;
}

io::json report_to_json(const ExperimentReport& r, bool include_timings) {
  io::json models = io::json::array();
  io::json model_timings = io::json::object();
  for (const auto& m : r.models) {
    io::json repeats = io::json::array();
    std::vector<double> secs;
    for (const auto& rec : m.repeats) {
      io::json j = {{"repeat", rec.repeat},
                    {"confusion", {{"tp", rec.counts.tp}, {"fp", rec.counts.fp}, {"tn", rec.counts.tn}, {"fn", rec.counts.fn}}},
                    {"metrics", metrics_to_json(rec.metrics)}};
      if (rec.members) {
        j["members"] = rec.members;
        j["n_used"] = rec.n_used;
      }
      if (rec.solve) j["solve"] = diagnostics_to_json(*rec.solve);
      repeats.push_back(std::move(j));
      secs.push_back(rec.seconds);
    }
    io::json summary = io::json::object();
    for (auto metric : kAllMetrics) {
      const auto s = summarize(metric_series(m, metric));
      summary[data::metric_name(metric)] = {{"mean", s.mean}, {"std", s.std}};
    }
    models.push_back({{"name", m.name}, {"backend", m.backend}, {"repeats", repeats}, {"summary", summary}});
    model_timings[m.name] = secs;
  }
  io::json doc = {{"kind", "experiment_report"},
                  {"config", config_to_json(r.config)},
                  {"dataset", {{"rows", r.dataset_rows}, {"positives", r.dataset_positives}}},
                  {"models", models},
                  {"warnings", r.warnings}};
  if (include_timings) doc["timings"] = {{"total_seconds", r.seconds}, {"model_seconds", model_timings}};
  return doc;
}

std::vector<SweepPoint> noise_sweep(const ExperimentConfig& cfg, const std::vector<double>& scales) {
  require(!scales.empty(), "noise_sweep: no scales given");
  const auto ds = load_dataset(cfg.data);
  std::vector<SweepPoint> out;
  for (double s : scales) {
    ExperimentConfig c = cfg;
    c.solver.noise.scale_percent = s;
    out.push_back({s, run(c, ds)});
  }
  return out;
}

std::vector<SweepPoint> size_sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& n_train) {
  require(!n_train.empty(), "size_sweep: no sizes given");
  const auto ds = load_dataset(cfg.data);
  std::vector<SweepPoint> out;
  for (auto n : n_train) {
    ExperimentConfig c = cfg;
    c.plan.n_train = n;
    out.push_back({static_cast<double>(n), run(c, ds)});
  }
  return out;
}

io::json sweep_to_json(const std::string& parameter, const std::vector<SweepPoint>& points, bool include_timings) {
  io::json pts = io::json::array();
  for (const auto& p : points) {
    io::json j = {{"value", p.value}, {"report", report_to_json(p.report, include_timings)}};
    if (parameter == "n_train") {
      j["atoms"] = static_cast<std::size_t>(p.value) * static_cast<std::size_t>(p.report.config.encoding.digits);
    }
    pts.push_back(std::move(j));
  }
  return {{"kind", "sweep"}, {"parameter", parameter}, {"points", pts}};
}

void write_sweep_table(std::ostream& out, const std::string& parameter, const std::vector<SweepPoint>& points) {
  const auto old = out.precision(10);
  out << parameter << ",model,metric,mean,std\n";
  for (const auto& p : points) {
    for (const auto& m : p.report.models) {
      for (auto metric : {data::Metric::recall, data::Metric::balanced_accuracy}) {
        const auto s = summarize(metric_series(m, metric));
        out << p.value << ",\"" << m.name << "\"," << data::metric_name(metric) << ',' << s.mean << ',' << s.std << '\n';
      }
    }
  }
  out.precision(old);
}

void write_summary_table(std::ostream& out, const io::json& report) {
  if (!report.contains("models")) throw DataError("report: no 'models' key");
  const auto old = out.precision(10);
  out << "model,backend,recall_mean,recall_std,balanced_accuracy_mean,balanced_accuracy_std\n";
  for (const auto& m : report["models"]) {
    const auto& s = m.at("summary");
    out << '"' << m.at("name").get<std::string>() << "\"," << m.at("backend").get<std::string>() << ','
        << s.at("recall").at("mean").get<double>() << ',' << s.at("recall").at("std").get<double>() << ','
        << s.at("balanced_accuracy").at("mean").get<double>() << ','
        << s.at("balanced_accuracy").at("std").get<double>() << '\n';
  }
  out.precision(old);
}

ComplexityResult complexity_probe(const std::vector<std::size_t>& n_list, const std::vector<int>& k_list,
                                  const ComplexityOptions& options) {
  require(!n_list.empty() && !k_list.empty(), "complexity_probe: empty size lists");
  require(options.repeats >= 1 && options.dims >= 1, "complexity_probe: repeats and dims must be positive");
  ComplexityResult result;
  for (auto n : n_list) {
    require(n >= 2, "complexity_probe: N must be at least 2");
    Rng rng = make_rng(options.seed, streams::kSynthetic, n);
    std::normal_distribution<double> g(0.0, 1.0);
    FeatureMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(options.dims));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i % 2 ? -1 : 1;
    const TrainingSet ts(std::move(x), std::move(y));
    for (int k : k_list) {
      EncodingSpec enc;
      enc.digits = k;
      QuboBuildOptions bo;
      bo.max_variables = std::max<std::size_t>(bo.max_variables, n * static_cast<std::size_t>(k));
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t rep = 0; rep < options.repeats; ++rep) {
        std::size_t calls = 0;
        const auto t0 = Clock::now();
        double elapsed = 0.0;
        do {
          const QuboProblem q = build_qubo(ts, KernelSpec::linear(), enc, bo);
          ++calls;
          elapsed = seconds_since(t0);
        } while (elapsed < options.min_seconds);
        best = std::min(best, elapsed / static_cast<double>(calls));
      }
      result.rows.push_back({n, k, n * static_cast<std::size_t>(k), best});
    }
  }

  auto fit = [](const std::vector<std::array<double, 3>>& pts, int cols) {
    // Least squares for log t = c0 + c1 u (+ c2 v).
    Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), cols);
    Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      a(static_cast<Eigen::Index>(i), 0) = 1.0;
      a(static_cast<Eigen::Index>(i), 1) = pts[i][0];
      if (cols > 2) a(static_cast<Eigen::Index>(i), 2) = pts[i][1];
      b[static_cast<Eigen::Index>(i)] = pts[i][2];
    }
    return Eigen::VectorXd(a.colPivHouseholderQr().solve(b));
  };

  std::vector<std::array<double, 3>> all;
  for (const auto& r : result.rows) {
    all.push_back({std::log(static_cast<double>(r.n)), std::log(static_cast<double>(r.k)), std::log(r.seconds)});
  }
  const bool vary_n = n_list.size() > 1;
  const bool vary_k = k_list.size() > 1;
  if (vary_n && vary_k) {
    const auto c = fit(all, 3);
    result.slope_n = c[1];
    result.slope_k = c[2];
  }
  for (int k : k_list) {
    std::vector<std::array<double, 3>> pts;
    for (const auto& p : all) {
      if (std::abs(p[1] - std::log(static_cast<double>(k))) < 1e-12) pts.push_back(p);
    }
    if (pts.size() > 1) result.slope_n_at_k[k] = fit(pts, 2)[1];
  }
  for (auto n : n_list) {
    std::vector<std::array<double, 3>> pts;
    for (const auto& p : all) {
      if (std::abs(p[0] - std::log(static_cast<double>(n))) < 1e-12) pts.push_back({p[1], 0.0, p[2]});
    }
    if (pts.size() > 1) result.slope_k_at_n[n] = fit(pts, 2)[1];
  }
  if (vary_n && !vary_k) result.slope_n = result.slope_n_at_k.begin()->second;
  if (vary_k && !vary_n) result.slope_k = result.slope_k_at_n.begin()->second;
  return result;
}

io::json complexity_to_json(const ComplexityResult& r) {
  io::json rows = io::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n}, {"k", row.k}, {"qubits", row.qubits}, {"seconds", row.seconds}});
  }
  io::json by_k = io::json::object();
  for (const auto& [k, s] : r.slope_n_at_k) by_k[std::to_string(k)] = s;
  io::json by_n = io::json::object();
  for (const auto& [n, s] : r.slope_k_at_n) by_n[std::to_string(n)] = s;
  return {{"kind", "complexity"},
          {"rows", rows},
          {"slope_n", r.slope_n},
          {"slope_k", r.slope_k},
          {"slope_n_at_k", by_k},
          {"slope_k_at_n", by_n}};
}

}  // namespace qsvm::experiment
