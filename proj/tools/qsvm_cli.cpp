#include "qsvm/data.hpp"
#include "qsvm/embedding.hpp"
#include "qsvm/error.hpp"
#include "qsvm/experiment.hpp"
#include "qsvm/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace qsvm;
using io::json;

namespace {

constexpr const char* kOutputEnv = "QSVM_OUTPUT_DIR";

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class T>
std::vector<T> parse_numbers(const std::string& s) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size()) throw ContractError("bad number '" + item + "'");
    out.push_back(static_cast<T>(v));
  }
  return out;
}

// Experiment config: JSON document, then flag overrides.
struct ConfigFlags {
  std::string config_path;
  std::string csv;
  std::string label_column;
  std::string models;
  std::string ideal_backend;
  std::string noisy_backend;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> synthetic_m;
  std::optional<double> separation;
  std::optional<double> noise_scale;
  std::optional<std::size_t> realizations;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--csv", csv, "dataset CSV (overrides the config data source)");
    app->add_option("--label-column", label_column, "label column of the CSV");
    app->add_option("--models", models, "comma-separated roster names, or 'all'");
    app->add_option("--ideal-backend", ideal_backend, "backend for ideal QUBO models");
    app->add_option("--noisy-backend", noisy_backend, "backend for noisy QUBO models");
    app->add_option("-o,--output-dir", output_dir, std::string("output directory (default $") + kOutputEnv + " or .)");
    app->add_option("--seed", seed, "experiment seed");
    app->add_option("--n-train", n_train, "training samples per repeat");
    app->add_option("--repeats", repeats, "number of dataset splits");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
    app->add_option("--synthetic-m", synthetic_m, "rows of the synthetic dataset");
    app->add_option("--separation", separation, "class separation of the synthetic dataset");
    app->add_option("--noise-scale", noise_scale, "noise level in percent of the defaults");
    app->add_option("--realizations", realizations, "noise realizations per solve");
  }

  experiment::ExperimentConfig build() const {
    experiment::ExperimentConfig cfg;
    cfg.models = experiment::roster_names();
    if (!config_path.empty()) cfg = experiment::config_from_json(io::read_json(config_path), cfg);
    if (!csv.empty()) cfg.data.csv = csv;
    if (!label_column.empty()) cfg.data.label_column = label_column;
    if (!models.empty()) cfg.models = models == "all" ? experiment::roster_names() : split_list(models);
    if (!ideal_backend.empty()) cfg.solver.ideal_backend = experiment::parse_backend(ideal_backend);
    if (!noisy_backend.empty()) cfg.solver.noisy_backend = experiment::parse_backend(noisy_backend);
    if (seed) {
      cfg.seed = *seed;
      cfg.plan.seed = *seed;
    }
    if (n_train) cfg.plan.n_train = *n_train;
    if (repeats) cfg.plan.repeats = *repeats;
    if (threads) cfg.threads = *threads;
    if (synthetic_m) cfg.data.synthetic.m = *synthetic_m;
    if (separation) cfg.data.synthetic.separation = *separation;
    if (noise_scale) cfg.solver.noise.scale_percent = *noise_scale;
    if (realizations) cfg.solver.noise.realizations = *realizations;
    cfg.output_dir = resolve_output(cfg.output_dir);
    cfg.validate();
    return cfg;
  }

  fs::path resolve_output(const fs::path& from_config) const {
    if (!output_dir.empty()) return output_dir;
    if (!from_config.empty()) return from_config;
    if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
    return ".";
  }
};

fs::path default_output(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return ".";
}

void emit(const json& doc, const fs::path& path) {
  io::write_json(path, doc);
  std::cerr << "wrote " << path.string() << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  std::cerr << "wrote " << path.string() << '\n';
}

void write_pulse_table(const fs::path& path, const rydberg::PulseSchedule& s, std::size_t steps) {
  std::ostringstream table;
  io::write_pulse_table(table, s, steps);
  write_text(path, table.str());
}

json metrics_doc(const data::ConfusionCounts& c) {
  const auto m = data::metrics(c);
  return {{"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}},
          {"recall", m.recall},
          {"balanced_accuracy", m.balanced_accuracy},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"f1", m.f1},
          {"degenerate", m.degenerate}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QUBO-trained support vector machines with classical and simulated Rydberg solvers"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train one roster model on a CSV training set");
  ConfigFlags train_flags;
  std::string train_data, train_validation, train_model, train_out;
  train_flags.attach(train);
  train->add_option("--data", train_data, "training CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--validation", train_validation, "validation CSV (needed by 'opt' models)")
      ->check(CLI::ExistingFile);
  train->add_option("-m,--model", train_model, "roster name, e.g. \"QUBO SVM i\"")->required();
  train->add_option("--out", train_out, "model file (default <output-dir>/model.json)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a saved model on a CSV, or run the full protocol from a config");
  ConfigFlags eval_flags;
  std::string eval_model, eval_data, eval_out;
  bool eval_no_timings = false;
  eval_flags.attach(evaluate);
  evaluate->add_option("--model", eval_model, "model file written by 'train'")->check(CLI::ExistingFile);
  evaluate->add_option("--data", eval_data, "test CSV for --model")->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval_out, "output file");
  evaluate->add_flag("--no-timings", eval_no_timings, "leave wall-clock timings out of the report");

  // embed
  auto* embed = app.add_subcommand("embed", "place atoms whose interactions approximate a QUBO");
  std::string embed_qubo, embed_mode = "continuous", embed_out, embed_output_dir, embed_pulse, embed_schedule;
  double embed_scale = 1.0, embed_duration = rydberg::kSimulationDuration;
  std::size_t embed_steps = 100;
  embedding::EmbeddingConfig embed_cfg;
  embed->add_option("--qubo", embed_qubo, "QUBO file (text rows or JSON)")->required()->check(CLI::ExistingFile);
  embed->add_option("--mode", embed_mode, "continuous | lattice")->check(CLI::IsMember({"continuous", "lattice"}));
  embed->add_option("--scale", embed_scale, "multiply Q by this factor before embedding");
  embed->add_option("--min-distance", embed_cfg.min_distance, "minimum atom spacing (um)");
  embed->add_option("--max-radius", embed_cfg.max_radius, "register radius (um)");
  embed->add_option("--lattice-constant", embed_cfg.lattice_constant, "triangular lattice spacing (um)");
  embed->add_option("--max-iters", embed_cfg.max_iters, "optimizer iterations");
  embed->add_option("--seed", embed_cfg.seed, "seed");
  embed->add_option("--duration", embed_duration, "pulse duration for the emitted schedule (us)");
  embed->add_option("--out", embed_out, "register file (default <output-dir>/register.json)");
  embed->add_option("-o,--output-dir", embed_output_dir, "output directory");
  embed->add_option("--schedule-out", embed_schedule, "also write the pulse schedule (JSON)");
  embed->add_option("--pulse-table", embed_pulse, "also write per-timestep omega/delta (CSV)");
  embed->add_option("--pulse-steps", embed_steps, "rows in the pulse table minus one");

  // anneal
  auto* anneal = app.add_subcommand("anneal", "sample a QUBO with one of the solver backends");
  std::string anneal_qubo, anneal_backend = "sim_anneal", anneal_out, anneal_output_dir, anneal_pulse, anneal_config;
  std::size_t anneal_shots = 1000, anneal_steps = 100;
  std::uint64_t anneal_seed = 0;
  double anneal_duration = rydberg::kSimulationDuration;
  std::optional<double> anneal_noise_scale;
  std::optional<std::size_t> anneal_sweeps, anneal_restarts, anneal_top_k;
  anneal->add_option("--qubo", anneal_qubo, "QUBO file (text rows or JSON)")->required()->check(CLI::ExistingFile);
  anneal->add_option("-b,--backend", anneal_backend, "brute_force | sim_anneal | rydberg_ideal | rydberg_noisy");
  anneal->add_option("-c,--config", anneal_config, "experiment config supplying solver settings")
      ->check(CLI::ExistingFile);
  anneal->add_option("--shots", anneal_shots, "readouts for rydberg backends");
  anneal->add_option("--seed", anneal_seed, "seed");
  anneal->add_option("--duration", anneal_duration, "pulse duration (us)");
  anneal->add_option("--noise-scale", anneal_noise_scale, "noise level in percent of the defaults");
  anneal->add_option("--sweeps", anneal_sweeps, "simulated annealing sweeps");
  anneal->add_option("--restarts", anneal_restarts, "simulated annealing restarts");
  anneal->add_option("--top-k", anneal_top_k, "states kept by brute_force");
  anneal->add_option("--out", anneal_out, "distribution file (default <output-dir>/distribution.json)");
  anneal->add_option("-o,--output-dir", anneal_output_dir, "output directory");
  anneal->add_option("--pulse-table", anneal_pulse, "write per-timestep omega/delta of the applied pulse (CSV)");
  anneal->add_option("--pulse-steps", anneal_steps, "rows in the pulse table minus one");

  // sweeps
  auto* sweep_noise = app.add_subcommand("sweep-noise", "repeat the protocol at several noise levels");
  ConfigFlags noise_flags;
  std::string noise_scales = "0,100,200,500,1000";
  bool noise_no_timings = false;
  noise_flags.attach(sweep_noise);
  sweep_noise->add_option("--scales", noise_scales, "comma-separated noise levels in percent");
  sweep_noise->add_flag("--no-timings", noise_no_timings, "leave wall-clock timings out of the report");

  auto* sweep_size = app.add_subcommand("sweep-size", "repeat the protocol for several training-set sizes");
  ConfigFlags size_flags;
  std::string sizes = "4,5,6,7,8";
  bool size_no_timings = false;
  size_flags.attach(sweep_size);
  sweep_size->add_option("--sizes", sizes, "comma-separated n_train values");
  sweep_size->add_flag("--no-timings", size_no_timings, "leave wall-clock timings out of the report");

  // complexity
  auto* complexity = app.add_subcommand("complexity", "time QUBO construction across N and K");
  std::string cx_n = "50,100,200,400", cx_k = "2,4,8", cx_output_dir;
  experiment::ComplexityOptions cx_opts;
  complexity->add_option("--n", cx_n, "comma-separated training-set sizes");
  complexity->add_option("--k", cx_k, "comma-separated digit counts");
  complexity->add_option("--dims", cx_opts.dims, "feature dimension");
  complexity->add_option("--repeats", cx_opts.repeats, "timing samples per cell (minimum kept)");
  complexity->add_option("--seed", cx_opts.seed, "seed");
  complexity->add_option("-o,--output-dir", cx_output_dir, "output directory");

  // report
  auto* report = app.add_subcommand("report", "print mean/std tables from a report or sweep file");
  std::string report_in;
  report->add_option("file", report_in, "experiment_report or sweep JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto cfg = train_flags.build();
      const auto& entry = experiment::find_roster(train_model);
      data::CsvOptions csv;
      csv.label_column = cfg.data.label_column;
      const auto train_ds = data::load_csv(train_data, csv);
      const auto train_set = std::make_shared<const TrainingSet>(train_ds.samples);
      LabeledData validation = train_ds.samples;
      if (!train_validation.empty()) validation = data::load_csv(train_validation, csv).samples;
      auto outcome = experiment::train_roster_model(entry, cfg, train_set, validation, cfg.seed);
      json doc = io::model_to_json(outcome.model);
      doc["roster_name"] = entry.name;
      doc["feature_names"] = train_ds.feature_names;
      const fs::path out = train_out.empty() ? cfg.output_dir / "model.json" : fs::path(train_out);
      json meta = {{"model", entry.name}, {"members", outcome.members}, {"n_used", outcome.n_used}};
      if (outcome.solve) {
        meta["backend"] = outcome.solve->backend;
        meta["distinct_states"] = outcome.solve->distinct_states;
        for (const auto& w : outcome.solve->warnings) std::cerr << "warning: " << w << '\n';
      }
      emit(doc, out);
      std::cout << meta.dump(2) << '\n';
    } else if (*evaluate) {
      if (!eval_model.empty()) {
        if (eval_data.empty()) throw ContractError("evaluate: --model needs --data");
        json doc = io::read_json(eval_model);
        doc.erase("roster_name");
        doc.erase("feature_names");
        const auto model = io::model_from_json(doc);
        data::CsvOptions csv;
        if (!eval_flags.label_column.empty()) csv.label_column = eval_flags.label_column;
        const auto ds = data::load_csv(eval_data, csv);
        const auto pred = io::predict_all(model, ds.samples.x());
        const json result = metrics_doc(data::confusion(ds.samples.y(), pred));
        if (!eval_out.empty()) emit(result, eval_out);
        std::cout << result.dump(2) << '\n';
      } else {
        auto cfg = eval_flags.build();
        const auto rep = experiment::run(cfg);
        const json doc = experiment::report_to_json(rep, !eval_no_timings);
        const fs::path out = eval_out.empty() ? cfg.output_dir / "report.json" : fs::path(eval_out);
        emit(doc, out);
        for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
        experiment::write_summary_table(std::cout, doc);
      }
    } else if (*embed) {
      embed_cfg.mode = embed_mode == "lattice" ? embedding::Mode::triangular_lattice : embedding::Mode::continuous;
      const auto q = io::load_qubo(embed_qubo);
      const QuboProblem scaled(q.matrix() * embed_scale);
      const auto rep = embedding::embed(scaled, embed_cfg);
      json doc = io::register_to_json(rep.reg);
      doc["objective"] = rep.objective;
      doc["clipped_mass"] = rep.target.clipped_mass;
      doc["diagonal_mass"] = rep.target.diagonal_mass;
      doc["evaluations"] = rep.evaluations;
      doc["scale"] = embed_scale;
      const fs::path out = embed_out.empty() ? default_output(embed_output_dir) / "register.json" : fs::path(embed_out);
      emit(doc, out);
      const auto sched = rydberg::paper_schedule(scaled, embed_duration);
      if (!embed_schedule.empty()) emit(io::schedule_to_json(sched), embed_schedule);
      if (!embed_pulse.empty()) write_pulse_table(embed_pulse, sched, embed_steps);
      std::cout << "objective " << rep.objective << " atoms " << rep.reg.size() << '\n';
    } else if (*anneal) {
      experiment::SolverSettings settings;
      if (!anneal_config.empty()) {
        settings = experiment::config_from_json(io::read_json(anneal_config)).solver;
      }
      if (anneal_noise_scale) settings.noise.scale_percent = *anneal_noise_scale;
      if (anneal_sweeps) settings.anneal.sweeps = *anneal_sweeps;
      if (anneal_restarts) settings.anneal.restarts = *anneal_restarts;
      if (anneal_top_k) settings.brute_force_top_k = *anneal_top_k;
      settings.anneal.seed = anneal_seed;
      settings.embedding.seed = anneal_seed;
      const auto backend = experiment::parse_backend(anneal_backend);
      const auto q = io::load_qubo(anneal_qubo);
      const auto res = experiment::solve_qubo(q, backend, settings, anneal_shots, anneal_duration, anneal_seed);
      for (const auto& w : res.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
      json doc = io::distribution_to_json(res.distribution);
      doc["backend"] = res.diagnostics.backend;
      const auto& modal = res.distribution.modal();
      doc["modal"] = {{"bits", modal.bits.to_string()}, {"energy", energy(q, modal.bits)}};
      if (res.reg) doc["register"] = io::register_to_json(*res.reg);
      if (res.diagnostics.norm_drift) doc["norm_drift"] = *res.diagnostics.norm_drift;
      if (res.diagnostics.embedding_objective) doc["embedding_objective"] = *res.diagnostics.embedding_objective;
      doc["energy_scale"] = res.diagnostics.energy_scale;
      const fs::path out =
          anneal_out.empty() ? default_output(anneal_output_dir) / "distribution.json" : fs::path(anneal_out);
      emit(doc, out);
      if (!anneal_pulse.empty()) {
        if (!res.schedule) throw ContractError("anneal: --pulse-table needs a rydberg backend");
        write_pulse_table(anneal_pulse, *res.schedule, anneal_steps);
      }
      std::cout << "modal " << modal.bits.to_string() << " energy " << energy(q, modal.bits) << " probability "
                << modal.probability << '\n';
    } else if (*sweep_noise) {
      auto cfg = noise_flags.build();
      const auto points = experiment::noise_sweep(cfg, parse_numbers<double>(noise_scales));
      emit(experiment::sweep_to_json("scale_percent", points, !noise_no_timings), cfg.output_dir / "sweep_noise.json");
      std::ostringstream table;
      experiment::write_sweep_table(table, "scale_percent", points);
      write_text(cfg.output_dir / "sweep_noise.csv", table.str());
      std::cout << table.str();
    } else if (*sweep_size) {
      auto cfg = size_flags.build();
      const auto points = experiment::size_sweep(cfg, parse_numbers<std::size_t>(sizes));
      emit(experiment::sweep_to_json("n_train", points, !size_no_timings), cfg.output_dir / "sweep_size.json");
      std::ostringstream table;
      experiment::write_sweep_table(table, "n_train", points);
      write_text(cfg.output_dir / "sweep_size.csv", table.str());
      std::cout << table.str();
    } else if (*complexity) {
      const auto res = experiment::complexity_probe(parse_numbers<std::size_t>(cx_n), parse_numbers<int>(cx_k), cx_opts);
      const fs::path dir = default_output(cx_output_dir);
      emit(experiment::complexity_to_json(res), dir / "complexity.json");
      std::ostringstream table;
      table << "n,k,qubits,seconds\n";
      for (const auto& r : res.rows) table << r.n << ',' << r.k << ',' << r.qubits << ',' << r.seconds << '\n';
      write_text(dir / "complexity.csv", table.str());
      std::cout << table.str() << "slope_n " << res.slope_n << " slope_k " << res.slope_k << '\n';
    } else if (*report) {
      const json doc = io::read_json(report_in);
      const auto kind = doc.value("kind", std::string());
      if (kind == "experiment_report") {
        experiment::write_summary_table(std::cout, doc);
      } else if (kind == "sweep") {
        const auto param = doc.at("parameter").get<std::string>();
        for (const auto& p : doc.at("points")) {
          std::cout << "# " << param << " = " << p.at("value").get<double>() << '\n';
          experiment::write_summary_table(std::cout, p.at("report"));
        }
      } else {
        throw DataError("report: expected an experiment_report or sweep document");
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
