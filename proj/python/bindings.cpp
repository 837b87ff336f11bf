#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsvm/annealer.hpp"
#include "qsvm/data.hpp"
#include "qsvm/embedding.hpp"
#include "qsvm/error.hpp"
#include "qsvm/experiment.hpp"
#include "qsvm/io.hpp"
#include "qsvm/rydberg.hpp"
#include "qsvm/svm_qubo.hpp"

namespace py = pybind11;
using namespace qsvm;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

BitString to_bits(const std::vector<int>& bits) {
  std::vector<std::uint8_t> raw;
  raw.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) throw ContractError("bit strings hold 0/1 values only");
    raw.push_back(static_cast<std::uint8_t>(b));
  }
  return BitString(std::move(raw));
}

std::vector<int> from_bits(const BitString& bits) { return {bits.begin(), bits.end()}; }

LabeledData labeled(const RowMatrix& x, const std::vector<int>& y) { return LabeledData(FeatureMatrix(x), y); }

KernelSpec make_kernel(const std::string& kind, double gamma) {
  if (kind == "linear") return KernelSpec::linear();
  if (kind == "rbf") return KernelSpec::rbf(gamma);
  throw ContractError("unknown kernel '" + kind + "' (linear, rbf)");
}

EncodingSpec make_encoding(int digits, double base, double xi) {
  EncodingSpec enc;
  enc.digits = digits;
  enc.base = base;
  enc.xi = xi;
  enc.validate();
  return enc;
}

py::list distribution_list(const SolutionDistribution& dist) {
  py::list out;
  for (const auto& e : dist.entries()) out.append(py::make_tuple(from_bits(e.bits), e.count, e.probability));
  return out;
}

py::object parse_json(const io::json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

io::json dump_json(const py::object& obj) {
  return io::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

RowMatrix points_matrix(const rydberg::AtomRegister& reg) {
  RowMatrix out(static_cast<Eigen::Index>(reg.size()), 2);
  for (std::size_t i = 0; i < reg.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = reg.coords()[i].x;
    out(static_cast<Eigen::Index>(i), 1) = reg.coords()[i].y;
  }
  return out;
}

rydberg::AtomRegister register_from(const RowMatrix& pts) {
  if (pts.cols() != 2) throw ContractError("atom positions must be an (n, 2) array");
  std::vector<rydberg::Point> coords;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) coords.push_back({pts(i, 0), pts(i, 1)});
  return rydberg::AtomRegister(std::move(coords));
}

py::dict diagnostics_dict(const experiment::SolveDiagnostics& d) {
  py::dict out;
  out["backend"] = d.backend;
  out["variables"] = d.variables;
  out["shots"] = d.shots;
  out["energy_scale"] = d.energy_scale;
  out["embedding_objective"] = d.embedding_objective;
  out["norm_drift"] = d.norm_drift;
  out["min_gap"] = d.min_gap;
  out["warnings"] = d.warnings;
  return out;
}

class PyQuboSvm {
 public:
  PyQuboSvm(const RowMatrix& x, const std::vector<int>& y, const std::vector<int>& bits, int digits, double base,
            double xi, const std::string& kernel, double gamma)
      : model_(QuboSvmModel::from_bitstring(std::make_shared<const TrainingSet>(labeled(x, y)),
                                            make_kernel(kernel, gamma), make_encoding(digits, base, xi),
                                            to_bits(bits))) {}
  explicit PyQuboSvm(QuboSvmModel m) : model_(std::move(m)) {}

  Eigen::VectorXd decision_function(const RowMatrix& x) const {
    const FeatureMatrix fx(x);
    Eigen::VectorXd out(fx.rows());
    for (Eigen::Index i = 0; i < fx.rows(); ++i) out(i) = model_.decision_function(row_of(fx, static_cast<std::size_t>(i)));
    return out;
  }
  std::vector<int> predict(const RowMatrix& x) const {
    const FeatureMatrix fx(x);
    std::vector<int> out(static_cast<std::size_t>(fx.rows()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = model_.predict(row_of(fx, i));
    return out;
  }
  const QuboSvmModel& model() const { return model_; }

 private:
  QuboSvmModel model_;
};

}  // namespace

PYBIND11_MODULE(_qsvm, m) {
  m.doc() = "QUBO support vector machines with Rydberg-atom and classical solvers";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_OverflowError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  m.def(
      "build_qubo",
      [](const RowMatrix& x, const std::vector<int>& y, int digits, double base, double xi, const std::string& kernel,
         double gamma) {
        return build_qubo(labeled(x, y), make_kernel(kernel, gamma), make_encoding(digits, base, xi)).matrix();
      },
      py::arg("x"), py::arg("y"), py::arg("digits") = 2, py::arg("base") = 2.0, py::arg("xi") = 0.5,
      py::arg("kernel") = "linear", py::arg("gamma") = 1.0,
      "Symmetric QUBO matrix of the binary-encoded SVM dual; labels are +1/-1.");

  m.def(
      "energy", [](const Eigen::MatrixXd& q, const std::vector<int>& bits) { return energy(QuboProblem(q), to_bits(bits)); },
      py::arg("q"), py::arg("bits"));

  m.def(
      "brute_force",
      [](const Eigen::MatrixXd& q, std::size_t top_k) {
        py::list out;
        for (const auto& s : brute_force_solve(QuboProblem(q), top_k)) out.append(py::make_tuple(from_bits(s.bits), s.energy));
        return out;
      },
      py::arg("q"), py::arg("top_k") = 1, "Lowest-energy states as (bits, energy), ascending.");

  m.def(
      "sim_anneal",
      [](const Eigen::MatrixXd& q, std::size_t sweeps, std::size_t restarts, std::uint64_t seed) {
        AnnealSchedule s;
        s.sweeps = sweeps;
        s.restarts = restarts;
        s.seed = seed;
        return distribution_list(sa_solve(QuboProblem(q), s));
      },
      py::arg("q"), py::arg("sweeps") = 1000, py::arg("restarts") = 100, py::arg("seed") = 0,
      "Final states of independent Metropolis chains as (bits, count, probability).");

  m.def(
      "solve_qubo",
      [](const Eigen::MatrixXd& q, const std::string& backend, std::size_t shots, double duration, std::uint64_t seed,
         double noise_scale_percent) {
        experiment::SolverSettings settings;
        settings.noise.scale_percent = noise_scale_percent;
        auto r = experiment::solve_qubo(QuboProblem(q), experiment::parse_backend(backend), settings, shots, duration,
                                        seed);
        return py::make_tuple(distribution_list(r.distribution), diagnostics_dict(r.diagnostics));
      },
      py::arg("q"), py::arg("backend") = "rydberg_ideal", py::arg("shots") = 1000,
      py::arg("duration") = rydberg::kSimulationDuration, py::arg("seed") = 0, py::arg("noise_scale_percent") = 100.0,
      "Solve with brute_force, sim_anneal, rydberg_ideal or rydberg_noisy; returns (distribution, diagnostics).");

  m.def(
      "decode_alphas",
      [](const std::vector<int>& bits, int digits, double base, std::size_t n) {
        return decode_alphas(to_bits(bits), make_encoding(digits, base, 0.0), n);
      },
      py::arg("bits"), py::arg("digits") = 2, py::arg("base") = 2.0, py::arg("n"));

  py::class_<PyQuboSvm>(m, "QuboSvm")
      .def(py::init<const RowMatrix&, const std::vector<int>&, const std::vector<int>&, int, double, double,
                    const std::string&, double>(),
           py::arg("x"), py::arg("y"), py::arg("bits"), py::arg("digits") = 2, py::arg("base") = 2.0,
           py::arg("xi") = 0.5, py::arg("kernel") = "linear", py::arg("gamma") = 1.0)
      .def("decision_function", &PyQuboSvm::decision_function, py::arg("x"))
      .def("predict", &PyQuboSvm::predict, py::arg("x"))
      .def_property_readonly("alphas", [](const PyQuboSvm& s) { return s.model().alphas(); })
      .def_property_readonly("bias", [](const PyQuboSvm& s) { return s.model().bias(); })
      .def_property_readonly("support_count", [](const PyQuboSvm& s) { return s.model().support_count(); })
      .def("to_json", [](const PyQuboSvm& s) { return parse_json(io::model_to_json(io::AnyModel(s.model()))); })
      .def_static("from_json", [](const py::object& doc) {
        auto any = io::model_from_json(dump_json(doc));
        auto* model = std::get_if<QuboSvmModel>(&any);
        if (!model) throw DataError("document does not hold a QUBO SVM model");
        return PyQuboSvm(std::move(*model));
      });

  m.def(
      "interaction_matrix", [](const RowMatrix& pts) { return rydberg::interaction_matrix(register_from(pts)); },
      py::arg("points"), "c6 / r^6 couplings in rad/us for positions in um.");

  m.def(
      "anneal_register",
      [](const Eigen::MatrixXd& q, const RowMatrix& pts, std::size_t shots, double duration, std::uint64_t seed) {
        const QuboProblem problem(q);
        const auto sched = rydberg::paper_schedule(problem, duration);
        return distribution_list(
            rydberg::anneal_qubo(problem, register_from(pts), sched, rydberg::NoiseConfig::ideal(), shots, seed));
      },
      py::arg("q"), py::arg("points"), py::arg("shots") = 1000, py::arg("duration") = rydberg::kSimulationDuration,
      py::arg("seed") = 0, "Noiseless adiabatic sweep on a given register.");

  m.def(
      "embed",
      [](const Eigen::MatrixXd& q, const std::string& mode, std::uint64_t seed) {
        embedding::EmbeddingConfig cfg;
        if (mode == "lattice") {
          cfg.mode = embedding::Mode::triangular_lattice;
        } else if (mode != "continuous") {
          throw ContractError("unknown embedding mode '" + mode + "' (continuous, lattice)");
        }
        cfg.seed = seed;
        auto report = embedding::embed(QuboProblem(q), cfg);
        return py::make_tuple(points_matrix(report.reg), report.objective);
      },
      py::arg("q"), py::arg("mode") = "continuous", py::arg("seed") = 0,
      "Atom positions (n, 2) in um and the squared coupling residual.");

  m.def(
      "metrics",
      [](const std::vector<int>& truth, const std::vector<int>& predicted) {
        const auto c = data::confusion(truth, predicted);
        const auto v = data::metrics(c);
        py::dict out;
        out["tp"] = c.tp;
        out["fp"] = c.fp;
        out["tn"] = c.tn;
        out["fn"] = c.fn;
        out["recall"] = v.recall;
        out["balanced_accuracy"] = v.balanced_accuracy;
        out["accuracy"] = v.accuracy;
        out["precision"] = v.precision;
        out["f1"] = v.f1;
        return out;
      },
      py::arg("y_true"), py::arg("y_pred"));

  m.def(
      "synth_fraud",
      [](std::uint64_t seed, std::size_t rows, std::size_t dims, double positive_rate, double separation) {
        const auto ds = data::synth_fraud(seed, rows, dims, positive_rate, separation);
        return py::make_tuple(RowMatrix(ds.samples.x()), ds.samples.y());
      },
      py::arg("seed") = 0, py::arg("rows") = 20000, py::arg("dims") = 30, py::arg("positive_rate") = 0.0017,
      py::arg("separation") = 4.0);

  m.def(
      "balance",
      [](const RowMatrix& x, const std::vector<int>& y, std::size_t per_class, std::size_t k_neighbors,
         std::uint64_t seed) {
        const data::Dataset ds(labeled(x, y), {});
        const auto out = data::balance(ds, per_class, k_neighbors, seed);
        return py::make_tuple(RowMatrix(out.samples.x()), out.samples.y());
      },
      py::arg("x"), py::arg("y"), py::arg("per_class") = 250, py::arg("k_neighbors") = 5, py::arg("seed") = 0,
      "SMOTE on the minority class and random undersampling of the majority.");

  m.def("roster", &experiment::roster_names, "Model names accepted by run_experiment.");

  m.def(
      "run_experiment",
      [](const py::object& config) {
        const auto cfg = experiment::config_from_json(dump_json(config));
        experiment::ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = experiment::run(cfg);
        }
        return parse_json(experiment::report_to_json(report));
      },
      py::arg("config"), "Runs the evaluation protocol for a config document; returns the report document.");

  m.def(
      "complexity_probe",
      [](const std::vector<std::size_t>& n, const std::vector<int>& k, std::size_t repeats, double min_seconds) {
        experiment::ComplexityOptions opt;
        opt.repeats = repeats;
        opt.min_seconds = min_seconds;
        return parse_json(experiment::complexity_to_json(experiment::complexity_probe(n, k, opt)));
      },
      py::arg("n"), py::arg("k"), py::arg("repeats") = 3, py::arg("min_seconds") = 0.01);
}
