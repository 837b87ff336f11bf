#include "qsvm/io.hpp"

#include "qsvm/error.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace qsvm::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_keys(const json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!doc.is_object()) throw DataError(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : doc.items()) {
    if (!ok.contains(key)) throw DataError(where + ": unknown key '" + key + "'");
  }
}

const json& field(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw DataError(where + ": missing '" + key + "'");
  return doc.at(key);
}

template <class T>
T get(const json& doc, const char* key, const std::string& where) {
  try {
    return field(doc, key, where).get<T>();
  } catch (const json::exception& e) {
    throw DataError(where + ": bad '" + key + "': " + e.what());
  }
}

template <class T>
void maybe(const json& doc, const char* key, T& out, const std::string& where) {
  if (doc.contains(key)) out = get<T>(doc, key, where);
}

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& doc, const std::string& where, Eigen::Index cols_hint = -1) {
  if (!doc.is_array()) throw DataError(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(doc.size());
  Eigen::Index cols = rows ? static_cast<Eigen::Index>(doc.front().size()) : std::max<Eigen::Index>(cols_hint, 0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = doc[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(where + ": ragged matrix at row " + std::to_string(r));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw DataError(where + ": non-numeric entry");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& doc, const std::string& where) {
  std::vector<double> v;
  try {
    v = doc.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json tree_to_json(const baselines::TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
  return nodes;
}

baselines::TreeModel tree_from_json(const json& doc) {
  baselines::TreeModel t;
  if (!doc.is_array() || doc.empty()) throw DataError("decision_tree: nodes must be a nonempty array");
  for (const auto& n : doc) {
    if (!n.is_array() || n.size() != 5) throw DataError("decision_tree: node must be [feature, threshold, left, right, label]");
    t.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(), n[4].get<int>()});
  }
  const int count = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      throw DataError("decision_tree: child index out of range");
    }
  }
  return t;
}

json ensemble_to_json(const ensemble::VotingEnsemble& e) {
  require(!e.members.empty(), "model_to_json: empty ensemble");
  const auto& first = e.members.front();
  json members = json::array();
  for (const auto& m : e.members) {
    members.push_back({{"bitstring", m.source_bitstring().to_string()}, {"alphas", m.alphas()}, {"bias", m.bias()}});
  }
  return {{"kind", "voting_ensemble"},
          {"kernel", kernel_to_json(first.kernel())},
          {"encoding", encoding_to_json(first.encoding())},
          {"training", labeled_data_to_json(first.training())},
          {"n_used", e.n_used},
          {"weights", e.weights},
          {"members", members}};
}

ensemble::VotingEnsemble ensemble_from_json(const json& doc) {
  const std::string where = "voting_ensemble";
  check_keys(doc, {"kind", "kernel", "encoding", "training", "n_used", "weights", "members"}, where);
  const auto kernel = kernel_from_json(field(doc, "kernel", where));
  const auto encoding = encoding_from_json(field(doc, "encoding", where));
  auto training = std::make_shared<const TrainingSet>(labeled_data_from_json(field(doc, "training", where)));
  std::vector<QuboSvmModel> members;
  for (const auto& m : field(doc, "members", where)) {
    members.emplace_back(training, kernel, encoding, get<std::vector<double>>(m, "alphas", where),
                         get<double>(m, "bias", where), BitString::parse(get<std::string>(m, "bitstring", where)));
  }
  std::vector<double> weights;
  maybe(doc, "weights", weights, where);
  return ensemble::make_ensemble(std::move(members), get<std::size_t>(doc, "n_used", where), std::move(weights));
}

std::string cap_name(CapConvention c) { return c == CapConvention::encoding_max ? "encoding_max" : "shifted_sum"; }

}  // namespace

QuboProblem read_qubo_text(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw DataError("qubo text: bad number '" + tok + "' on line " + std::to_string(line_no));
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("qubo text: no matrix rows");
  const std::size_t n = rows.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n) {
      throw DataError("qubo text: row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                      " entries, expected " + std::to_string(n));
    }
    for (std::size_t c = 0; c < n; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return QuboProblem(m);
}

void write_qubo_text(std::ostream& out, const QuboProblem& q) {
  const auto& m = q.matrix();
  const auto old = out.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
    out << '\n';
  }
  out.precision(old);
}

json qubo_to_json(const QuboProblem& q) {
  return {{"kind", "qubo"}, {"n", q.size()}, {"matrix", matrix_to_json(q.matrix())}};
}

QuboProblem qubo_from_json(const json& doc) {
  const std::string where = "qubo";
  check_keys(doc, {"kind", "n", "matrix"}, where);
  const auto m = matrix_from_json(field(doc, "matrix", where), where);
  if (doc.contains("n") && doc["n"].get<Eigen::Index>() != m.rows()) throw DataError("qubo: 'n' disagrees with matrix");
  return QuboProblem(m);
}

QuboProblem load_qubo(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  in >> std::ws;
  if (in.peek() == '{') {
    try {
      return qubo_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  return read_qubo_text(in);
}

json distribution_to_json(const SolutionDistribution& dist) {
  json entries = json::array();
  for (const auto& e : dist.entries()) {
    entries.push_back({{"bits", e.bits.to_string()}, {"count", e.count}, {"probability", e.probability}});
  }
  return {{"kind", "distribution"}, {"shots", dist.total_shots()}, {"entries", entries}};
}

SolutionDistribution distribution_from_json(const json& doc) {
  const std::string where = "distribution";
  check_keys(doc, {"kind", "shots", "entries"}, where);
  std::vector<std::pair<BitString, std::size_t>> counts;
  for (const auto& e : field(doc, "entries", where)) {
    counts.emplace_back(BitString::parse(get<std::string>(e, "bits", where)), get<std::size_t>(e, "count", where));
  }
  return SolutionDistribution::from_counts(counts);
}

json scored_to_json(const std::vector<ScoredBitString>& states) {
  json out = json::array();
  for (const auto& s : states) out.push_back({{"bits", s.bits.to_string()}, {"energy", s.energy}});
  return out;
}

json register_to_json(const rydberg::AtomRegister& reg) {
  json coords = json::array();
  for (const auto& p : reg.coords()) coords.push_back({p.x, p.y});
  return {{"kind", "register"}, {"c6", reg.c6()}, {"min_distance", reg.min_distance()}, {"coords", coords}};
}

rydberg::AtomRegister register_from_json(const json& doc) {
  const std::string where = "register";
  check_keys(doc, {"kind", "c6", "min_distance", "coords"}, where);
  std::vector<rydberg::Point> pts;
  for (const auto& c : field(doc, "coords", where)) {
    if (!c.is_array() || c.size() != 2) throw DataError("register: coordinates must be [x, y] pairs");
    pts.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  double c6 = rydberg::kDefaultC6, min_distance = 0.0;
  maybe(doc, "c6", c6, where);
  maybe(doc, "min_distance", min_distance, where);
  return rydberg::AtomRegister(std::move(pts), c6, min_distance);
}

json schedule_to_json(const rydberg::PulseSchedule& s) {
  return {{"kind", "pulse_schedule"},
          {"duration", s.duration},
          {"omega_max", s.omega_max},
          {"omega", {{"times", s.omega.times()}, {"values", s.omega.values()}}},
          {"delta", {{"times", s.delta.times()}, {"values", s.delta.values()}}}};
}

rydberg::PulseSchedule schedule_from_json(const json& doc) {
  const std::string where = "pulse_schedule";
  check_keys(doc, {"kind", "duration", "omega_max", "omega", "delta"}, where);
  rydberg::PulseSchedule s;
  s.duration = get<double>(doc, "duration", where);
  maybe(doc, "omega_max", s.omega_max, where);
  auto wave = [&](const char* key) {
    const auto& w = field(doc, key, where);
    return rydberg::Waveform(get<std::vector<double>>(w, "times", where), get<std::vector<double>>(w, "values", where));
  };
  s.omega = wave("omega");
  s.delta = wave("delta");
  s.validate();
  return s;
}

void write_pulse_table(std::ostream& out, const rydberg::PulseSchedule& s, std::size_t steps) {
  require(steps >= 1, "write_pulse_table: at least one step required");
  const auto old = out.precision(10);
  out << "t_us,omega_rad_per_us,delta_rad_per_us\n";
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = s.duration * static_cast<double>(k) / static_cast<double>(steps);
    out << t << ',' << s.omega(t) << ',' << s.delta(t) << '\n';
  }
  out.precision(old);
}

json noise_to_json(const rydberg::NoiseConfig& n) {
  return {{"spam_prep", n.spam_prep},
          {"spam_false_pos", n.spam_false_pos},
          {"spam_false_neg", n.spam_false_neg},
          {"amp_fluctuation_rel", n.amp_fluctuation_rel},
          {"doppler_sigma", n.doppler_sigma},
          {"laser_waist", n.laser_waist},
          {"scale_percent", n.scale_percent},
          {"realizations", n.realizations}};
}

rydberg::NoiseConfig noise_from_json(const json& doc, rydberg::NoiseConfig n) {
  const std::string where = "noise";
  check_keys(doc, {"spam_prep", "spam_false_pos", "spam_false_neg", "amp_fluctuation_rel", "doppler_sigma",
                   "laser_waist", "scale_percent", "realizations"},
             where);
  maybe(doc, "spam_prep", n.spam_prep, where);
  maybe(doc, "spam_false_pos", n.spam_false_pos, where);
  maybe(doc, "spam_false_neg", n.spam_false_neg, where);
  maybe(doc, "amp_fluctuation_rel", n.amp_fluctuation_rel, where);
  maybe(doc, "doppler_sigma", n.doppler_sigma, where);
  maybe(doc, "laser_waist", n.laser_waist, where);
  maybe(doc, "scale_percent", n.scale_percent, where);
  maybe(doc, "realizations", n.realizations, where);
  n.validate();
  return n;
}

json embedding_config_to_json(const embedding::EmbeddingConfig& c) {
  return {{"mode", c.mode == embedding::Mode::continuous ? "continuous" : "triangular_lattice"},
          {"lattice_constant", c.lattice_constant},
          {"min_distance", c.min_distance},
          {"max_radius", c.max_radius},
          {"max_iters", c.max_iters},
          {"seed", c.seed},
          {"c6", c.c6}};
}

embedding::EmbeddingConfig embedding_config_from_json(const json& doc, embedding::EmbeddingConfig c) {
  const std::string where = "embedding";
  check_keys(doc, {"mode", "lattice_constant", "min_distance", "max_radius", "max_iters", "seed", "c6"}, where);
  if (doc.contains("mode")) {
    const auto mode = get<std::string>(doc, "mode", where);
    if (mode == "continuous") c.mode = embedding::Mode::continuous;
    else if (mode == "triangular_lattice" || mode == "lattice") c.mode = embedding::Mode::triangular_lattice;
    else throw DataError("embedding: unknown mode '" + mode + "'");
  }
  maybe(doc, "lattice_constant", c.lattice_constant, where);
  maybe(doc, "min_distance", c.min_distance, where);
  maybe(doc, "max_radius", c.max_radius, where);
  maybe(doc, "max_iters", c.max_iters, where);
  maybe(doc, "seed", c.seed, where);
  maybe(doc, "c6", c.c6, where);
  c.validate();
  return c;
}

json anneal_schedule_to_json(const AnnealSchedule& s) {
  json doc = {{"sweeps", s.sweeps}, {"restarts", s.restarts}, {"seed", s.seed}};
  if (s.t_start) doc["t_start"] = *s.t_start;
  if (s.t_end) doc["t_end"] = *s.t_end;
  return doc;
}

AnnealSchedule anneal_schedule_from_json(const json& doc, AnnealSchedule s) {
  const std::string where = "anneal";
  check_keys(doc, {"sweeps", "restarts", "seed", "t_start", "t_end"}, where);
  maybe(doc, "sweeps", s.sweeps, where);
  maybe(doc, "restarts", s.restarts, where);
  maybe(doc, "seed", s.seed, where);
  if (doc.contains("t_start")) s.t_start = get<double>(doc, "t_start", where);
  if (doc.contains("t_end")) s.t_end = get<double>(doc, "t_end", where);
  require(s.sweeps >= 1 && s.restarts >= 1, "anneal: sweeps and restarts must be positive");
  return s;
}

json kernel_to_json(const KernelSpec& k) {
  if (k.kind == KernelSpec::Kind::linear) return {{"kind", "linear"}};
  return {{"kind", "rbf"}, {"gamma", k.gamma}};
}

KernelSpec kernel_from_json(const json& doc) {
  if (doc.is_string()) {
    const auto s = doc.get<std::string>();
    if (s == "linear") return KernelSpec::linear();
    throw DataError("kernel: '" + s + "' needs parameters; use {\"kind\": \"rbf\", \"gamma\": ...}");
  }
  const std::string where = "kernel";
  check_keys(doc, {"kind", "gamma"}, where);
  const auto kind = get<std::string>(doc, "kind", where);
  if (kind == "linear") return KernelSpec::linear();
  if (kind == "rbf") return KernelSpec::rbf(get<double>(doc, "gamma", where));
  throw DataError("kernel: unknown kind '" + kind + "'");
}

json encoding_to_json(const EncodingSpec& e) {
  return {{"digits", e.digits}, {"base", e.base}, {"xi", e.xi}, {"cap_convention", cap_name(e.cap_convention)}};
}

EncodingSpec encoding_from_json(const json& doc, EncodingSpec e) {
  const std::string where = "encoding";
  check_keys(doc, {"digits", "base", "xi", "cap_convention"}, where);
  maybe(doc, "digits", e.digits, where);
  maybe(doc, "base", e.base, where);
  maybe(doc, "xi", e.xi, where);
  if (doc.contains("cap_convention")) {
    const auto c = get<std::string>(doc, "cap_convention", where);
    if (c == "encoding_max") e.cap_convention = CapConvention::encoding_max;
    else if (c == "shifted_sum") e.cap_convention = CapConvention::shifted_sum;
    else throw DataError("encoding: unknown cap_convention '" + c + "'");
  }
  e.validate();
  return e;
}

json labeled_data_to_json(const LabeledData& d) {
  return {{"x", matrix_to_json(d.x())}, {"y", d.y()}};
}

LabeledData labeled_data_from_json(const json& doc) {
  const std::string where = "training";
  check_keys(doc, {"x", "y"}, where);
  const Eigen::MatrixXd x = matrix_from_json(field(doc, "x", where), where);
  return LabeledData(FeatureMatrix(x), get<std::vector<int>>(doc, "y", where));
}

json classifier_to_json(const baselines::ClassifierModel& model) {
  using namespace baselines;
  return std::visit(
      overloaded{
          [](const KnnModel& m) -> json {
            return {{"kind", "knn"}, {"k", m.k}, {"training", labeled_data_to_json(*m.train)}};
          },
          [](const NaiveBayesModel& m) -> json {
            return {{"kind", "naive_bayes"},
                    {"mean", matrix_to_json(m.mean)},
                    {"variance", matrix_to_json(m.variance)},
                    {"log_prior", {m.log_prior[0], m.log_prior[1]}}};
          },
          [](const LogisticModel& m) -> json {
            return {{"kind", "logistic_regression"},
                    {"weights", vector_to_json(m.weights)},
                    {"intercept", m.intercept},
                    {"feature_mean", vector_to_json(m.feature_mean)},
                    {"feature_scale", vector_to_json(m.feature_scale)}};
          },
          [](const TreeModel& m) -> json { return {{"kind", "decision_tree"}, {"nodes", tree_to_json(m)}}; },
          [](const ForestModel& m) -> json {
            json trees = json::array();
            for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
            return {{"kind", "random_forest"}, {"trees", trees}};
          },
          [](const SvmModel& m) -> json {
            return {{"kind", "svm"},      {"kernel", kernel_to_json(m.kernel)}, {"support", matrix_to_json(m.support)},
                    {"coef", m.coef},     {"bias", m.bias},                     {"c", m.c},
                    {"iterations", m.iterations}};
          },
      },
      model);
}

baselines::ClassifierModel classifier_from_json(const json& doc) {
  using namespace baselines;
  const auto kind = get<std::string>(doc, "kind", "model");
  const std::string where = kind;
  if (kind == "knn") {
    check_keys(doc, {"kind", "k", "training"}, where);
    return KnnModel{std::make_shared<const LabeledData>(labeled_data_from_json(field(doc, "training", where))),
                    get<std::size_t>(doc, "k", where)};
  }
  if (kind == "naive_bayes") {
    check_keys(doc, {"kind", "mean", "variance", "log_prior"}, where);
    NaiveBayesModel m;
    m.mean = matrix_from_json(field(doc, "mean", where), where);
    m.variance = matrix_from_json(field(doc, "variance", where), where);
    const auto lp = get<std::vector<double>>(doc, "log_prior", where);
    if (lp.size() != 2 || m.mean.rows() != 2 || m.variance.rows() != 2 || m.mean.cols() != m.variance.cols()) {
      throw DataError("naive_bayes: inconsistent shapes");
    }
    m.log_prior = {lp[0], lp[1]};
    return m;
  }
  if (kind == "logistic_regression") {
    check_keys(doc, {"kind", "weights", "intercept", "feature_mean", "feature_scale"}, where);
    LogisticModel m;
    m.weights = vector_from_json(field(doc, "weights", where), where);
    m.intercept = get<double>(doc, "intercept", where);
    m.feature_mean = vector_from_json(field(doc, "feature_mean", where), where);
    m.feature_scale = vector_from_json(field(doc, "feature_scale", where), where);
    if (m.feature_mean.size() != m.weights.size() || m.feature_scale.size() != m.weights.size()) {
      throw DataError("logistic_regression: inconsistent shapes");
    }
    return m;
  }
  if (kind == "decision_tree") {
    check_keys(doc, {"kind", "nodes"}, where);
    return tree_from_json(field(doc, "nodes", where));
  }
  if (kind == "random_forest") {
    check_keys(doc, {"kind", "trees"}, where);
    ForestModel m;
    for (const auto& t : field(doc, "trees", where)) m.trees.push_back(tree_from_json(t));
    if (m.trees.empty()) throw DataError("random_forest: no trees");
    return m;
  }
  if (kind == "svm") {
    check_keys(doc, {"kind", "kernel", "support", "coef", "bias", "c", "iterations"}, where);
    SvmModel m;
    m.kernel = kernel_from_json(field(doc, "kernel", where));
    m.coef = get<std::vector<double>>(doc, "coef", where);
    m.support = FeatureMatrix(matrix_from_json(field(doc, "support", where), where));
    m.bias = get<double>(doc, "bias", where);
    maybe(doc, "c", m.c, where);
    maybe(doc, "iterations", m.iterations, where);
    if (static_cast<std::size_t>(m.support.rows()) != m.coef.size()) throw DataError("svm: one coefficient per support vector required");
    return m;
  }
  throw DataError("unknown model kind '" + kind + "'");
}

json model_to_json(const AnyModel& model) {
  return std::visit(
      overloaded{
          [](const QuboSvmModel& m) -> json {
            return {{"kind", "qubo_svm"},
                    {"kernel", kernel_to_json(m.kernel())},
                    {"encoding", encoding_to_json(m.encoding())},
                    {"training", labeled_data_to_json(m.training())},
                    {"alphas", m.alphas()},
                    {"bias", m.bias()},
                    {"bitstring", m.source_bitstring().to_string()}};
          },
          [](const ensemble::VotingEnsemble& e) -> json { return ensemble_to_json(e); },
          [](const ensemble::StackedModel& s) -> json {
            json bases = json::array();
            for (const auto& b : s.base_learners) bases.push_back(classifier_to_json(b));
            return {{"kind", "stacked"},
                    {"feature_scale", s.feature_scale},
                    {"base_learners", bases},
                    {"meta", ensemble_to_json(s.meta)}};
          },
          [](const baselines::ClassifierModel& c) -> json { return classifier_to_json(c); },
      },
      model);
}

AnyModel model_from_json(const json& doc) {
  const auto kind = get<std::string>(doc, "kind", "model");
  if (kind == "qubo_svm") {
    const std::string where = kind;
    check_keys(doc, {"kind", "kernel", "encoding", "training", "alphas", "bias", "bitstring"}, where);
    auto training = std::make_shared<const TrainingSet>(labeled_data_from_json(field(doc, "training", where)));
    return QuboSvmModel(training, kernel_from_json(field(doc, "kernel", where)),
                        encoding_from_json(field(doc, "encoding", where)), get<std::vector<double>>(doc, "alphas", where),
                        get<double>(doc, "bias", where), BitString::parse(get<std::string>(doc, "bitstring", where)));
  }
  if (kind == "voting_ensemble") return ensemble_from_json(doc);
  if (kind == "stacked") {
    const std::string where = kind;
    check_keys(doc, {"kind", "feature_scale", "base_learners", "meta"}, where);
    ensemble::StackedModel s;
    s.feature_scale = get<double>(doc, "feature_scale", where);
    for (const auto& b : field(doc, "base_learners", where)) s.base_learners.push_back(classifier_from_json(b));
    s.meta = ensemble_from_json(field(doc, "meta", where));
    if (s.meta.members.front().training().dims() != s.meta_dims()) throw DataError("stacked: meta dimension mismatch");
    return s;
  }
  return classifier_from_json(doc);
}

int predict(const AnyModel& model, Features x) {
  return std::visit(overloaded{
                        [&](const QuboSvmModel& m) { return m.predict(x); },
                        [&](const ensemble::VotingEnsemble& e) { return ensemble::vote_predict(e, x); },
                        [&](const ensemble::StackedModel& s) { return ensemble::stack_predict(s, x); },
                        [&](const baselines::ClassifierModel& c) { return baselines::predict(c, x); },
                    },
                    model);
}

std::vector<int> predict_all(const AnyModel& m, const FeatureMatrix& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = predict(m, row_of(x, i));
  return out;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setw(2) << doc << '\n';
}

}  // namespace qsvm::io
