#pragma once

#include "qsvm/annealer.hpp"
#include "qsvm/baselines.hpp"
#include "qsvm/embedding.hpp"
#include "qsvm/ensemble.hpp"
#include "qsvm/rydberg.hpp"
#include "qsvm/svm_qubo.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <variant>

namespace qsvm::io {

using nlohmann::json;

// QUBO matrices: plain text, one whitespace-separated row per line, or JSON.
QuboProblem read_qubo_text(std::istream& in);
void write_qubo_text(std::ostream& out, const QuboProblem& q);
json qubo_to_json(const QuboProblem& q);
QuboProblem qubo_from_json(const json& doc);
/// Reads either format, chosen by content (a JSON document starts with '{').
QuboProblem load_qubo(const std::filesystem::path& path);

json distribution_to_json(const SolutionDistribution& dist);
SolutionDistribution distribution_from_json(const json& doc);
json scored_to_json(const std::vector<ScoredBitString>& states);

json register_to_json(const rydberg::AtomRegister& reg);
rydberg::AtomRegister register_from_json(const json& doc);
json schedule_to_json(const rydberg::PulseSchedule& s);
rydberg::PulseSchedule schedule_from_json(const json& doc);
/// CSV with columns t_us, omega_rad_per_us, delta_rad_per_us on `steps` + 1
/// equally spaced times.
void write_pulse_table(std::ostream& out, const rydberg::PulseSchedule& s, std::size_t steps);

json noise_to_json(const rydberg::NoiseConfig& n);
rydberg::NoiseConfig noise_from_json(const json& doc, rydberg::NoiseConfig base = {});
json embedding_config_to_json(const embedding::EmbeddingConfig& c);
embedding::EmbeddingConfig embedding_config_from_json(const json& doc, embedding::EmbeddingConfig base = {});
json anneal_schedule_to_json(const AnnealSchedule& s);
AnnealSchedule anneal_schedule_from_json(const json& doc, AnnealSchedule base = {});
json kernel_to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const json& doc);
json encoding_to_json(const EncodingSpec& e);
EncodingSpec encoding_from_json(const json& doc, EncodingSpec base = {});

json labeled_data_to_json(const LabeledData& d);
LabeledData labeled_data_from_json(const json& doc);

/// Anything `train` can produce; all share one document schema keyed by "kind".
using AnyModel =
    std::variant<QuboSvmModel, ensemble::VotingEnsemble, ensemble::StackedModel, baselines::ClassifierModel>;

json model_to_json(const AnyModel& m);
AnyModel model_from_json(const json& doc);
json classifier_to_json(const baselines::ClassifierModel& m);
baselines::ClassifierModel classifier_from_json(const json& doc);

int predict(const AnyModel& m, Features x);
std::vector<int> predict_all(const AnyModel& m, const FeatureMatrix& x);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

}  // namespace qsvm::io
