#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nomina/classical.hpp"
#include "nomina/corpus.hpp"
#include "nomina/kind.hpp"
#include "nomina/metrics.hpp"
#include "nomina/model_io.hpp"
#include "nomina/neural.hpp"

namespace nomina {

using AnyModel = std::variant<Model, DecisionTree, Forest, NaiveBayes, Knn, Logistic, Ridge>;

struct RunConfig {
    std::string data_path;
    double min_ratio = 0.0;
    ModelKind kind = ModelKind::Logistic;
    std::uint64_t seed = 42;
    TrainConfig train;  // lr, batch size, epoch cap, patience; seed is taken from above
    std::string out_dir = "out";
};

/// Fits the requested kind on the train partition. For neural kinds the
/// validation partition steers early stopping and *history is filled; the
/// test partition is never touched here.
AnyModel fit_any(ModelKind kind, const SplitCorpus& parts, const TrainConfig& config,
                 TrainHistory* history = nullptr);

double model_proba(AnyModel& model, const EncodedName& name);
std::vector<double> model_probas(AnyModel& model, std::span<const EncodedName> names);

ModelFile to_model_file(AnyModel& model, std::uint64_t seed, const std::string& corpus_digest,
                        double min_ratio, const TrainConfig& train_config);
AnyModel from_model_file(const ModelFile& file);

struct RunResult {
    MetricsReport report;
    ConfusionMatrix cm;
    TrainHistory history;  // empty for classical kinds
    std::string model_path;
    std::string report_path;
    std::string confusion_path;
    std::string history_path;  // empty for classical kinds
};

/// load → filter → split → encode → fit → evaluate-on-test, writing
/// model.nomina, report.csv, confusion.csv, and (neural) history.csv under
/// config.out_dir. Test features are encoded only after fitting completes.
/// Progress goes to `log`; every artifact byte is determined by the dataset
/// bytes and the config.
RunResult run_train(const RunConfig& config, std::ostream& log);

struct EvaluateResult {
    MetricsReport report;
    ConfusionMatrix cm;
    std::string report_path;
    std::string confusion_path;
};

/// Regenerates the training-time split (digest, seed, and min_ratio must
/// agree with the model file; explicit overrides that disagree raise
/// SeedMismatch) and scores the test partition only.
EvaluateResult run_evaluate(const std::string& model_path, const std::string& data_path,
                            std::optional<double> min_ratio, std::optional<std::uint64_t> seed,
                            const std::string& out_dir, std::ostream& log);

struct PredictResult {
    std::vector<std::string> lines;  // `name,probability,label` or `input,error,Kind`
    std::size_t failures = 0;
};

/// Per-name prediction; normalization failures become error lines rather
/// than aborting the batch.
PredictResult run_predict(const std::string& model_path, std::span<const std::string> names);

/// Writes synth_corpus(n, seed) as CSV.
void run_synth(std::size_t n, std::uint64_t seed, const std::string& out_path, std::ostream& log);

}  // namespace nomina
