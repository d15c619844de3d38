#pragma once

#include <string_view>

#include "nomina/error.hpp"

namespace nomina {

/// The twelve model families the toolkit trains and serializes.
enum class ModelKind {
    Mlp,
    Cnn,
    Rnn,
    Gru,
    BiLstm,
    DecisionTree,
    RandomForest,
    ExtraTrees,
    Knn,
    NaiveBayes,
    Logistic,
    Ridge,
};

/// Stable lowercase token used by the CLI and the model-file format.
std::string_view to_string(ModelKind kind);

/// Inverse of to_string; throws UnknownKind.
ModelKind model_kind_from_string(std::string_view token);

/// True for the five gradient-trained architectures.
bool is_neural(ModelKind kind);

}  // namespace nomina
