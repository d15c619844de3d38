#include "nomina/kind.hpp"

#include <array>
#include <string>
#include <utility>

namespace nomina {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 12> kKindTokens = {{
    {ModelKind::Mlp, "mlp"},
    {ModelKind::Cnn, "cnn"},
    {ModelKind::Rnn, "rnn"},
    {ModelKind::Gru, "gru"},
    {ModelKind::BiLstm, "bilstm"},
    {ModelKind::DecisionTree, "decision_tree"},
    {ModelKind::RandomForest, "random_forest"},
    {ModelKind::ExtraTrees, "extra_trees"},
    {ModelKind::Knn, "knn"},
    {ModelKind::NaiveBayes, "naive_bayes"},
    {ModelKind::Logistic, "logistic"},
    {ModelKind::Ridge, "ridge"},
}};

}  // namespace

std::string_view to_string(ModelKind kind) {
    for (const auto& [k, token] : kKindTokens)
        if (k == kind) return token;
    throw UnknownKind("unrecognized model kind value");
}

ModelKind model_kind_from_string(std::string_view token) {
    for (const auto& [k, t] : kKindTokens)
        if (t == token) return k;
    throw UnknownKind("unknown model kind \"" + std::string(token) + "\"");
}

bool is_neural(ModelKind kind) {
    switch (kind) {
        case ModelKind::Mlp:
        case ModelKind::Cnn:
        case ModelKind::Rnn:
        case ModelKind::Gru:
        case ModelKind::BiLstm:
            return true;
        default:
            return false;
    }
}

}  // namespace nomina
