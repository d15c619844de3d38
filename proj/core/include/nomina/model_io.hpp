#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nomina/classical.hpp"
#include "nomina/kind.hpp"
#include "nomina/matrix.hpp"

namespace nomina {

/// Self-describing text snapshot of any trained model. Doubles serialize with
/// 17 significant digits, so load(save(m)) predicts bit-identically, and the
/// payload carries an FNV-1a checksum so truncation or edits are detected.
struct ModelFile {
    int version = 1;
    ModelKind kind = ModelKind::Mlp;
    std::uint64_t seed = 0;
    std::string corpus_digest;
    double min_ratio = 0.0;
    std::string vocabulary;
    std::vector<std::pair<std::string, std::string>> hyper;   // ordered key → value
    std::vector<std::pair<std::string, Matrix>> params;       // ordered name → tensor
    std::vector<PackedBits> bit_rows;                         // nearest-neighbor features
    std::vector<int> bit_labels;

    /// First value for a hyper key, or the fallback.
    std::string_view hyper_value(std::string_view key, std::string_view fallback = "") const;
};

std::string serialize_model_file(const ModelFile& file);

/// Throws VersionMismatch on a foreign format version, CorruptFile on
/// checksum or truncation damage, ModelFormatError on structural problems.
ModelFile parse_model_file(std::string_view text);

void save_model_file(const ModelFile& file, const std::string& path);
ModelFile load_model_file(const std::string& path);

}  // namespace nomina
