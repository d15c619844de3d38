#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nomina/error.hpp"

namespace nomina {

/// One labeled first name. gender is 0 for female, 1 for male; name is the
/// normalized uppercase form; ratio is the dominant-gender frequency share.
struct NameRecord {
    int gender = 0;
    std::string name;
    double ratio = 1.0;
    std::optional<long long> total_freq;
};

struct Corpus {
    std::vector<NameRecord> records;  // ingestion order, no duplicate names
    std::string source_digest;        // checksum of the ingested bytes

    std::size_t size() const noexcept { return records.size(); }

    std::size_t count_gender(int gender) const;

    /// Fraction of records labeled `gender`.
    double gender_share(int gender) const;
};

/// Seeded 60/20/20 partition of a corpus; parts are disjoint, their union is
/// the input, and each part preserves ingestion order.
struct SplitCorpus {
    Corpus train;
    Corpus validation;
    Corpus test;
    std::uint64_t seed = 0;
};

/// Uppercases and strips Latin diacritics to the base letter; Ç survives as
/// its own symbol. ASCII whitespace is trimmed from the ends first.
/// Throws EmptyName or UnmappableCharacter (naming the offending character).
std::string normalize_name(std::string_view raw);

/// Reads a CSV corpus. Accepts the full header
/// `gender,name,total_freq,group_freq,group_name,ratio` or the reduced
/// `gender,name,ratio`. Records are normalized, duplicates keep the first
/// occurrence (a warning per duplicate goes to *warnings when provided), and
/// rows with ratio < min_ratio are dropped.
Corpus load_corpus(const std::string& path, double min_ratio,
                   std::vector<std::string>* warnings = nullptr);

/// Parses CSV text; load_corpus is this plus file IO and the file digest.
Corpus parse_corpus_csv(std::string_view text, double min_ratio,
                        std::vector<std::string>* warnings = nullptr);

/// Keeps records with ratio >= min_ratio. Idempotent.
Corpus filter_by_ratio(const Corpus& corpus, double min_ratio);

/// Deterministic stratified 60/20/20 split; remainder rows go to train.
/// Requires at least 10 records (CorpusTooSmall otherwise).
SplitCorpus split(const Corpus& corpus, std::uint64_t seed);

/// n distinct pseudo-names of length 3..12. The label obeys a fixed suffix
/// rule: final letter A or E means label 0, anything else label 1. Interior
/// letters never use the two marker letters, so the rule is recoverable by
/// every model family. Deterministic in seed.
Corpus synth_corpus(std::size_t n, std::uint64_t seed);

/// Reduced-schema CSV serialization (`gender,name,ratio`).
std::string corpus_to_csv(const Corpus& corpus);

/// Writes corpus_to_csv() to a file.
void write_corpus(const Corpus& corpus, const std::string& path);

}  // namespace nomina
