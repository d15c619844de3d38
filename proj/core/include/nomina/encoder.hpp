#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <vector>

#include "nomina/corpus.hpp"
#include "nomina/error.hpp"
#include "nomina/matrix.hpp"

namespace nomina {

inline constexpr std::size_t kMaxNameLen = 20;
inline constexpr std::size_t kVocabSize = 28;
inline constexpr std::size_t kPadIndex = 27;
inline constexpr std::size_t kFlatLen = kMaxNameLen * kVocabSize;  // 560

/// The 28-symbol alphabet shared by every model: 'A'..'Z' at 0..25, 'Ç' at 26
/// and the padding symbol at 27. The ordering is part of the model-file
/// format; symbols_utf8() is the canonical serialized form (PAD prints as '_').
class Vocabulary {
public:
    static const Vocabulary& standard();

    std::size_t size() const noexcept { return kVocabSize; }

    /// Index for a character, or -1 when the character is not in the alphabet.
    int index_of(char32_t ch) const noexcept;

    char32_t symbol(std::size_t index) const;

    /// "ABCDEFGHIJKLMNOPQRSTUVWXYZÇ_"
    std::string symbols_utf8() const;

private:
    Vocabulary() = default;
};

/// A name as a 20 x 28 one-hot matrix, stored row-major as bytes in {0,1}.
/// Rows past the name's length are one-hot at the padding column. cells is
/// plain data; decode() validates row-stochasticity.
struct EncodedName {
    std::array<std::uint8_t, kFlatLen> cells{};

    std::uint8_t at(std::size_t row, std::size_t col) const {
        return cells[row * kVocabSize + col];
    }

    /// Column holding the 1 in a row; assumes a well-formed row.
    std::size_t symbol_index(std::size_t row) const;

    /// Number of leading non-padding rows.
    std::size_t length() const;

    /// 20 x 28 double matrix view for the neural models.
    Matrix to_matrix() const;

    bool operator==(const EncodedName&) const = default;
};

/// One-hot encode a normalized name. Names longer than 20 characters are
/// truncated to their first 20.
EncodedName encode(std::string_view name, const Vocabulary& vocab = Vocabulary::standard());

/// Row-major flattening: a binary vector of length 560 with exactly 20 ones.
std::array<std::uint8_t, kFlatLen> flatten(const EncodedName& enc);

/// Inverse reshaping of flatten(); performs no validation.
EncodedName unflatten(const std::array<std::uint8_t, kFlatLen>& flat);

/// Back to the text form. Throws MalformedMatrix when a row is not one-hot
/// and EmptyName when every row is padding.
std::string decode(const EncodedName& enc, const Vocabulary& vocab = Vocabulary::standard());

/// Encodes every record of a corpus, in order.
std::vector<EncodedName> encode_corpus(const Corpus& corpus);

}  // namespace nomina
