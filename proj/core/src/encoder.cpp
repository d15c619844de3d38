#include "nomina/encoder.hpp"

#include "unicode.hpp"

namespace nomina {

namespace {
constexpr char32_t kCedilla = U'Ç';  // Ç
constexpr char32_t kPadSymbol = U'_';
}  // namespace

const Vocabulary& Vocabulary::standard() {
    static const Vocabulary instance;
    return instance;
}

int Vocabulary::index_of(char32_t ch) const noexcept {
    if (ch >= U'A' && ch <= U'Z') return static_cast<int>(ch - U'A');
    if (ch == kCedilla) return 26;
    if (ch == kPadSymbol) return static_cast<int>(kPadIndex);
    return -1;
}

char32_t Vocabulary::symbol(std::size_t index) const {
    if (index < 26) return static_cast<char32_t>(U'A' + index);
    if (index == 26) return kCedilla;
    if (index == kPadIndex) return kPadSymbol;
    throw InvalidArgument("vocabulary index out of range: " + std::to_string(index));
}

std::string Vocabulary::symbols_utf8() const {
    std::string out;
    for (std::size_t i = 0; i < kVocabSize; ++i) detail::utf8_append(out, symbol(i));
    return out;
}

std::size_t EncodedName::symbol_index(std::size_t row) const {
    const std::uint8_t* r = cells.data() + row * kVocabSize;
    for (std::size_t c = 0; c < kVocabSize; ++c)
        if (r[c]) return c;
    return kPadIndex;
}

std::size_t EncodedName::length() const {
    for (std::size_t row = 0; row < kMaxNameLen; ++row)
        if (at(row, kPadIndex)) return row;
    return kMaxNameLen;
}

Matrix EncodedName::to_matrix() const {
    Matrix m(kMaxNameLen, kVocabSize);
    double* out = m.data();
    for (std::size_t i = 0; i < kFlatLen; ++i) out[i] = cells[i];
    return m;
}

EncodedName encode(std::string_view name, const Vocabulary& vocab) {
    if (name.empty()) throw EmptyName("cannot encode an empty name");
    const auto codepoints = detail::utf8_decode(name);
    EncodedName enc;
    std::size_t row = 0;
    for (char32_t cp : codepoints) {
        if (row == kMaxNameLen) break;  // truncate past 20 characters
        const int idx = vocab.index_of(cp);
        if (idx < 0 || static_cast<std::size_t>(idx) == kPadIndex)
            throw UnmappableCharacter("character '" + detail::utf8_encode(cp) +
                                      "' of \"" + std::string(name) + "\" is not encodable");
        enc.cells[row * kVocabSize + static_cast<std::size_t>(idx)] = 1;
        ++row;
    }
    for (; row < kMaxNameLen; ++row) enc.cells[row * kVocabSize + kPadIndex] = 1;
    return enc;
}

std::array<std::uint8_t, kFlatLen> flatten(const EncodedName& enc) { return enc.cells; }

EncodedName unflatten(const std::array<std::uint8_t, kFlatLen>& flat) {
    EncodedName enc;
    enc.cells = flat;
    return enc;
}

std::string decode(const EncodedName& enc, const Vocabulary& vocab) {
    std::string out;
    for (std::size_t row = 0; row < kMaxNameLen; ++row) {
        int hot = -1;
        for (std::size_t c = 0; c < kVocabSize; ++c) {
            if (!enc.at(row, c)) continue;
            if (enc.at(row, c) != 1 || hot >= 0)
                throw MalformedMatrix("row " + std::to_string(row) + " is not one-hot");
            hot = static_cast<int>(c);
        }
        if (hot < 0) throw MalformedMatrix("row " + std::to_string(row) + " is all zero");
        if (static_cast<std::size_t>(hot) != kPadIndex)
            detail::utf8_append(out, vocab.symbol(static_cast<std::size_t>(hot)));
    }
    if (out.empty()) throw EmptyName("matrix decodes to an empty name");
    return out;
}

std::vector<EncodedName> encode_corpus(const Corpus& corpus) {
    std::vector<EncodedName> out;
    out.reserve(corpus.size());
    for (const auto& rec : corpus.records) out.push_back(encode(rec.name));
    return out;
}

}  // namespace nomina
