#include "nomina/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "nomina/digest.hpp"
#include "nomina/rng.hpp"
#include "unicode.hpp"

namespace nomina {

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::size_t Corpus::count_gender(int gender) const {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.gender == gender) ++n;
    return n;
}

double Corpus::gender_share(int gender) const {
    if (records.empty()) return 0.0;
    return static_cast<double>(count_gender(gender)) / static_cast<double>(records.size());
}

namespace {

// Accent folding for the Latin letters that occur in Brazilian names and in
// common user input. Cedilla maps to the dedicated Ç symbol; everything else
// folds to its unaccented base letter.
char32_t fold_letter(char32_t cp) {
    if (cp >= U'a' && cp <= U'z') return cp - (U'a' - U'A');
    if (cp >= U'A' && cp <= U'Z') return cp;
    switch (cp) {
        case U'À': case U'Á': case U'Â': case U'Ã':
        case U'Ä': case U'Å':
        case U'à': case U'á': case U'â': case U'ã':
        case U'ä': case U'å':
        case U'Ā': case U'ā': case U'Ă': case U'ă':
        case U'Ą': case U'ą':
            return U'A';
        case U'È': case U'É': case U'Ê': case U'Ë':
        case U'è': case U'é': case U'ê': case U'ë':
        case U'Ē': case U'ē': case U'Ė': case U'ė':
        case U'Ę': case U'ę': case U'Ě': case U'ě':
            return U'E';
        case U'Ì': case U'Í': case U'Î': case U'Ï':
        case U'ì': case U'í': case U'î': case U'ï':
        case U'Ĩ': case U'ĩ': case U'Ī': case U'ī':
        case U'İ': case U'ı':
            return U'I';
        case U'Ò': case U'Ó': case U'Ô': case U'Õ':
        case U'Ö': case U'Ø':
        case U'ò': case U'ó': case U'ô': case U'õ':
        case U'ö': case U'ø':
        case U'Ō': case U'ō': case U'Ő': case U'ő':
            return U'O';
        case U'Ù': case U'Ú': case U'Û': case U'Ü':
        case U'ù': case U'ú': case U'û': case U'ü':
        case U'Ū': case U'ū': case U'Ů': case U'ů':
        case U'Ű': case U'ű':
            return U'U';
        case U'Ý': case U'ý': case U'ÿ': case U'Ÿ':
            return U'Y';
        case U'Ñ': case U'ñ': case U'Ń': case U'ń':
        case U'Ň': case U'ň':
            return U'N';
        case U'Ç': case U'ç':
            return U'Ç';
        case U'Ś': case U'ś': case U'Š': case U'š':
            return U'S';
        case U'Ź': case U'ź': case U'Ż': case U'ż':
        case U'Ž': case U'ž':
            return U'Z';
        case U'Ĺ': case U'ĺ': case U'Ł': case U'ł':
            return U'L';
        case U'Ć': case U'ć': case U'Č': case U'č':
            return U'C';
        default:
            return 0;  // no mapping
    }
}

}  // namespace

std::string normalize_name(std::string_view raw) {
    std::size_t begin = 0, end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    const std::string_view trimmed = raw.substr(begin, end - begin);
    if (trimmed.empty()) throw EmptyName("name is empty");

    const auto codepoints = detail::utf8_decode(trimmed);
    std::string out;
    out.reserve(trimmed.size());
    for (char32_t cp : codepoints) {
        const char32_t folded = fold_letter(cp);
        if (folded == 0)
            throw UnmappableCharacter("character '" + detail::utf8_encode(cp) + "' in \"" +
                                      std::string(raw) + "\" has no mapping");
        detail::utf8_append(out, folded);
    }
    if (out.empty()) throw EmptyName("name normalizes to empty");
    return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

int parse_gender(std::string_view field, std::size_t row) {
    if (field == "F") return 0;
    if (field == "M") return 1;
    throw ParseError("row " + std::to_string(row) + ": gender must be F or M, got \"" +
                     std::string(field) + "\"");
}

double parse_ratio(std::string_view field, std::size_t row) {
    std::string s(field);
    char* endp = nullptr;
    const double v = std::strtod(s.c_str(), &endp);
    if (endp != s.c_str() + s.size() || s.empty() || v < 0.0 || v > 1.0)
        throw ParseError("row " + std::to_string(row) + ": ratio must be a number in [0,1], got \"" +
                         s + "\"");
    return v;
}

long long parse_count(std::string_view field, std::size_t row) {
    std::string s(field);
    char* endp = nullptr;
    const long long v = std::strtoll(s.c_str(), &endp, 10);
    if (endp != s.c_str() + s.size() || s.empty() || v < 0)
        throw ParseError("row " + std::to_string(row) + ": frequency must be a nonnegative integer, got \"" +
                         s + "\"");
    return v;
}

}  // namespace

Corpus parse_corpus_csv(std::string_view text, double min_ratio,
                        std::vector<std::string>* warnings) {
    static const std::string kFullHeader = "gender,name,total_freq,group_freq,group_name,ratio";
    static const std::string kReducedHeader = "gender,name,ratio";

    Corpus corpus;
    corpus.source_digest = fnv1a64_hex(text);

    std::size_t pos = 0, row = 0;
    bool full_schema = false, have_header = false;
    std::unordered_set<std::string> seen;

    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (pos > text.size()) break;
            ++row;
            continue;
        }
        ++row;

        if (!have_header) {
            if (line == kFullHeader)
                full_schema = true;
            else if (line == kReducedHeader)
                full_schema = false;
            else
                throw SchemaError("header \"" + std::string(line) + "\" matches neither \"" +
                                  kFullHeader + "\" nor \"" + kReducedHeader + "\"");
            have_header = true;
            continue;
        }

        const auto fields = split_fields(line);
        const std::size_t expected = full_schema ? 6 : 3;
        if (fields.size() != expected)
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(expected) + " fields, got " +
                             std::to_string(fields.size()));

        NameRecord rec;
        rec.gender = parse_gender(fields[0], row);
        try {
            rec.name = normalize_name(fields[1]);
        } catch (const EmptyName& e) {
            throw EmptyName("row " + std::to_string(row) + ": " + e.what());
        } catch (const UnmappableCharacter& e) {
            throw UnmappableCharacter("row " + std::to_string(row) + ": " + e.what());
        }
        if (full_schema) {
            rec.total_freq = parse_count(fields[2], row);
            rec.ratio = parse_ratio(fields[5], row);
        } else {
            rec.ratio = parse_ratio(fields[2], row);
        }

        if (!seen.insert(rec.name).second) {
            if (warnings)
                warnings->push_back("row " + std::to_string(row) + ": duplicate name \"" +
                                    rec.name + "\" ignored (first occurrence kept)");
            continue;
        }
        corpus.records.push_back(std::move(rec));
    }
    if (!have_header) throw SchemaError("input has no header row");

    if (min_ratio > 0.0) {
        auto filtered = filter_by_ratio(corpus, min_ratio);
        corpus.records = std::move(filtered.records);
    }
    return corpus;
}

Corpus load_corpus(const std::string& path, double min_ratio,
                   std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus_csv(buf.str(), min_ratio, warnings);
}

Corpus filter_by_ratio(const Corpus& corpus, double min_ratio) {
    Corpus out;
    out.source_digest = corpus.source_digest;
    out.records.reserve(corpus.records.size());
    for (const auto& r : corpus.records)
        if (r.ratio >= min_ratio) out.records.push_back(r);
    return out;
}

SplitCorpus split(const Corpus& corpus, std::uint64_t seed) {
    const std::size_t n = corpus.size();
    if (n < 10)
        throw CorpusTooSmall("split needs at least 10 records, got " + std::to_string(n));

    // Shuffle each class separately, then hand out validation and test with a
    // largest-remainder correction so the global 20% targets are hit exactly.
    Rng rng(seed);
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < n; ++i) by_class[corpus.records[i].gender].push_back(i);
    for (auto& cls : by_class) rng.shuffle(cls);

    const std::size_t val_target = n / 5;
    const std::size_t test_target = n / 5;

    std::size_t val_n[2], test_n[2];
    double val_frac[2];
    for (int c = 0; c < 2; ++c) {
        const std::size_t nc = by_class[c].size();
        val_n[c] = nc / 5;
        test_n[c] = nc / 5;
        val_frac[c] = static_cast<double>(nc % 5) / 5.0;
    }
    auto top_up = [&](std::size_t target, std::size_t counts[2]) {
        std::size_t total = counts[0] + counts[1];
        while (total < target) {
            const int pick = (val_frac[0] >= val_frac[1]) ? 0 : 1;
            if (counts[pick] < by_class[pick].size()) ++counts[pick];
            else ++counts[1 - pick];
            ++total;
        }
    };
    top_up(val_target, val_n);
    top_up(test_target, test_n);

    std::vector<std::size_t> val_idx, test_idx, train_idx;
    for (int c = 0; c < 2; ++c) {
        const auto& cls = by_class[c];
        std::size_t i = 0;
        for (; i < val_n[c]; ++i) val_idx.push_back(cls[i]);
        for (; i < val_n[c] + test_n[c]; ++i) test_idx.push_back(cls[i]);
        for (; i < cls.size(); ++i) train_idx.push_back(cls[i]);
    }
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    auto collect = [&](const std::vector<std::size_t>& idx) {
        Corpus part;
        part.source_digest = corpus.source_digest;
        part.records.reserve(idx.size());
        for (std::size_t i : idx) part.records.push_back(corpus.records[i]);
        return part;
    };
    SplitCorpus out;
    out.train = collect(train_idx);
    out.validation = collect(val_idx);
    out.test = collect(test_idx);
    out.seed = seed;
    return out;
}

Corpus synth_corpus(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("synth_corpus needs n >= 2");

    // Interior letters exclude the two suffix markers so the label signal
    // stays visible to linear and bag-of-letters models.
    static const char kMarkers[2] = {'A', 'E'};
    std::string interior;
    for (char c = 'A'; c <= 'Z'; ++c)
        if (c != 'A' && c != 'E') interior.push_back(c);

    Rng rng(seed);
    Corpus corpus;
    corpus.records.reserve(n);
    std::unordered_set<std::string> seen;
    while (corpus.records.size() < n) {
        const int label = static_cast<int>(rng.uniform(2));
        const std::size_t len = 3 + rng.uniform(10);
        std::string name;
        name.reserve(len);
        for (std::size_t i = 0; i + 1 < len; ++i)
            name.push_back(interior[rng.uniform(interior.size())]);
        if (label == 0)
            name.push_back(kMarkers[rng.uniform(2)]);
        else
            name.push_back(interior[rng.uniform(interior.size())]);
        if (!seen.insert(name).second) continue;
        corpus.records.push_back(NameRecord{label, std::move(name), 1.0, std::nullopt});
    }
    corpus.source_digest = fnv1a64_hex(corpus_to_csv(corpus));
    return corpus;
}

std::string corpus_to_csv(const Corpus& corpus) {
    std::string out = "gender,name,ratio\n";
    char ratio_buf[32];
    for (const auto& r : corpus.records) {
        std::snprintf(ratio_buf, sizeof(ratio_buf), "%g", r.ratio);
        out += (r.gender == 0 ? "F," : "M,");
        out += r.name;
        out += ',';
        out += ratio_buf;
        out += '\n';
    }
    return out;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write \"" + path + "\"");
    out << corpus_to_csv(corpus);
    if (!out) throw IoError("write to \"" + path + "\" failed");
}

}  // namespace nomina
