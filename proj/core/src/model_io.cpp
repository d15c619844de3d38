#include "nomina/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nomina/digest.hpp"

namespace nomina {

namespace {

constexpr std::string_view kMagic = "nomina model-file v1";
constexpr std::string_view kMagicPrefix = "nomina model-file";

void append_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

struct LineReader {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line_no = 0;

    bool next(std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        return true;
    }

    std::string_view expect() {
        std::string_view line;
        if (!next(line)) throw CorruptFile("model file ends prematurely");
        return line;
    }
};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_double(std::string_view tok, std::size_t line_no) {
    std::string s(tok);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw ModelFormatError("line " + std::to_string(line_no) + ": bad number \"" + s + "\"");
    return v;
}

long long parse_int(std::string_view tok, std::size_t line_no) {
    std::string s(tok);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        throw ModelFormatError("line " + std::to_string(line_no) + ": bad integer \"" + s + "\"");
    return v;
}

std::uint64_t parse_u64(std::string_view tok, int base, std::size_t line_no) {
    std::string s(tok);
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(s.c_str(), &end, base);
    if (s.empty() || end != s.c_str() + s.size())
        throw ModelFormatError("line " + std::to_string(line_no) + ": bad integer \"" + s + "\"");
    return v;
}

}  // namespace

std::string_view ModelFile::hyper_value(std::string_view key, std::string_view fallback) const {
    for (const auto& [k, v] : hyper)
        if (k == key) return v;
    return fallback;
}

std::string serialize_model_file(const ModelFile& file) {
    std::string payload;
    payload.reserve(1 << 16);

    payload += "kind ";
    payload += to_string(file.kind);
    payload += '\n';
    payload += "seed " + std::to_string(file.seed) + '\n';
    payload += "corpus_digest " + file.corpus_digest + '\n';
    payload += "min_ratio ";
    append_double(payload, file.min_ratio);
    payload += '\n';
    payload += "vocabulary " + file.vocabulary + '\n';
    for (const auto& [k, v] : file.hyper) payload += "hyper " + k + ' ' + v + '\n';

    for (const auto& [name, m] : file.params) {
        payload += "param " + name + ' ' + std::to_string(m.rows()) + ' ' +
                   std::to_string(m.cols()) + '\n';
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                if (c) payload += ' ';
                append_double(payload, m(r, c));
            }
            payload += '\n';
        }
    }

    if (!file.bit_rows.empty()) {
        payload += "bits " + std::to_string(file.bit_rows.size()) + ' ' +
                   std::to_string(kPackedWords) + '\n';
        char buf[24];
        for (const auto& row : file.bit_rows) {
            for (std::size_t w = 0; w < kPackedWords; ++w) {
                std::snprintf(buf, sizeof(buf), w ? " %016" PRIx64 : "%016" PRIx64, row[w]);
                payload += buf;
            }
            payload += '\n';
        }
        payload += "labels " + std::to_string(file.bit_labels.size()) + '\n';
        for (std::size_t i = 0; i < file.bit_labels.size(); ++i) {
            if (i) payload += ' ';
            payload += file.bit_labels[i] ? '1' : '0';
        }
        payload += '\n';
    }
    payload += "end\n";

    std::string out;
    out.reserve(payload.size() + 64);
    out += kMagic;
    out += '\n';
    out += "checksum " + fnv1a64_hex(payload) + '\n';
    out += payload;
    return out;
}

ModelFile parse_model_file(std::string_view text) {
    LineReader reader{text};
    std::string_view line;
    if (!reader.next(line)) throw CorruptFile("empty model file");
    if (line != kMagic) {
        if (line.substr(0, kMagicPrefix.size()) == kMagicPrefix)
            throw VersionMismatch("unsupported model-file version \"" + std::string(line) + "\"");
        throw ModelFormatError("not a model file (bad magic line)");
    }

    line = reader.expect();
    auto toks = split_ws(line);
    if (toks.size() != 2 || toks[0] != "checksum")
        throw ModelFormatError("line 2: expected the checksum line");
    const std::string payload(text.substr(reader.pos));
    if (fnv1a64_hex(payload) != toks[1])
        throw CorruptFile("checksum mismatch; the file is truncated or edited");

    ModelFile file;
    bool have_kind = false, saw_end = false;
    while (reader.next(line)) {
        if (line.empty()) continue;
        toks = split_ws(line);
        const std::string_view tag = toks[0];
        if (tag == "end") {
            saw_end = true;
            break;
        } else if (tag == "kind" && toks.size() == 2) {
            file.kind = model_kind_from_string(toks[1]);
            have_kind = true;
        } else if (tag == "seed" && toks.size() == 2) {
            file.seed = parse_u64(toks[1], 10, reader.line_no);
        } else if (tag == "corpus_digest" && toks.size() == 2) {
            file.corpus_digest = std::string(toks[1]);
        } else if (tag == "min_ratio" && toks.size() == 2) {
            file.min_ratio = parse_double(toks[1], reader.line_no);
        } else if (tag == "vocabulary" && toks.size() == 2) {
            file.vocabulary = std::string(toks[1]);
        } else if (tag == "hyper" && toks.size() >= 3) {
            // value is everything after "hyper <key> "
            const std::size_t value_at = 6 + toks[1].size() + 1;
            file.hyper.emplace_back(std::string(toks[1]), std::string(line.substr(value_at)));
        } else if (tag == "param" && toks.size() == 4) {
            const auto rows = static_cast<std::size_t>(parse_int(toks[2], reader.line_no));
            const auto cols = static_cast<std::size_t>(parse_int(toks[3], reader.line_no));
            Matrix m(rows, cols);
            for (std::size_t r = 0; r < rows; ++r) {
                const auto row_line = reader.expect();
                const auto cells = split_ws(row_line);
                if (cells.size() != cols)
                    throw ModelFormatError("line " + std::to_string(reader.line_no) +
                                           ": expected " + std::to_string(cols) + " values");
                for (std::size_t c = 0; c < cols; ++c)
                    m(r, c) = parse_double(cells[c], reader.line_no);
            }
            file.params.emplace_back(std::string(toks[1]), std::move(m));
        } else if (tag == "bits" && toks.size() == 3) {
            const auto n = static_cast<std::size_t>(parse_int(toks[1], reader.line_no));
            const auto words = static_cast<std::size_t>(parse_int(toks[2], reader.line_no));
            if (words != kPackedWords)
                throw ModelFormatError("line " + std::to_string(reader.line_no) +
                                       ": unexpected packed width");
            file.bit_rows.resize(n);
            for (std::size_t r = 0; r < n; ++r) {
                const auto row_line = reader.expect();
                const auto cells = split_ws(row_line);
                if (cells.size() != words)
                    throw ModelFormatError("line " + std::to_string(reader.line_no) +
                                           ": expected " + std::to_string(words) + " words");
                for (std::size_t w = 0; w < words; ++w)
                    file.bit_rows[r][w] = parse_u64(cells[w], 16, reader.line_no);
            }
        } else if (tag == "labels" && toks.size() == 2) {
            const auto n = static_cast<std::size_t>(parse_int(toks[1], reader.line_no));
            const auto row_line = reader.expect();
            const auto cells = split_ws(row_line);
            if (cells.size() != n)
                throw ModelFormatError("line " + std::to_string(reader.line_no) + ": expected " +
                                       std::to_string(n) + " labels");
            file.bit_labels.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                file.bit_labels[i] = static_cast<int>(parse_int(cells[i], reader.line_no));
        } else {
            throw ModelFormatError("line " + std::to_string(reader.line_no) +
                                   ": unrecognized entry \"" + std::string(tag) + "\"");
        }
    }
    if (!saw_end) throw CorruptFile("missing end marker");
    if (!have_kind) throw ModelFormatError("model file does not state its kind");
    return file;
}

void save_model_file(const ModelFile& file, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write \"" + path + "\"");
    out << serialize_model_file(file);
    if (!out) throw IoError("write to \"" + path + "\" failed");
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_file(buf.str());
}

}  // namespace nomina
