#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "nomina/digest.hpp"
#include "nomina/kind.hpp"
#include "nomina/model_io.hpp"

using namespace nomina;

namespace {

std::string wrap_payload(const std::string& payload) {
    return "nomina model-file v1\nchecksum " + fnv1a64_hex(payload) + '\n' + payload;
}

ModelFile sample_file() {
    ModelFile file;
    file.kind = ModelKind::Knn;
    file.seed = 42;
    file.corpus_digest = "00deadbeef001122";
    file.min_ratio = 0.85;
    file.vocabulary = "ABCDEFGHIJKLMNOPQRSTUVWXYZÇ_";
    file.hyper.emplace_back("k", "3");
    file.hyper.emplace_back("note", "three words here");
    file.params.emplace_back(
        "w", Matrix(2, 3, {1.0 / 3.0, 0.1, 1e-300, -2.718281828459045, 5e-324, 0.0}));
    PackedBits row{};
    row[0] = 0x8000000000000001ull;
    row[8] = 0xffffffffffffffffull;
    file.bit_rows.push_back(row);
    file.bit_rows.push_back(PackedBits{});
    file.bit_labels = {1, 0};
    return file;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("model kind tokens round trip and classify") {
    const std::vector<std::pair<ModelKind, std::string>> want = {
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
    };
    for (const auto& [kind, token] : want) {
        CHECK(to_string(kind) == token);
        CHECK(model_kind_from_string(token) == kind);
        const bool neural = kind == ModelKind::Mlp || kind == ModelKind::Cnn ||
                            kind == ModelKind::Rnn || kind == ModelKind::Gru ||
                            kind == ModelKind::BiLstm;
        CHECK(is_neural(kind) == neural);
    }
    CHECK_THROWS_AS(model_kind_from_string("svm"), UnknownKind);
}

TEST_CASE("serialize and parse round trip every field bit-exactly") {
    const ModelFile file = sample_file();
    const std::string text = serialize_model_file(file);
    CHECK(text.substr(0, 21) == "nomina model-file v1\n");
    CHECK(text.substr(21, 9) == "checksum ");

    const ModelFile back = parse_model_file(text);
    CHECK(back.kind == ModelKind::Knn);
    CHECK(back.seed == 42);
    CHECK(back.corpus_digest == "00deadbeef001122");
    CHECK(back.min_ratio == 0.85);
    CHECK(back.vocabulary == "ABCDEFGHIJKLMNOPQRSTUVWXYZÇ_");
    REQUIRE(back.hyper.size() == 2);
    CHECK(back.hyper[0].first == "k");
    CHECK(back.hyper[0].second == "3");
    CHECK(back.hyper[1].first == "note");
    CHECK(back.hyper[1].second == "three words here");

    REQUIRE(back.params.size() == 1);
    CHECK(back.params[0].first == "w");
    const Matrix& m = back.params[0].second;
    const Matrix& want = file.params[0].second;
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(m(r, c) == want(r, c));

    REQUIRE(back.bit_rows.size() == 2);
    CHECK(back.bit_rows[0] == file.bit_rows[0]);
    CHECK(back.bit_rows[1] == file.bit_rows[1]);
    CHECK(back.bit_labels == std::vector<int>{1, 0});

    // a second pass over the parsed copy reproduces the bytes
    CHECK(serialize_model_file(back) == text);
}

TEST_CASE("hyper lookup returns the first match or the fallback") {
    ModelFile file;
    file.hyper.emplace_back("lr", "0.001");
    file.hyper.emplace_back("lr", "0.1");
    CHECK(file.hyper_value("lr") == "0.001");
    CHECK(file.hyper_value("momentum") == "");
    CHECK(file.hyper_value("momentum", "0.9") == "0.9");
}

TEST_CASE("save and load round trip through the filesystem") {
    const auto dir = std::filesystem::temp_directory_path() / "nomina_model_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "sample.nomina").string();

    const ModelFile file = sample_file();
    save_model_file(file, path);
    const std::string text = read_file(path);
    CHECK(text == serialize_model_file(file));

    const ModelFile back = load_model_file(path);
    save_model_file(back, path + ".again");
    CHECK(read_file(path + ".again") == text);

    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(load_model_file(path), IoError);
    CHECK_THROWS_AS(save_model_file(file, (dir / "missing" / "x.nomina").string()), IoError);
}

TEST_CASE("damaged files are rejected with the matching error") {
    const std::string good = serialize_model_file(sample_file());

    CHECK_THROWS_AS(parse_model_file(""), CorruptFile);
    CHECK_THROWS_AS(parse_model_file("not a model\n"), ModelFormatError);
    CHECK_THROWS_AS(parse_model_file("nomina model-file v2\nchecksum 0\nend\n"),
                    VersionMismatch);

    std::string truncated = good.substr(0, good.size() - 5);
    CHECK_THROWS_AS(parse_model_file(truncated), CorruptFile);
    CHECK_THROWS_AS(parse_model_file(good.substr(0, 21)), CorruptFile);

    std::string flipped = good;
    flipped[flipped.size() - 3] = 'x';  // inside the final "end" marker
    CHECK_THROWS_AS(parse_model_file(flipped), CorruptFile);
}

TEST_CASE("structural problems in a checksummed payload are format errors") {
    CHECK_THROWS_AS(parse_model_file(wrap_payload("kind mlp\n")), CorruptFile);  // no end
    CHECK_THROWS_AS(parse_model_file(wrap_payload("seed 3\nend\n")), ModelFormatError);
    CHECK_THROWS_AS(parse_model_file(wrap_payload("kind svm\nend\n")), UnknownKind);
    CHECK_THROWS_AS(parse_model_file(wrap_payload("kind mlp\nmin_ratio abc\nend\n")),
                    ModelFormatError);
    CHECK_THROWS_AS(parse_model_file(wrap_payload("kind mlp\nparam w 1 3\n1 2\nend\n")),
                    ModelFormatError);
    CHECK_THROWS_AS(parse_model_file(wrap_payload("kind mlp\nmystery tag\nend\n")),
                    ModelFormatError);
    CHECK_THROWS_AS(parse_model_file(wrap_payload("kind knn\nbits 1 5\n0 0 0 0 0\nend\n")),
                    ModelFormatError);
    CHECK_THROWS_AS(parse_model_file(wrap_payload("kind knn\nlabels 2\n1\nend\n")),
                    ModelFormatError);
}

TEST_CASE("seventeen digit doubles survive a double round trip") {
    ModelFile file;
    file.kind = ModelKind::Mlp;
    file.corpus_digest = "0123456789abcdef";
    file.vocabulary = Vocabulary::standard().symbols_utf8();
    std::vector<double> tricky;
    for (int i = 1; i <= 32; ++i) tricky.push_back(1.0 / static_cast<double>(i));
    tricky.push_back(1e308);
    tricky.push_back(-1e-308);
    file.params.emplace_back("w", Matrix(1, tricky.size(), tricky));

    const ModelFile once = parse_model_file(serialize_model_file(file));
    const ModelFile twice = parse_model_file(serialize_model_file(once));
    for (std::size_t c = 0; c < tricky.size(); ++c) {
        CHECK(once.params[0].second(0, c) == tricky[c]);
        CHECK(twice.params[0].second(0, c) == tricky[c]);
    }
}
