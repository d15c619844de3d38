#include "nomina/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <type_traits>
#include <utility>

#include "nomina/parallel.hpp"

namespace nomina {

namespace {

namespace fs = std::filesystem;

std::string dataset_tag(const std::string& path) {
    const std::string name = fs::path(path).filename().string();
    return name.empty() ? path : name;
}

void write_text(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

const Classifier* classical_ptr(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> const Classifier* {
            if constexpr (std::is_base_of_v<Classifier, std::decay_t<decltype(m)>>)
                return &m;
            else
                return nullptr;
        },
        model);
}

Matrix tree_to_matrix(const FlatTree& tree) {
    Matrix m(tree.nodes.size(), 4);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const FlatTree::Node& node = tree.nodes[i];
        m(i, 0) = node.feature;
        m(i, 1) = node.left;
        m(i, 2) = node.right;
        m(i, 3) = node.p1;
    }
    return m;
}

FlatTree tree_from_matrix(const Matrix& m, const std::string& name) {
    if (m.cols() != 4 || m.rows() == 0)
        throw ModelFormatError("tensor " + name + " is not an n x 4 tree table");
    const long long n = static_cast<long long>(m.rows());
    FlatTree tree;
    tree.nodes.resize(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        FlatTree::Node& node = tree.nodes[i];
        node.feature = static_cast<int>(m(i, 0));
        node.left = static_cast<int>(m(i, 1));
        node.right = static_cast<int>(m(i, 2));
        node.p1 = m(i, 3);
        if (node.feature >= static_cast<int>(kFlatLen))
            throw ModelFormatError(name + " node " + std::to_string(i) + ": feature out of range");
        if (node.feature >= 0 && (node.left < 0 || node.left >= n || node.right < 0 ||
                                  node.right >= n))
            throw ModelFormatError(name + " node " + std::to_string(i) +
                                   ": child index out of range");
    }
    return tree;
}

const Matrix& find_param(const ModelFile& file, const std::string& name) {
    for (const auto& [key, value] : file.params)
        if (key == name) return value;
    throw ModelFormatError("missing parameter tensor \"" + name + "\"");
}

long long hyper_int(const ModelFile& file, std::string_view key, long long fallback) {
    const std::string_view raw = file.hyper_value(key);
    if (raw.empty()) return fallback;
    const std::string s(raw);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size())
        throw ModelFormatError("hyper " + std::string(key) + ": bad integer \"" + s + "\"");
    return v;
}

std::vector<int> threshold(std::span<const double> probas) {
    std::vector<int> preds(probas.size());
    for (std::size_t i = 0; i < probas.size(); ++i) preds[i] = probas[i] >= 0.5 ? 1 : 0;
    return preds;
}

}  // namespace

AnyModel fit_any(ModelKind kind, const SplitCorpus& parts, const TrainConfig& config,
                 TrainHistory* history) {
    if (is_neural(kind)) {
        Model model = build_model(kind, config.seed);
        TrainHistory h = train(model, parts, config);
        if (history) *history = std::move(h);
        return AnyModel(std::move(model));
    }
    const std::vector<EncodedName> x = encode_corpus(parts.train);
    const std::vector<int> y = label_ints(parts.train);
    switch (kind) {
        case ModelKind::DecisionTree:
            return AnyModel(fit_tree(x, y));
        case ModelKind::RandomForest:
            return AnyModel(fit_forest(x, y, ForestKind::RandomForest, 100, config.seed));
        case ModelKind::ExtraTrees:
            return AnyModel(fit_forest(x, y, ForestKind::ExtraTrees, 100, config.seed));
        case ModelKind::Knn:
            return AnyModel(fit_knn(x, y));
        case ModelKind::NaiveBayes:
            return AnyModel(fit_naive_bayes(x, y));
        case ModelKind::Logistic:
            return AnyModel(fit_logistic(x, y));
        case ModelKind::Ridge:
            return AnyModel(fit_ridge(x, y));
        default:
            throw UnknownKind("no fit path for this model kind");
    }
}

double model_proba(AnyModel& model, const EncodedName& name) {
    if (Model* neural = std::get_if<Model>(&model)) return predict_proba(*neural, name);
    return classical_ptr(model)->predict_proba(name);
}

std::vector<double> model_probas(AnyModel& model, std::span<const EncodedName> names) {
    if (Model* neural = std::get_if<Model>(&model)) return predict_proba(*neural, names);
    const Classifier* classifier = classical_ptr(model);
    std::vector<double> out(names.size());
    parallel_for(names.size(), 64, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = classifier->predict_proba(names[i]);
    });
    return out;
}

ModelFile to_model_file(AnyModel& model, std::uint64_t seed, const std::string& corpus_digest,
                        double min_ratio, const TrainConfig& train_config) {
    ModelFile file;
    file.seed = seed;
    file.corpus_digest = corpus_digest;
    file.min_ratio = min_ratio;
    file.vocabulary = Vocabulary::standard().symbols_utf8();

    if (Model* neural = std::get_if<Model>(&model)) {
        file.kind = neural->kind();
        file.hyper.emplace_back("init", "glorot_uniform");
        file.hyper.emplace_back("lr", format_g(train_config.lr));
        file.hyper.emplace_back("batch_size", std::to_string(train_config.batch_size));
        file.hyper.emplace_back("max_epochs", std::to_string(train_config.max_epochs));
        file.hyper.emplace_back("patience", std::to_string(train_config.patience));
        switch (neural->kind()) {
            case ModelKind::Mlp:
                file.hyper.emplace_back("dropout", "0.2");
                break;
            case ModelKind::Gru:
                // h_t = (1-z)*h_prev + z*candidate; matrices stack gates z, r, candidate
                file.hyper.emplace_back("gru_blend", "update_gate_candidate");
                file.hyper.emplace_back("gru_gate_order", "zrh");
                break;
            case ModelKind::BiLstm:
                file.hyper.emplace_back("lstm_gate_order", "figo");
                file.hyper.emplace_back("lstm_forget_bias", "1");
                file.hyper.emplace_back("dropout", "0.2");
                file.hyper.emplace_back("l2_factor", "0.002");
                file.hyper.emplace_back("l2_scope", "lstm_kernels");
                break;
            default:
                break;
        }
        for (const ParamRef& ref : neural->params()) file.params.emplace_back(ref.name, *ref.value);
        return file;
    }
    if (const auto* tree = std::get_if<DecisionTree>(&model)) {
        file.kind = ModelKind::DecisionTree;
        file.params.emplace_back("tree", tree_to_matrix(tree->tree));
    } else if (const auto* forest = std::get_if<Forest>(&model)) {
        file.kind = forest->kind == ForestKind::RandomForest ? ModelKind::RandomForest
                                                             : ModelKind::ExtraTrees;
        file.hyper.emplace_back("n_trees", std::to_string(forest->trees.size()));
        file.hyper.emplace_back("feature_subsample", "23");
        for (std::size_t i = 0; i < forest->trees.size(); ++i)
            file.params.emplace_back("tree" + std::to_string(i),
                                     tree_to_matrix(forest->trees[i]));
    } else if (const auto* nb = std::get_if<NaiveBayes>(&model)) {
        file.kind = ModelKind::NaiveBayes;
        file.hyper.emplace_back("alpha", "1");
        file.params.emplace_back("log_likelihood0", nb->log_likelihood[0]);
        file.params.emplace_back("log_likelihood1", nb->log_likelihood[1]);
        Matrix prior(1, 2);
        prior(0, 0) = nb->log_prior[0];
        prior(0, 1) = nb->log_prior[1];
        file.params.emplace_back("log_prior", std::move(prior));
    } else if (const auto* knn = std::get_if<Knn>(&model)) {
        file.kind = ModelKind::Knn;
        file.hyper.emplace_back("k", std::to_string(knn->k));
        file.bit_rows = knn->bits;
        file.bit_labels = knn->labels;
    } else if (const auto* logistic = std::get_if<Logistic>(&model)) {
        file.kind = ModelKind::Logistic;
        file.hyper.emplace_back("lambda", "1");
        file.hyper.emplace_back("tol", "0.0001");
        file.hyper.emplace_back("iterations", std::to_string(logistic->iterations));
        file.params.emplace_back("weights", Matrix(1, kFlatLen, logistic->weights));
        Matrix bias(1, 1);
        bias(0, 0) = logistic->bias;
        file.params.emplace_back("bias", std::move(bias));
    } else if (const auto* ridge = std::get_if<Ridge>(&model)) {
        file.kind = ModelKind::Ridge;
        file.hyper.emplace_back("alpha", "1");
        file.hyper.emplace_back("tol", "0.001");
        file.params.emplace_back("weights", Matrix(1, kFlatLen, ridge->weights));
    }
    return file;
}

AnyModel from_model_file(const ModelFile& file) {
    if (file.vocabulary != Vocabulary::standard().symbols_utf8())
        throw ModelFormatError("model file vocabulary does not match this build");

    if (is_neural(file.kind)) {
        Model model = build_model(file.kind, file.seed);
        std::vector<ParamRef> refs = model.params();
        if (file.params.size() != refs.size())
            throw ModelFormatError("expected " + std::to_string(refs.size()) +
                                   " parameter tensors, found " +
                                   std::to_string(file.params.size()));
        for (ParamRef& ref : refs) {
            const Matrix& stored = find_param(file, ref.name);
            if (!stored.same_shape(*ref.value))
                throw ModelFormatError("tensor " + ref.name + " has the wrong shape");
            *ref.value = stored;
        }
        return AnyModel(std::move(model));
    }
    switch (file.kind) {
        case ModelKind::DecisionTree:
            return AnyModel(DecisionTree(tree_from_matrix(find_param(file, "tree"), "tree")));
        case ModelKind::RandomForest:
        case ModelKind::ExtraTrees: {
            std::vector<FlatTree> trees;
            trees.reserve(file.params.size());
            for (std::size_t i = 0; i < file.params.size(); ++i) {
                const std::string name = "tree" + std::to_string(i);
                trees.push_back(tree_from_matrix(find_param(file, name), name));
            }
            if (trees.empty()) throw ModelFormatError("forest has no trees");
            const ForestKind kind = file.kind == ModelKind::RandomForest
                                        ? ForestKind::RandomForest
                                        : ForestKind::ExtraTrees;
            return AnyModel(Forest(kind, std::move(trees)));
        }
        case ModelKind::NaiveBayes: {
            const Matrix& like0 = find_param(file, "log_likelihood0");
            const Matrix& like1 = find_param(file, "log_likelihood1");
            const Matrix& prior = find_param(file, "log_prior");
            if (like0.rows() != kMaxNameLen || like0.cols() != kVocabSize ||
                !like0.same_shape(like1) || prior.rows() != 1 || prior.cols() != 2)
                throw ModelFormatError("naive_bayes tensors have the wrong shape");
            return AnyModel(NaiveBayes(like0, like1, prior(0, 0), prior(0, 1)));
        }
        case ModelKind::Knn: {
            const long long k = hyper_int(file, "k", 5);
            if (file.bit_rows.empty() || file.bit_rows.size() != file.bit_labels.size())
                throw ModelFormatError("neighbor rows and labels disagree");
            if (k < 1 || static_cast<std::size_t>(k) > file.bit_rows.size())
                throw ModelFormatError("k is outside [1, n]");
            return AnyModel(Knn(file.bit_rows, file.bit_labels, static_cast<std::size_t>(k)));
        }
        case ModelKind::Logistic: {
            const Matrix& w = find_param(file, "weights");
            const Matrix& b = find_param(file, "bias");
            if (w.size() != kFlatLen || b.size() != 1)
                throw ModelFormatError("logistic tensors have the wrong shape");
            Logistic model(std::vector<double>(w.values().begin(), w.values().end()), b(0, 0));
            model.iterations = static_cast<std::size_t>(hyper_int(file, "iterations", 0));
            return AnyModel(std::move(model));
        }
        case ModelKind::Ridge: {
            const Matrix& w = find_param(file, "weights");
            if (w.size() != kFlatLen)
                throw ModelFormatError("ridge weights have the wrong shape");
            return AnyModel(Ridge(std::vector<double>(w.values().begin(), w.values().end())));
        }
        default:
            throw UnknownKind("no load path for this model kind");
    }
}

RunResult run_train(const RunConfig& config, std::ostream& log) {
    std::vector<std::string> warnings;
    Corpus corpus = load_corpus(config.data_path, config.min_ratio, &warnings);
    for (const std::string& w : warnings) log << "warning: " << w << '\n';
    log << "loaded " << corpus.size() << " records (" << corpus.count_gender(0) << " female, "
        << corpus.count_gender(1) << " male)\n";

    const SplitCorpus parts = split(corpus, config.seed);
    log << "split " << parts.train.size() << '/' << parts.validation.size() << '/'
        << parts.test.size() << " train/validation/test\n";

    TrainConfig tc = config.train;
    tc.seed = config.seed;

    char buf[192];
    RunResult result;
    const auto t0 = std::chrono::steady_clock::now();
    AnyModel model = fit_any(config.kind, parts, tc, &result.history);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (is_neural(config.kind)) {
        std::snprintf(buf, sizeof(buf), "trained %zu epochs in %.1fs (best epoch %zu)\n",
                      result.history.epochs(), seconds, result.history.best_epoch + 1);
    } else {
        std::snprintf(buf, sizeof(buf), "fitted in %.1fs\n", seconds);
    }
    log << buf;

    const std::vector<EncodedName> x_test = encode_corpus(parts.test);
    const std::vector<int> y_test = label_ints(parts.test);
    const std::vector<int> preds = threshold(model_probas(model, x_test));
    result.cm = confusion(preds, y_test);
    result.report = scores(result.cm);
    result.report.model = std::string(to_string(config.kind));
    result.report.dataset = dataset_tag(config.data_path);
    std::snprintf(buf, sizeof(buf), "test accuracy %.6f over %lld names\n",
                  result.report.accuracy, result.cm.total());
    log << buf;

    fs::create_directories(config.out_dir);
    ModelFile file =
        to_model_file(model, config.seed, corpus.source_digest, config.min_ratio, tc);
    result.model_path = (fs::path(config.out_dir) / "model.nomina").string();
    save_model_file(file, result.model_path);
    result.report_path = (fs::path(config.out_dir) / "report.csv").string();
    const MetricsReport reports[] = {result.report};
    write_text(result.report_path, report_csv(reports));
    result.confusion_path = (fs::path(config.out_dir) / "confusion.csv").string();
    write_text(result.confusion_path, confusion_csv(result.cm));
    if (is_neural(config.kind)) {
        result.history_path = (fs::path(config.out_dir) / "history.csv").string();
        write_text(result.history_path, result.history.to_csv());
    }
    log << "wrote " << result.model_path << '\n';
    return result;
}

EvaluateResult run_evaluate(const std::string& model_path, const std::string& data_path,
                            std::optional<double> min_ratio, std::optional<std::uint64_t> seed,
                            const std::string& out_dir, std::ostream& log) {
    const ModelFile file = load_model_file(model_path);
    if (seed && *seed != file.seed)
        throw SeedMismatch("--seed " + std::to_string(*seed) +
                           " disagrees with the model file (trained with seed " +
                           std::to_string(file.seed) + ")");
    if (min_ratio && *min_ratio != file.min_ratio)
        throw SeedMismatch("--min-ratio " + format_g(*min_ratio) +
                           " disagrees with the model file (trained with " +
                           format_g(file.min_ratio) + ")");

    std::vector<std::string> warnings;
    Corpus corpus = load_corpus(data_path, file.min_ratio, &warnings);
    for (const std::string& w : warnings) log << "warning: " << w << '\n';
    if (corpus.source_digest != file.corpus_digest)
        throw SeedMismatch("dataset digest " + corpus.source_digest +
                           " differs from the training digest " + file.corpus_digest +
                           "; the held-out split cannot be reproduced");
    log << "loaded " << corpus.size() << " records\n";

    const SplitCorpus parts = split(corpus, file.seed);
    AnyModel model = from_model_file(file);

    const std::vector<EncodedName> x_test = encode_corpus(parts.test);
    const std::vector<int> y_test = label_ints(parts.test);
    const std::vector<int> preds = threshold(model_probas(model, x_test));

    EvaluateResult result;
    result.cm = confusion(preds, y_test);
    result.report = scores(result.cm);
    result.report.model = std::string(to_string(file.kind));
    result.report.dataset = dataset_tag(data_path);

    fs::create_directories(out_dir);
    result.report_path = (fs::path(out_dir) / "report.csv").string();
    const MetricsReport reports[] = {result.report};
    write_text(result.report_path, report_csv(reports));
    result.confusion_path = (fs::path(out_dir) / "confusion.csv").string();
    write_text(result.confusion_path, confusion_csv(result.cm));

    char buf[96];
    std::snprintf(buf, sizeof(buf), "test accuracy %.6f over %lld names\n",
                  result.report.accuracy, result.cm.total());
    log << buf;
    return result;
}

PredictResult run_predict(const std::string& model_path, std::span<const std::string> names) {
    const ModelFile file = load_model_file(model_path);
    AnyModel model = from_model_file(file);

    PredictResult result;
    result.lines.reserve(names.size());
    char buf[64];
    for (const std::string& raw : names) {
        try {
            const std::string name = normalize_name(raw);
            const double p = model_proba(model, encode(name));
            std::snprintf(buf, sizeof(buf), ",%.6f,%d", p, p >= 0.5 ? 1 : 0);
            result.lines.push_back(name + buf);
        } catch (const Error& e) {
            result.lines.push_back(raw + ",error," + std::string(e.kind()));
            ++result.failures;
        }
    }
    return result;
}

void run_synth(std::size_t n, std::uint64_t seed, const std::string& out_path,
               std::ostream& log) {
    const Corpus corpus = synth_corpus(n, seed);
    write_corpus(corpus, out_path);
    log << "wrote " << corpus.size() << " synthetic records to " << out_path << '\n';
}

}  // namespace nomina
