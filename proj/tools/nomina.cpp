#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nomina/pipeline.hpp"

namespace {

std::vector<std::string> read_stdin_lines() {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(std::cin, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"character-level binary gender prediction from first names"};
    app.require_subcommand(1);

    nomina::RunConfig config;
    std::string kind_token;
    CLI::App* train_cmd =
        app.add_subcommand("train", "fit a model, evaluate it on the held-out test split, and "
                                    "write model.nomina / report.csv / confusion.csv "
                                    "(+ history.csv for gradient-trained kinds)");
    train_cmd->add_option("--data", config.data_path, "corpus CSV path")->required();
    train_cmd->add_option("--min-ratio", config.min_ratio,
                          "drop records whose dominant-gender ratio is below F")
        ->check(CLI::Range(0.0, 1.0));
    train_cmd
        ->add_option("--model", kind_token,
                     "mlp|cnn|rnn|gru|bilstm|decision_tree|random_forest|extra_trees|knn|"
                     "naive_bayes|logistic|ridge")
        ->required();
    train_cmd->add_option("--seed", config.seed, "seed for the split, init, and shuffling");
    train_cmd->add_option("--lr", config.train.lr, "Adam learning rate");
    train_cmd->add_option("--batch-size", config.train.batch_size, "minibatch size");
    train_cmd->add_option("--epochs", config.train.max_epochs, "epoch cap");
    train_cmd->add_option("--patience", config.train.patience, "early-stopping patience");
    train_cmd->add_option("--out", config.out_dir, "output directory");

    std::string eval_model, eval_data, eval_out = "out";
    std::optional<double> eval_min_ratio;
    std::optional<std::uint64_t> eval_seed;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "rebuild a saved model's split and score its test part");
    eval_cmd->add_option("--model-file", eval_model, "saved model path")->required();
    eval_cmd->add_option("--data", eval_data, "the corpus CSV the model was trained on")
        ->required();
    eval_cmd->add_option("--min-ratio", eval_min_ratio, "must match the model file when given");
    eval_cmd->add_option("--seed", eval_seed, "must match the model file when given");
    eval_cmd->add_option("--out", eval_out, "output directory");

    std::string predict_model;
    std::vector<std::string> names;
    CLI::App* predict_cmd = app.add_subcommand(
        "predict", "print name,probability,label per input name (label 1 = male)");
    predict_cmd->add_option("--model-file", predict_model, "saved model path")->required();
    predict_cmd->add_option("names", names, "names to score; stdin lines when omitted");

    std::size_t synth_n = 10000;
    std::uint64_t synth_seed = 1;
    std::string synth_out = "synth.csv";
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "write a synthetic suffix-rule corpus CSV");
    synth_cmd->add_option("--n", synth_n, "record count");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");
    synth_cmd->add_option("--out", synth_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            config.kind = nomina::model_kind_from_string(kind_token);
            nomina::run_train(config, std::cerr);
            return 0;
        }
        if (*eval_cmd) {
            nomina::run_evaluate(eval_model, eval_data, eval_min_ratio, eval_seed, eval_out,
                                 std::cerr);
            return 0;
        }
        if (*predict_cmd) {
            if (names.empty()) names = read_stdin_lines();
            const nomina::PredictResult result = nomina::run_predict(predict_model, names);
            for (const std::string& line : result.lines) std::cout << line << '\n';
            return result.failures > 0 ? 1 : 0;
        }
        if (*synth_cmd) {
            nomina::run_synth(synth_n, synth_seed, synth_out, std::cerr);
            return 0;
        }
    } catch (const nomina::Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: Unhandled: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
