#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nomina/corpus.hpp"
#include "nomina/encoder.hpp"
#include "nomina/kind.hpp"
#include "nomina/matrix.hpp"
#include "nomina/numerics.hpp"
#include "nomina/rng.hpp"

namespace nomina {

/// A named view of one parameter tensor and its gradient. l2 > 0 marks the
/// tensor as carrying a λ·Σw² penalty (gradient contribution 2λw).
struct ParamRef {
    std::string name;
    Matrix* value = nullptr;
    Matrix* grad = nullptr;
    double l2 = 0.0;
};

/// Batched layer contract. Inputs and outputs are [batch × width] matrices;
/// sequence layers interpret width as timesteps × channels. forward with
/// training=false writes no member state, so concurrent inference on a shared
/// model is race-free. backward consumes the caches of the last training
/// forward; every grad tensor is fully overwritten per call.
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string_view type_name() const = 0;
    virtual Matrix forward(const Matrix& x, bool training) = 0;

    /// Returns dL/dinput when need_input_grad, else an empty matrix.
    virtual Matrix backward(const Matrix& grad_out, bool need_input_grad) = 0;

    virtual void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {}
    virtual void init(Rng& rng) {}
};

class Dense : public Layer {
public:
    Dense(std::size_t in, std::size_t out, Activation act);

    std::string_view type_name() const override { return "dense"; }
    Matrix forward(const Matrix& x, bool training) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void init(Rng& rng) override;

    Matrix weights, bias;
    Matrix grad_weights, grad_bias;
    Activation activation;

private:
    std::size_t in_, out_;
    Matrix input_, output_;
};

/// Valid (no padding) 1-D convolution over a [steps × channels] sequence that
/// arrives flattened as one row per example. Output rows are laid out the
/// same way: (steps − kernel + 1) × filters.
class Conv1d : public Layer {
public:
    Conv1d(std::size_t steps, std::size_t channels, std::size_t filters, std::size_t kernel,
           Activation act);

    std::string_view type_name() const override { return "conv1d"; }
    Matrix forward(const Matrix& x, bool training) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void init(Rng& rng) override;

    std::size_t out_steps() const { return steps_ - kernel_ + 1; }

    Matrix weights;  // [kernel·channels × filters]
    Matrix bias;     // [1 × filters]
    Matrix grad_weights, grad_bias;
    Activation activation;

private:
    Matrix patches(const Matrix& x) const;

    std::size_t steps_, channels_, filters_, kernel_;
    Matrix patches_, output_;
    std::size_t batch_ = 0;
};

/// Inverted dropout: active only during training, where kept units are scaled
/// by 1/(1−rate) so inference is the identity.
class Dropout : public Layer {
public:
    Dropout(double rate, std::uint64_t seed);

    std::string_view type_name() const override { return "dropout"; }
    Matrix forward(const Matrix& x, bool training) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad) override;

    /// Restarts the mask stream; lets tests pin the mask across evaluations.
    void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

    double rate() const { return rate_; }

private:
    double rate_;
    Rng rng_;
    Matrix mask_;
};

/// Elman recurrence h_t = tanh(x_t W + h_{t−1} U + b); the layer output is
/// the final hidden state.
class SimpleRnn : public Layer {
public:
    SimpleRnn(std::size_t channels, std::size_t hidden, std::size_t steps);

    std::string_view type_name() const override { return "rnn"; }
    Matrix forward(const Matrix& x, bool training) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void init(Rng& rng) override;

    Matrix weights;    // [channels × hidden]
    Matrix recurrent;  // [hidden × hidden]
    Matrix bias;       // [1 × hidden]
    Matrix grad_weights, grad_recurrent, grad_bias;

private:
    std::size_t channels_, hidden_, steps_;
    Matrix input_;
    std::vector<Matrix> states_;  // h_0 .. h_T
};

/// Gated recurrent unit with the update gate blending toward the candidate:
/// h_t = (1−z)⊙h_{t−1} + z⊙h̃. Gates stack in z, r, h̃ order inside the
/// parameter matrices.
class Gru : public Layer {
public:
    Gru(std::size_t channels, std::size_t hidden, std::size_t steps);

    std::string_view type_name() const override { return "gru"; }
    Matrix forward(const Matrix& x, bool training) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void init(Rng& rng) override;

    Matrix weights;    // [channels × 3·hidden]
    Matrix recurrent;  // [hidden × 3·hidden]
    Matrix bias;       // [1 × 3·hidden]
    Matrix grad_weights, grad_recurrent, grad_bias;

private:
    std::size_t channels_, hidden_, steps_;
    Matrix input_;
    std::vector<Matrix> states_;                    // h_0 .. h_T
    std::vector<Matrix> update_, reset_, candidate_, gated_prev_;
};

/// LSTM over the whole sequence, emitting the final hidden state. Gates stack
/// in f, i, g, o order; the forget-gate bias initializes to 1. reverse=true
/// scans the sequence back to front.
class Lstm : public Layer {
public:
    Lstm(std::size_t channels, std::size_t hidden, std::size_t steps, bool reverse,
         double l2 = 0.0);

    std::string_view type_name() const override { return "lstm"; }
    Matrix forward(const Matrix& x, bool training) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void init(Rng& rng) override;

    Matrix weights;    // [channels × 4·hidden]
    Matrix recurrent;  // [hidden × 4·hidden]
    Matrix bias;       // [1 × 4·hidden]
    Matrix grad_weights, grad_recurrent, grad_bias;

private:
    std::size_t time_index(std::size_t step) const;

    std::size_t channels_, hidden_, steps_;
    bool reverse_;
    double l2_;
    Matrix input_;
    std::vector<Matrix> h_states_, c_states_;              // index 0 is the zero state
    std::vector<Matrix> forget_, input_gate_, cell_, output_gate_;
};

/// Two LSTMs over opposite directions; output is the concatenation of their
/// final hidden states (width 2·hidden).
class Bidirectional : public Layer {
public:
    Bidirectional(std::size_t channels, std::size_t hidden, std::size_t steps, double l2 = 0.0);

    std::string_view type_name() const override { return "bilstm"; }
    Matrix forward(const Matrix& x, bool training) override;
    Matrix backward(const Matrix& grad_out, bool need_input_grad) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void init(Rng& rng) override;

    Lstm& forward_cell() { return *fwd_; }
    Lstm& backward_cell() { return *bwd_; }

private:
    std::size_t hidden_;
    std::unique_ptr<Lstm> fwd_, bwd_;
};

/// One of the five fixed architectures over 20×28 one-hot names. Forward
/// output is a [batch × 1] probability column.
class Model {
public:
    Model(ModelKind kind, std::uint64_t seed);

    ModelKind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }

    Matrix forward(const Matrix& x, bool training);
    void backward(const Matrix& grad_out);

    std::vector<ParamRef> params();
    std::size_t param_count();

private:
    ModelKind kind_;
    std::uint64_t seed_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Seeded construction + Glorot-style uniform initialization. Throws
/// UnknownKind for non-neural kinds.
Model build_model(ModelKind kind, std::uint64_t seed);

/// Encoded names as a [n × 560] double matrix, one flattened name per row.
Matrix to_input_matrix(std::span<const EncodedName> names);

/// Labels of a corpus as doubles in {0, 1}.
std::vector<double> label_vector(const Corpus& corpus);

std::vector<double> predict_proba(Model& model, std::span<const EncodedName> names);
double predict_proba(Model& model, const EncodedName& name);

struct TrainConfig {
    double lr = 0.001;
    std::size_t batch_size = 256;
    std::size_t max_epochs = 100;
    std::size_t patience = 5;
    std::uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> train_loss, val_loss, train_acc, val_acc;
    std::size_t best_epoch = 0;  // 0-based index of the minimum validation loss

    std::size_t epochs() const { return train_loss.size(); }
    std::string to_csv() const;  // epoch,train_loss,val_loss,train_acc,val_acc
};

/// Minibatch Adam on BCE plus any per-tensor L2 penalties, with per-epoch
/// seeded shuffling and early stopping on validation loss (best-epoch weights
/// are restored). Losses reported per epoch: training is the running mean
/// over minibatches, validation a full inference pass; both include the L2
/// penalty term.
TrainHistory train(Model& model, const Matrix& x_train, std::span<const double> y_train,
                   const Matrix& x_val, std::span<const double> y_val,
                   const TrainConfig& config);

/// Encodes the train and validation partitions and trains; the test partition
/// is never touched.
TrainHistory train(Model& model, const SplitCorpus& split, const TrainConfig& config);

/// Fraction of thresholded predictions equal to the labels.
double accuracy(std::span<const double> p, std::span<const double> y);

}  // namespace nomina
