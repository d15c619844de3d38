#include "nomina/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>

namespace nomina {

namespace {

void glorot_uniform(Matrix& m, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (double& v : m.values()) v = rng.uniform_real(-limit, limit);
}

/// Copy of columns [c0, c1) as a new matrix.
Matrix col_block(const Matrix& m, std::size_t c0, std::size_t c1) {
    Matrix out(m.rows(), c1 - c0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        std::memcpy(out.row(r), m.row(r) + c0, (c1 - c0) * sizeof(double));
    return out;
}

void set_col_block(Matrix& dst, std::size_t c0, const Matrix& src) {
    for (std::size_t r = 0; r < src.rows(); ++r)
        std::memcpy(dst.row(r) + c0, src.row(r), src.cols() * sizeof(double));
}

/// Timestep t of a [batch × steps·channels] sequence batch.
Matrix time_slice(const Matrix& x, std::size_t t, std::size_t channels) {
    Matrix out(x.rows(), channels);
    for (std::size_t r = 0; r < x.rows(); ++r)
        std::memcpy(out.row(r), x.row(r) + t * channels, channels * sizeof(double));
    return out;
}

void write_time_slice(Matrix& dst, std::size_t t, std::size_t channels, const Matrix& src) {
    for (std::size_t r = 0; r < src.rows(); ++r)
        std::memcpy(dst.row(r) + t * channels, src.row(r), channels * sizeof(double));
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    set_col_block(out, 0, a);
    set_col_block(out, a.cols(), b);
    return out;
}

void add_column_sums(Matrix& acc, const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) acc(0, c) += row[c];
    }
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::memcpy(out.row(i), x.row(idx[i]), x.cols() * sizeof(double));
    return out;
}

}  // namespace

// ---------------------------------------------------------------- Dense ----

Dense::Dense(std::size_t in, std::size_t out, Activation act)
    : weights(in, out),
      bias(1, out),
      grad_weights(in, out),
      grad_bias(1, out),
      activation(act),
      in_(in),
      out_(out) {
    if (in == 0 || out == 0) throw InvalidArgument("dense layer dimensions must be positive");
}

void Dense::init(Rng& rng) { glorot_uniform(weights, rng); }

Matrix Dense::forward(const Matrix& x, bool training) {
    if (x.cols() != in_)
        throw ShapeMismatch("dense forward: input width " + std::to_string(x.cols()) +
                            ", expected " + std::to_string(in_));
    Matrix z = matmul(x, weights);
    add_row_vector(z, bias);
    apply_activation_in_place(activation, z);
    if (training) {
        input_ = x;
        output_ = z;
    }
    return z;
}

Matrix Dense::backward(const Matrix& grad_out, bool need_input_grad) {
    Matrix dz = grad_out;
    scale_by_activation_derivative(activation, output_, dz);
    grad_weights = matmul(input_, dz, true, false);
    grad_bias = column_sums(dz);
    if (!need_input_grad) return {};
    return matmul(dz, weights, false, true);
}

void Dense::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".W", &weights, &grad_weights, 0.0});
    out.push_back({prefix + ".b", &bias, &grad_bias, 0.0});
}

// --------------------------------------------------------------- Conv1d ----

Conv1d::Conv1d(std::size_t steps, std::size_t channels, std::size_t filters, std::size_t kernel,
               Activation act)
    : weights(kernel * channels, filters),
      bias(1, filters),
      grad_weights(kernel * channels, filters),
      grad_bias(1, filters),
      activation(act),
      steps_(steps),
      channels_(channels),
      filters_(filters),
      kernel_(kernel) {
    if (steps == 0 || channels == 0 || filters == 0 || kernel == 0)
        throw InvalidArgument("conv1d dimensions must be positive");
    if (kernel > steps)
        throw KernelTooWide("conv1d kernel " + std::to_string(kernel) + " exceeds sequence length " +
                            std::to_string(steps));
}

void Conv1d::init(Rng& rng) { glorot_uniform(weights, rng); }

Matrix Conv1d::patches(const Matrix& x) const {
    // The flattened (step, channel) layout makes every k-step patch one
    // contiguous span of the input row.
    const std::size_t t_out = out_steps();
    const std::size_t width = kernel_ * channels_;
    Matrix p(x.rows() * t_out, width);
    for (std::size_t b = 0; b < x.rows(); ++b) {
        const double* row = x.row(b);
        for (std::size_t t = 0; t < t_out; ++t)
            std::memcpy(p.row(b * t_out + t), row + t * channels_, width * sizeof(double));
    }
    return p;
}

Matrix Conv1d::forward(const Matrix& x, bool training) {
    if (x.cols() != steps_ * channels_)
        throw ShapeMismatch("conv1d forward: input width " + std::to_string(x.cols()) +
                            ", expected " + std::to_string(steps_ * channels_));
    Matrix p = patches(x);
    Matrix z = matmul(p, weights);  // [batch·out_steps × filters]
    add_row_vector(z, bias);
    apply_activation_in_place(activation, z);
    if (training) {
        patches_ = std::move(p);
        output_ = z;
        batch_ = x.rows();
    }
    z.reshape(x.rows(), out_steps() * filters_);
    return z;
}

Matrix Conv1d::backward(const Matrix& grad_out, bool need_input_grad) {
    Matrix dz = grad_out;
    dz.reshape(batch_ * out_steps(), filters_);
    scale_by_activation_derivative(activation, output_, dz);
    grad_weights = matmul(patches_, dz, true, false);
    grad_bias = column_sums(dz);
    if (!need_input_grad) return {};

    Matrix dp = matmul(dz, weights, false, true);  // [batch·out_steps × kernel·channels]
    Matrix dx(batch_, steps_ * channels_);
    const std::size_t t_out = out_steps();
    const std::size_t width = kernel_ * channels_;
    for (std::size_t b = 0; b < batch_; ++b) {
        double* dst = dx.row(b);
        for (std::size_t t = 0; t < t_out; ++t) {
            const double* src = dp.row(b * t_out + t);
            for (std::size_t i = 0; i < width; ++i) dst[t * channels_ + i] += src[i];
        }
    }
    return dx;
}

void Conv1d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".W", &weights, &grad_weights, 0.0});
    out.push_back({prefix + ".b", &bias, &grad_bias, 0.0});
}

// -------------------------------------------------------------- Dropout ----

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
    if (rate < 0.0 || rate >= 1.0) throw InvalidArgument("dropout rate must lie in [0, 1)");
}

Matrix Dropout::forward(const Matrix& x, bool training) {
    if (!training) return x;
    const double keep_scale = 1.0 / (1.0 - rate_);
    mask_ = Matrix(x.rows(), x.cols());
    Matrix out(x.rows(), x.cols());
    auto m = mask_.values();
    auto in = x.values();
    auto o = out.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        m[i] = rng_.uniform_real() < rate_ ? 0.0 : keep_scale;
        o[i] = in[i] * m[i];
    }
    return out;
}

Matrix Dropout::backward(const Matrix& grad_out, bool need_input_grad) {
    if (!need_input_grad) return {};
    return hadamard(grad_out, mask_);
}

// ------------------------------------------------------------ SimpleRnn ----

SimpleRnn::SimpleRnn(std::size_t channels, std::size_t hidden, std::size_t steps)
    : weights(channels, hidden),
      recurrent(hidden, hidden),
      bias(1, hidden),
      grad_weights(channels, hidden),
      grad_recurrent(hidden, hidden),
      grad_bias(1, hidden),
      channels_(channels),
      hidden_(hidden),
      steps_(steps) {
    if (channels == 0 || hidden == 0 || steps == 0)
        throw InvalidArgument("rnn dimensions must be positive");
}

void SimpleRnn::init(Rng& rng) {
    glorot_uniform(weights, rng);
    glorot_uniform(recurrent, rng);
}

Matrix SimpleRnn::forward(const Matrix& x, bool training) {
    if (x.cols() != steps_ * channels_)
        throw ShapeMismatch("rnn forward: input width " + std::to_string(x.cols()) +
                            ", expected " + std::to_string(steps_ * channels_));
    Matrix h(x.rows(), hidden_);
    std::vector<Matrix> states;
    if (training) {
        states.reserve(steps_ + 1);
        states.push_back(h);
    }
    for (std::size_t t = 0; t < steps_; ++t) {
        Matrix z = matmul(time_slice(x, t, channels_), weights);
        matmul_add(z, h, recurrent);
        add_row_vector(z, bias);
        apply_activation_in_place(Activation::Tanh, z);
        h = std::move(z);
        if (training) states.push_back(h);
    }
    if (training) {
        input_ = x;
        states_ = std::move(states);
    }
    return h;
}

Matrix SimpleRnn::backward(const Matrix& grad_out, bool need_input_grad) {
    grad_weights.set_zero();
    grad_recurrent.set_zero();
    grad_bias.set_zero();
    Matrix dx;
    if (need_input_grad) dx = Matrix(input_.rows(), steps_ * channels_);

    Matrix dh = grad_out;
    for (std::size_t t = steps_; t-- > 0;) {
        Matrix dz = dh;
        scale_by_activation_derivative(Activation::Tanh, states_[t + 1], dz);
        matmul_add(grad_weights, time_slice(input_, t, channels_), dz, true, false);
        matmul_add(grad_recurrent, states_[t], dz, true, false);
        add_column_sums(grad_bias, dz);
        if (need_input_grad) write_time_slice(dx, t, channels_, matmul(dz, weights, false, true));
        dh = matmul(dz, recurrent, false, true);
    }
    return dx;
}

void SimpleRnn::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".W", &weights, &grad_weights, 0.0});
    out.push_back({prefix + ".U", &recurrent, &grad_recurrent, 0.0});
    out.push_back({prefix + ".b", &bias, &grad_bias, 0.0});
}

// ------------------------------------------------------------------ Gru ----

Gru::Gru(std::size_t channels, std::size_t hidden, std::size_t steps)
    : weights(channels, 3 * hidden),
      recurrent(hidden, 3 * hidden),
      bias(1, 3 * hidden),
      grad_weights(channels, 3 * hidden),
      grad_recurrent(hidden, 3 * hidden),
      grad_bias(1, 3 * hidden),
      channels_(channels),
      hidden_(hidden),
      steps_(steps) {
    if (channels == 0 || hidden == 0 || steps == 0)
        throw InvalidArgument("gru dimensions must be positive");
}

void Gru::init(Rng& rng) {
    glorot_uniform(weights, rng);
    glorot_uniform(recurrent, rng);
}

Matrix Gru::forward(const Matrix& x, bool training) {
    if (x.cols() != steps_ * channels_)
        throw ShapeMismatch("gru forward: input width " + std::to_string(x.cols()) +
                            ", expected " + std::to_string(steps_ * channels_));
    const std::size_t h_n = hidden_;
    const Matrix wz = col_block(weights, 0, h_n), wr = col_block(weights, h_n, 2 * h_n),
                 wc = col_block(weights, 2 * h_n, 3 * h_n);
    const Matrix uz = col_block(recurrent, 0, h_n), ur = col_block(recurrent, h_n, 2 * h_n),
                 uc = col_block(recurrent, 2 * h_n, 3 * h_n);
    const Matrix bz = col_block(bias, 0, h_n), br = col_block(bias, h_n, 2 * h_n),
                 bc = col_block(bias, 2 * h_n, 3 * h_n);

    Matrix h(x.rows(), h_n);
    std::vector<Matrix> states, zs, rs, cs, rhs;
    if (training) {
        states.reserve(steps_ + 1);
        states.push_back(h);
    }
    for (std::size_t t = 0; t < steps_; ++t) {
        const Matrix xt = time_slice(x, t, channels_);

        Matrix z = matmul(xt, wz);
        matmul_add(z, h, uz);
        add_row_vector(z, bz);
        apply_activation_in_place(Activation::Sigmoid, z);

        Matrix r = matmul(xt, wr);
        matmul_add(r, h, ur);
        add_row_vector(r, br);
        apply_activation_in_place(Activation::Sigmoid, r);

        Matrix rh = hadamard(r, h);
        Matrix c = matmul(xt, wc);
        matmul_add(c, rh, uc);
        add_row_vector(c, bc);
        apply_activation_in_place(Activation::Tanh, c);

        Matrix h_next(x.rows(), h_n);
        {
            auto hn = h_next.values();
            auto hp = h.values();
            auto zz = z.values();
            auto cc = c.values();
            for (std::size_t i = 0; i < hn.size(); ++i)
                hn[i] = (1.0 - zz[i]) * hp[i] + zz[i] * cc[i];
        }
        h = std::move(h_next);
        if (training) {
            states.push_back(h);
            zs.push_back(std::move(z));
            rs.push_back(std::move(r));
            cs.push_back(std::move(c));
            rhs.push_back(std::move(rh));
        }
    }
    if (training) {
        input_ = x;
        states_ = std::move(states);
        update_ = std::move(zs);
        reset_ = std::move(rs);
        candidate_ = std::move(cs);
        gated_prev_ = std::move(rhs);
    }
    return h;
}

Matrix Gru::backward(const Matrix& grad_out, bool need_input_grad) {
    const std::size_t h_n = hidden_;
    const Matrix wz = col_block(weights, 0, h_n), wr = col_block(weights, h_n, 2 * h_n),
                 wc = col_block(weights, 2 * h_n, 3 * h_n);
    const Matrix uz = col_block(recurrent, 0, h_n), ur = col_block(recurrent, h_n, 2 * h_n),
                 uc = col_block(recurrent, 2 * h_n, 3 * h_n);

    Matrix dwz(channels_, h_n), dwr(channels_, h_n), dwc(channels_, h_n);
    Matrix duz(h_n, h_n), dur(h_n, h_n), duc(h_n, h_n);
    Matrix dbz(1, h_n), dbr(1, h_n), dbc(1, h_n);
    Matrix dx;
    if (need_input_grad) dx = Matrix(input_.rows(), steps_ * channels_);

    Matrix dh = grad_out;
    for (std::size_t t = steps_; t-- > 0;) {
        const Matrix& h_prev = states_[t];
        const Matrix& z = update_[t];
        const Matrix& r = reset_[t];
        const Matrix& c = candidate_[t];
        const Matrix& rh = gated_prev_[t];
        const std::size_t n = dh.size();

        Matrix da_c(dh.rows(), h_n);  // candidate pre-activation grad
        Matrix dz_gate(dh.rows(), h_n);
        Matrix dh_prev(dh.rows(), h_n);
        {
            auto dhv = dh.values();
            auto zv = z.values();
            auto cv = c.values();
            auto hp = h_prev.values();
            auto dac = da_c.values();
            auto dzg = dz_gate.values();
            auto dhp = dh_prev.values();
            for (std::size_t i = 0; i < n; ++i) {
                dac[i] = dhv[i] * zv[i] * (1.0 - cv[i] * cv[i]);
                dzg[i] = dhv[i] * (cv[i] - hp[i]) * zv[i] * (1.0 - zv[i]);
                dhp[i] = dhv[i] * (1.0 - zv[i]);
            }
        }

        Matrix drh = matmul(da_c, uc, false, true);
        Matrix da_r(dh.rows(), h_n);
        {
            auto drhv = drh.values();
            auto rv = r.values();
            auto hp = h_prev.values();
            auto dar = da_r.values();
            auto dhp = dh_prev.values();
            for (std::size_t i = 0; i < n; ++i) {
                dar[i] = drhv[i] * hp[i] * rv[i] * (1.0 - rv[i]);
                dhp[i] += drhv[i] * rv[i];
            }
        }

        const Matrix xt = time_slice(input_, t, channels_);
        matmul_add(dwc, xt, da_c, true, false);
        matmul_add(duc, rh, da_c, true, false);
        add_column_sums(dbc, da_c);
        matmul_add(dwz, xt, dz_gate, true, false);
        matmul_add(duz, h_prev, dz_gate, true, false);
        add_column_sums(dbz, dz_gate);
        matmul_add(dwr, xt, da_r, true, false);
        matmul_add(dur, h_prev, da_r, true, false);
        add_column_sums(dbr, da_r);

        matmul_add(dh_prev, dz_gate, uz, false, true);
        matmul_add(dh_prev, da_r, ur, false, true);

        if (need_input_grad) {
            Matrix dxt = matmul(dz_gate, wz, false, true);
            matmul_add(dxt, da_r, wr, false, true);
            matmul_add(dxt, da_c, wc, false, true);
            write_time_slice(dx, t, channels_, dxt);
        }
        dh = std::move(dh_prev);
    }

    grad_weights.set_zero();
    grad_recurrent.set_zero();
    grad_bias.set_zero();
    set_col_block(grad_weights, 0, dwz);
    set_col_block(grad_weights, h_n, dwr);
    set_col_block(grad_weights, 2 * h_n, dwc);
    set_col_block(grad_recurrent, 0, duz);
    set_col_block(grad_recurrent, h_n, dur);
    set_col_block(grad_recurrent, 2 * h_n, duc);
    set_col_block(grad_bias, 0, dbz);
    set_col_block(grad_bias, h_n, dbr);
    set_col_block(grad_bias, 2 * h_n, dbc);
    return dx;
}

void Gru::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".W", &weights, &grad_weights, 0.0});
    out.push_back({prefix + ".U", &recurrent, &grad_recurrent, 0.0});
    out.push_back({prefix + ".b", &bias, &grad_bias, 0.0});
}

// ----------------------------------------------------------------- Lstm ----

Lstm::Lstm(std::size_t channels, std::size_t hidden, std::size_t steps, bool reverse, double l2)
    : weights(channels, 4 * hidden),
      recurrent(hidden, 4 * hidden),
      bias(1, 4 * hidden),
      grad_weights(channels, 4 * hidden),
      grad_recurrent(hidden, 4 * hidden),
      grad_bias(1, 4 * hidden),
      channels_(channels),
      hidden_(hidden),
      steps_(steps),
      reverse_(reverse),
      l2_(l2) {
    if (channels == 0 || hidden == 0 || steps == 0)
        throw InvalidArgument("lstm dimensions must be positive");
}

void Lstm::init(Rng& rng) {
    glorot_uniform(weights, rng);
    glorot_uniform(recurrent, rng);
    // Forget gate opens at the start of training; a common stabilizer.
    for (std::size_t c = 0; c < hidden_; ++c) bias(0, c) = 1.0;
}

std::size_t Lstm::time_index(std::size_t step) const {
    return reverse_ ? steps_ - 1 - step : step;
}

Matrix Lstm::forward(const Matrix& x, bool training) {
    if (x.cols() != steps_ * channels_)
        throw ShapeMismatch("lstm forward: input width " + std::to_string(x.cols()) +
                            ", expected " + std::to_string(steps_ * channels_));
    const std::size_t h_n = hidden_;
    Matrix h(x.rows(), h_n), c(x.rows(), h_n);
    std::vector<Matrix> hs, cs, fs, is, gs, os;
    if (training) {
        hs.reserve(steps_ + 1);
        cs.reserve(steps_ + 1);
        hs.push_back(h);
        cs.push_back(c);
    }
    for (std::size_t s = 0; s < steps_; ++s) {
        Matrix a = matmul(time_slice(x, time_index(s), channels_), weights);
        matmul_add(a, h, recurrent);
        add_row_vector(a, bias);

        Matrix f(x.rows(), h_n), i(x.rows(), h_n), g(x.rows(), h_n), o(x.rows(), h_n);
        Matrix c_next(x.rows(), h_n), h_next(x.rows(), h_n);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double* ar = a.row(r);
            const double* cp = c.row(r);
            double* fr = f.row(r);
            double* ir = i.row(r);
            double* gr = g.row(r);
            double* orow = o.row(r);
            double* cn = c_next.row(r);
            double* hn = h_next.row(r);
            for (std::size_t k = 0; k < h_n; ++k) {
                fr[k] = sigmoid(ar[k]);
                ir[k] = sigmoid(ar[h_n + k]);
                gr[k] = std::tanh(ar[2 * h_n + k]);
                orow[k] = sigmoid(ar[3 * h_n + k]);
                cn[k] = fr[k] * cp[k] + ir[k] * gr[k];
                hn[k] = orow[k] * std::tanh(cn[k]);
            }
        }
        h = std::move(h_next);
        c = std::move(c_next);
        if (training) {
            hs.push_back(h);
            cs.push_back(c);
            fs.push_back(std::move(f));
            is.push_back(std::move(i));
            gs.push_back(std::move(g));
            os.push_back(std::move(o));
        }
    }
    if (training) {
        input_ = x;
        h_states_ = std::move(hs);
        c_states_ = std::move(cs);
        forget_ = std::move(fs);
        input_gate_ = std::move(is);
        cell_ = std::move(gs);
        output_gate_ = std::move(os);
    }
    return h;
}

Matrix Lstm::backward(const Matrix& grad_out, bool need_input_grad) {
    const std::size_t h_n = hidden_;
    grad_weights.set_zero();
    grad_recurrent.set_zero();
    grad_bias.set_zero();
    Matrix dx;
    if (need_input_grad) dx = Matrix(input_.rows(), steps_ * channels_);

    Matrix dh = grad_out;
    Matrix dc(grad_out.rows(), h_n);
    for (std::size_t s = steps_; s-- > 0;) {
        const Matrix& f = forget_[s];
        const Matrix& i = input_gate_[s];
        const Matrix& g = cell_[s];
        const Matrix& o = output_gate_[s];
        const Matrix& c_t = c_states_[s + 1];
        const Matrix& c_prev = c_states_[s];
        const Matrix& h_prev = h_states_[s];

        Matrix da(dh.rows(), 4 * h_n);
        for (std::size_t r = 0; r < dh.rows(); ++r) {
            const double* dhr = dh.row(r);
            double* dcr = dc.row(r);
            const double* fr = f.row(r);
            const double* ir = i.row(r);
            const double* gr = g.row(r);
            const double* orow = o.row(r);
            const double* ct = c_t.row(r);
            const double* cp = c_prev.row(r);
            double* dar = da.row(r);
            for (std::size_t k = 0; k < h_n; ++k) {
                const double tc = std::tanh(ct[k]);
                const double dct = dcr[k] + dhr[k] * orow[k] * (1.0 - tc * tc);
                const double dok = dhr[k] * tc;
                dar[k] = dct * cp[k] * fr[k] * (1.0 - fr[k]);
                dar[h_n + k] = dct * gr[k] * ir[k] * (1.0 - ir[k]);
                dar[2 * h_n + k] = dct * ir[k] * (1.0 - gr[k] * gr[k]);
                dar[3 * h_n + k] = dok * orow[k] * (1.0 - orow[k]);
                dcr[k] = dct * fr[k];
            }
        }

        const Matrix xt = time_slice(input_, time_index(s), channels_);
        matmul_add(grad_weights, xt, da, true, false);
        matmul_add(grad_recurrent, h_prev, da, true, false);
        add_column_sums(grad_bias, da);
        if (need_input_grad)
            write_time_slice(dx, time_index(s), channels_, matmul(da, weights, false, true));
        dh = matmul(da, recurrent, false, true);
    }
    return dx;
}

void Lstm::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".W", &weights, &grad_weights, l2_});
    out.push_back({prefix + ".U", &recurrent, &grad_recurrent, l2_});
    out.push_back({prefix + ".b", &bias, &grad_bias, 0.0});
}

// -------------------------------------------------------- Bidirectional ----

Bidirectional::Bidirectional(std::size_t channels, std::size_t hidden, std::size_t steps,
                             double l2)
    : hidden_(hidden),
      fwd_(std::make_unique<Lstm>(channels, hidden, steps, false, l2)),
      bwd_(std::make_unique<Lstm>(channels, hidden, steps, true, l2)) {}

void Bidirectional::init(Rng& rng) {
    fwd_->init(rng);
    bwd_->init(rng);
}

Matrix Bidirectional::forward(const Matrix& x, bool training) {
    Matrix a = fwd_->forward(x, training);
    Matrix b = bwd_->forward(x, training);
    return hconcat(a, b);
}

Matrix Bidirectional::backward(const Matrix& grad_out, bool need_input_grad) {
    Matrix gf = col_block(grad_out, 0, hidden_);
    Matrix gb = col_block(grad_out, hidden_, 2 * hidden_);
    Matrix dxf = fwd_->backward(gf, need_input_grad);
    Matrix dxb = bwd_->backward(gb, need_input_grad);
    if (!need_input_grad) return {};
    axpy(dxf, 1.0, dxb);
    return dxf;
}

void Bidirectional::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    fwd_->collect_params(prefix + ".fwd", out);
    bwd_->collect_params(prefix + ".bwd", out);
}

// ---------------------------------------------------------------- Model ----

Model::Model(ModelKind kind, std::uint64_t seed) : kind_(kind), seed_(seed) {
    Rng rng(seed);
    switch (kind) {
        case ModelKind::Mlp:
            layers_.push_back(std::make_unique<Dense>(kFlatLen, 64, Activation::Relu));
            layers_.push_back(std::make_unique<Dropout>(0.2, rng.next_u64()));
            layers_.push_back(std::make_unique<Dense>(64, 128, Activation::Softplus));
            layers_.push_back(std::make_unique<Dense>(128, 1, Activation::Sigmoid));
            break;
        case ModelKind::Cnn:
            layers_.push_back(std::make_unique<Conv1d>(20, kVocabSize, 32, 3, Activation::Relu));
            layers_.push_back(std::make_unique<Conv1d>(18, 32, 64, 3, Activation::Relu));
            layers_.push_back(std::make_unique<Dense>(16 * 64, 64, Activation::Relu));
            layers_.push_back(std::make_unique<Dense>(64, 1, Activation::Sigmoid));
            break;
        case ModelKind::Rnn:
            layers_.push_back(std::make_unique<SimpleRnn>(kVocabSize, 32, 20));
            layers_.push_back(std::make_unique<Dense>(32, 1, Activation::Sigmoid));
            break;
        case ModelKind::Gru:
            layers_.push_back(std::make_unique<Gru>(kVocabSize, 32, 20));
            layers_.push_back(std::make_unique<Dense>(32, 1, Activation::Sigmoid));
            break;
        case ModelKind::BiLstm:
            layers_.push_back(std::make_unique<Bidirectional>(kVocabSize, 64, 20, 0.002));
            layers_.push_back(std::make_unique<Dropout>(0.2, rng.next_u64()));
            layers_.push_back(std::make_unique<Dense>(128, 1, Activation::Sigmoid));
            break;
        default:
            throw UnknownKind("build_model: \"" + std::string(to_string(kind)) +
                              "\" is not a neural kind");
    }
    for (auto& layer : layers_) layer->init(rng);
}

Model build_model(ModelKind kind, std::uint64_t seed) { return Model(kind, seed); }

Matrix Model::forward(const Matrix& x, bool training) {
    Matrix out = x;
    for (auto& layer : layers_) out = layer->forward(out, training);
    return out;
}

void Model::backward(const Matrix& grad_out) {
    Matrix g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, i > 0);
}

std::vector<ParamRef> Model::params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect_params(std::string(layers_[i]->type_name()) + std::to_string(i), out);
    return out;
}

std::size_t Model::param_count() {
    std::size_t n = 0;
    for (const auto& p : params()) n += p.value->size();
    return n;
}

// ------------------------------------------------------------- training ----

Matrix to_input_matrix(std::span<const EncodedName> names) {
    Matrix x(names.size(), kFlatLen);
    for (std::size_t i = 0; i < names.size(); ++i) {
        double* row = x.row(i);
        for (std::size_t j = 0; j < kFlatLen; ++j) row[j] = names[i].cells[j];
    }
    return x;
}

std::vector<double> label_vector(const Corpus& corpus) {
    std::vector<double> y(corpus.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = corpus.records[i].gender;
    return y;
}

std::vector<double> predict_proba(Model& model, std::span<const EncodedName> names) {
    std::vector<double> out;
    out.reserve(names.size());
    const std::size_t batch = 256;
    for (std::size_t start = 0; start < names.size(); start += batch) {
        const std::size_t end = std::min(names.size(), start + batch);
        Matrix x = to_input_matrix(names.subspan(start, end - start));
        Matrix p = model.forward(x, false);
        for (std::size_t i = 0; i < p.rows(); ++i) out.push_back(p(i, 0));
    }
    return out;
}

double predict_proba(Model& model, const EncodedName& name) {
    return predict_proba(model, std::span<const EncodedName>(&name, 1)).front();
}

double accuracy(std::span<const double> p, std::span<const double> y) {
    if (p.size() != y.size()) throw LengthMismatch("accuracy: size mismatch");
    if (p.empty()) throw EmptyBatch("accuracy: empty batch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if ((p[i] >= 0.5 ? 1.0 : 0.0) == y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(p.size());
}

std::string TrainHistory::to_csv() const {
    std::string out = "epoch,train_loss,val_loss,train_acc,val_acc\n";
    char buf[160];
    for (std::size_t i = 0; i < epochs(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g\n", i + 1, train_loss[i],
                      val_loss[i], train_acc[i], val_acc[i]);
        out += buf;
    }
    return out;
}

namespace {

double l2_penalty(std::span<const ParamRef> params) {
    double total = 0.0;
    for (const auto& p : params) {
        if (p.l2 <= 0.0) continue;
        double sq = 0.0;
        for (double v : p.value->values()) sq += v * v;
        total += p.l2 * sq;
    }
    return total;
}

struct EvalResult {
    double loss = 0.0;
    double acc = 0.0;
};

EvalResult evaluate_bce(Model& model, const Matrix& x, std::span<const double> y,
                        std::size_t batch_size, double penalty) {
    const std::size_t n = x.rows();
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::vector<std::size_t> idx(batch_size);
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t bn = std::min(batch_size, n - start);
        idx.resize(bn);
        std::iota(idx.begin(), idx.end(), start);
        Matrix xb = gather_rows(x, idx);
        Matrix p = model.forward(xb, false);
        auto bce = bce_loss(std::span<const double>(p.data(), bn), y.subspan(start, bn));
        loss_sum += bce.loss * static_cast<double>(bn);
        for (std::size_t i = 0; i < bn; ++i)
            if ((p(i, 0) >= 0.5 ? 1.0 : 0.0) == y[start + i]) ++correct;
    }
    return {loss_sum / static_cast<double>(n) + penalty,
            static_cast<double>(correct) / static_cast<double>(n)};
}

}  // namespace

TrainHistory train(Model& model, const Matrix& x_train, std::span<const double> y_train,
                   const Matrix& x_val, std::span<const double> y_val,
                   const TrainConfig& config) {
    if (x_train.rows() == 0) throw EmptyPartition("train: empty training partition");
    if (x_val.rows() == 0) throw EmptyPartition("train: empty validation partition");
    if (y_train.size() != x_train.rows() || y_val.size() != x_val.rows())
        throw LengthMismatch("train: feature and label counts differ");
    if (config.lr <= 0.0 || config.batch_size == 0 || config.max_epochs == 0)
        throw InvalidArgument("train: lr, batch_size, and max_epochs must be positive");

    auto params = model.params();
    std::vector<AdamState> states;
    states.reserve(params.size());
    for (const auto& p : params) states.emplace_back(p.value->size());

    Rng rng(config.seed);
    const std::size_t n = x_train.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainHistory hist;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Matrix> best;
    std::size_t since_best = 0;
    const std::size_t stop_after = std::max<std::size_t>(config.patience, 1);

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t bn = std::min(config.batch_size, n - start);
            const std::span<const std::size_t> idx(order.data() + start, bn);
            Matrix xb = gather_rows(x_train, idx);
            std::vector<double> yb(bn);
            for (std::size_t i = 0; i < bn; ++i) yb[i] = y_train[idx[i]];

            Matrix p = model.forward(xb, true);
            auto bce = bce_loss(std::span<const double>(p.data(), bn), yb);
            const double batch_loss = bce.loss + l2_penalty(params);
            if (!std::isfinite(batch_loss))
                throw DivergedLoss("non-finite training loss at epoch " + std::to_string(epoch + 1));
            loss_sum += batch_loss * static_cast<double>(bn);
            for (std::size_t i = 0; i < bn; ++i)
                if ((p(i, 0) >= 0.5 ? 1.0 : 0.0) == yb[i]) ++correct;

            model.backward(Matrix(bn, 1, std::move(bce.grad)));
            for (std::size_t k = 0; k < params.size(); ++k) {
                auto& pr = params[k];
                if (pr.l2 > 0.0) axpy(*pr.grad, 2.0 * pr.l2, *pr.value);
                adam_step(pr.value->values(), pr.grad->values(), states[k], config.lr);
            }
        }

        const EvalResult val = evaluate_bce(model, x_val, y_val, config.batch_size,
                                            l2_penalty(params));
        if (!std::isfinite(val.loss))
            throw DivergedLoss("non-finite validation loss at epoch " + std::to_string(epoch + 1));
        hist.train_loss.push_back(loss_sum / static_cast<double>(n));
        hist.val_loss.push_back(val.loss);
        hist.train_acc.push_back(static_cast<double>(correct) / static_cast<double>(n));
        hist.val_acc.push_back(val.acc);

        if (val.loss < best_val) {
            best_val = val.loss;
            hist.best_epoch = epoch;
            since_best = 0;
            best.clear();
            for (const auto& p : params) best.push_back(*p.value);
        } else if (++since_best >= stop_after) {
            break;
        }
    }

    for (std::size_t k = 0; k < params.size(); ++k) *params[k].value = best[k];
    return hist;
}

TrainHistory train(Model& model, const SplitCorpus& split, const TrainConfig& config) {
    const Matrix x_train = to_input_matrix(encode_corpus(split.train));
    const Matrix x_val = to_input_matrix(encode_corpus(split.validation));
    return train(model, x_train, label_vector(split.train), x_val, label_vector(split.validation),
                 config);
}

}  // namespace nomina
