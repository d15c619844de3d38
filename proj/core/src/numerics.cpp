#include "nomina/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace nomina {

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double activate(Activation kind, double x) {
    switch (kind) {
        case Activation::Linear: return x;
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Softplus: return softplus(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Tanh: return std::tanh(x);
    }
    return x;
}

Matrix apply_activation(Activation kind, const Matrix& x) {
    Matrix out = x;
    apply_activation_in_place(kind, out);
    return out;
}

void apply_activation_in_place(Activation kind, Matrix& x) {
    if (kind == Activation::Linear) return;
    for (double& v : x.values()) v = activate(kind, v);
}

double activation_derivative_from_output(Activation kind, double a) {
    switch (kind) {
        case Activation::Linear: return 1.0;
        case Activation::Relu: return a > 0.0 ? 1.0 : 0.0;
        case Activation::Softplus: return 1.0 - std::exp(-a);  // = sigmoid(z)
        case Activation::Sigmoid: return a * (1.0 - a);
        case Activation::Tanh: return 1.0 - a * a;
    }
    return 1.0;
}

void scale_by_activation_derivative(Activation kind, const Matrix& output, Matrix& grad) {
    if (kind == Activation::Linear) return;
    if (!output.same_shape(grad))
        throw ShapeMismatch("activation backward: output and gradient shapes differ");
    const auto out = output.values();
    auto g = grad.values();
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] *= activation_derivative_from_output(kind, out[i]);
}

BceResult bce_loss(std::span<const double> p, std::span<const double> y) {
    if (p.size() != y.size())
        throw LengthMismatch("bce_loss: " + std::to_string(p.size()) + " probabilities vs " +
                             std::to_string(y.size()) + " labels");
    if (p.empty()) throw EmptyBatch("bce_loss: empty batch");

    const double n = static_cast<double>(p.size());
    const double lo = kBceClip, hi = 1.0 - kBceClip;
    BceResult out;
    out.grad.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool clipped = p[i] < lo || p[i] > hi;
        const double pc = std::clamp(p[i], lo, hi);
        out.loss -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
        out.grad[i] = clipped ? 0.0 : (-y[i] / pc + (1.0 - y[i]) / (1.0 - pc)) / n;
    }
    out.loss /= n;
    return out;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& config) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw ShapeMismatch("adam_step: parameter, gradient, and state sizes differ");
    for (double g : grads)
        if (!std::isfinite(g)) throw NonFiniteGradient("adam_step: non-finite gradient");

    ++state.step_count;
    const double b1 = config.beta1, b2 = config.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = b1 * m + (1.0 - b1) * grads[i];
        v = b2 * v + (1.0 - b2) * grads[i] * grads[i];
        params[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + config.epsilon);
    }
}

std::vector<double> finite_diff_grad(const std::function<double()>& f, std::span<double> x,
                                     double h) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = f();
        x[i] = saved - h;
        const double fm = f();
        x[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NonFiniteValue("finite_diff_grad: f is non-finite near coordinate " +
                                 std::to_string(i));
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double gradient_relative_error(std::span<const double> analytic,
                               std::span<const double> numeric) {
    if (analytic.size() != numeric.size())
        throw LengthMismatch("gradient_relative_error: size mismatch");
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double d = analytic[i] - numeric[i];
        diff += d * d;
        na += analytic[i] * analytic[i];
        nn += numeric[i] * numeric[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-12);
}

}  // namespace nomina
