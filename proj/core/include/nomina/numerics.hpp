#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nomina/error.hpp"
#include "nomina/matrix.hpp"

namespace nomina {

enum class Activation { Linear, Relu, Softplus, Sigmoid, Tanh };

/// Numerically stable logistic function.
double sigmoid(double x);

/// ln(1 + eˣ) computed as max(x,0) + ln1p(e^−|x|), overflow-free.
double softplus(double x);

double activate(Activation kind, double x);

Matrix apply_activation(Activation kind, const Matrix& x);
void apply_activation_in_place(Activation kind, Matrix& x);

/// f'(z) recovered from a = f(z). Every supported activation admits this:
/// relu uses the sign of a, sigmoid a(1−a), tanh 1−a², softplus 1−e^−a.
double activation_derivative_from_output(Activation kind, double a);

/// In-place backward step dL/da → dL/dz for an elementwise activation whose
/// forward output is `output`.
void scale_by_activation_derivative(Activation kind, const Matrix& output, Matrix& grad);

/// Probabilities are clipped to [kBceClip, 1−kBceClip] before the logs.
inline constexpr double kBceClip = 1e-7;

struct BceResult {
    double loss = 0.0;
    std::vector<double> grad;  // dL/dpᵢ; zero where the clip binds
};

/// Mean binary cross-entropy −(1/N) Σ [y ln p + (1−y) ln(1−p)].
BceResult bce_loss(std::span<const double> p, std::span<const double> y);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Per-tensor Adam accumulators. step_count advances once per adam_step call,
/// so every tensor of a model keeps its own state in lockstep.
struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    long long step_count = 0;

    explicit AdamState(std::size_t n) : first_moment(n, 0.0), second_moment(n, 0.0) {}
};

/// Bias-corrected Adam update, in place on params.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& config = {});

/// Central-difference gradient of f with respect to x. f is evaluated while
/// each coordinate of x is nudged in place by ±h and then restored, so x may
/// alias storage that f reads (e.g. live layer parameters).
std::vector<double> finite_diff_grad(const std::function<double()>& f, std::span<double> x,
                                     double h = 1e-5);

/// ‖a − b‖₂ / max(‖a‖₂ + ‖b‖₂, 1e-12), the gradient-check error measure.
double gradient_relative_error(std::span<const double> analytic,
                               std::span<const double> numeric);

}  // namespace nomina
