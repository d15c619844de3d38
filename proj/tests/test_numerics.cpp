#include <cmath>
#include <vector>

#include "doctest.h"
#include "nomina/numerics.hpp"

using namespace nomina;

TEST_CASE("sigmoid and softplus are stable at extreme inputs") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) == doctest::Approx(0.0));
    CHECK(std::isfinite(softplus(800.0)));
    CHECK(softplus(800.0) == 800.0);  // identity regime
    CHECK(softplus(50.0) == 50.0);
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(softplus(-50.0) == doctest::Approx(std::exp(-50.0)));
}

TEST_CASE("activation derivatives are recoverable from forward outputs") {
    const double z = 0.3;
    CHECK(activation_derivative_from_output(Activation::Linear, 123.0) == 1.0);
    CHECK(activation_derivative_from_output(Activation::Relu, 2.5) == 1.0);
    CHECK(activation_derivative_from_output(Activation::Relu, 0.0) == 0.0);
    CHECK(activation_derivative_from_output(Activation::Tanh, std::tanh(z)) ==
          doctest::Approx(1.0 - std::tanh(z) * std::tanh(z)).epsilon(1e-14));
    CHECK(activation_derivative_from_output(Activation::Sigmoid, sigmoid(z)) ==
          doctest::Approx(sigmoid(z) * (1.0 - sigmoid(z))).epsilon(1e-14));
    // d/dz softplus(z) = sigmoid(z) and also 1 - exp(-softplus(z))
    CHECK(activation_derivative_from_output(Activation::Softplus, softplus(z)) ==
          doctest::Approx(sigmoid(z)).epsilon(1e-14));
}

TEST_CASE("binary cross-entropy matches the hand-computed mean") {
    const std::vector<double> p = {0.9, 0.2};
    const std::vector<double> y = {1.0, 0.0};
    const BceResult r = bce_loss(p, y);
    CHECK(r.loss == doctest::Approx(-(std::log(0.9) + std::log(0.8)) / 2.0).epsilon(1e-14));
    REQUIRE(r.grad.size() == 2);
    CHECK(r.grad[0] == doctest::Approx(-(1.0 / 0.9) / 2.0).epsilon(1e-14));
    CHECK(r.grad[1] == doctest::Approx((1.0 / 0.8) / 2.0).epsilon(1e-14));
}

TEST_CASE("binary cross-entropy is symmetric under label and probability flips") {
    const std::vector<double> p = {0.9, 0.2, 0.61, 0.03};
    const std::vector<double> y = {1.0, 0.0, 1.0, 0.0};
    std::vector<double> pf(p.size()), yf(y.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        pf[i] = 1.0 - p[i];
        yf[i] = 1.0 - y[i];
    }
    CHECK(bce_loss(p, y).loss == doctest::Approx(bce_loss(pf, yf).loss).epsilon(1e-14));
}

TEST_CASE("probability clipping bounds the loss and zeroes the bound gradient") {
    const std::vector<double> p = {0.0};
    const std::vector<double> y = {1.0};
    const BceResult r = bce_loss(p, y);
    CHECK(r.loss == doctest::Approx(-std::log(1e-7)).epsilon(1e-12));
    CHECK(r.grad[0] == 0.0);  // the loss is flat where the clip binds

    const std::vector<double> fifty(8, 0.5);
    const std::vector<double> labels = {1, 0, 0, 1, 1, 1, 0, 0};
    CHECK(bce_loss(fifty, labels).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("binary cross-entropy validates its inputs") {
    CHECK_THROWS_AS(bce_loss(std::vector<double>{0.5}, std::vector<double>{1.0, 0.0}),
                    LengthMismatch);
    CHECK_THROWS_AS(bce_loss(std::vector<double>{}, std::vector<double>{}), EmptyBatch);
}

TEST_CASE("adam follows the bias-corrected update rule for two hand-checked steps") {
    std::vector<double> w = {1.0};
    AdamState state(1);
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;

    // step 1, gradient 0.5
    double m = 0.1 * 0.5;
    double v = 0.001 * 0.25;
    double expected = 1.0 - lr * (m / (1 - b1)) / (std::sqrt(v / (1 - b2)) + eps);
    adam_step(w, std::vector<double>{0.5}, state, lr);
    CHECK(w[0] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(state.step_count == 1);

    // step 2, gradient 0.25
    m = b1 * m + 0.1 * 0.25;
    v = b2 * v + 0.001 * 0.0625;
    expected -= lr * (m / (1 - b1 * b1)) / (std::sqrt(v / (1 - b2 * b2)) + eps);
    adam_step(w, std::vector<double>{0.25}, state, lr);
    CHECK(w[0] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(state.step_count == 2);
}

TEST_CASE("adam leaves parameters exactly unchanged under zero gradients") {
    std::vector<double> w = {1.5, -2.0, 0.25};
    AdamState state(3);
    adam_step(w, std::vector<double>{0.0, 0.0, 0.0}, state, 0.1);
    CHECK(w[0] == 1.5);
    CHECK(w[1] == -2.0);
    CHECK(w[2] == 0.25);
}

TEST_CASE("adam rejects non-finite gradients") {
    std::vector<double> w = {1.0};
    AdamState state(1);
    CHECK_THROWS_AS(adam_step(w, std::vector<double>{std::nan("")}, state, 0.1),
                    NonFiniteGradient);
}

TEST_CASE("finite differences recover a known gradient") {
    std::vector<double> x = {2.0, -1.0};
    const auto f = [&] { return x[0] * x[0] + 3.0 * x[1]; };
    const std::vector<double> g = finite_diff_grad(f, x);
    CHECK(g[0] == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(x[0] == 2.0);  // nudges are restored
    CHECK(x[1] == -1.0);
}

TEST_CASE("gradient relative error behaves as a scaled distance") {
    const std::vector<double> a = {1.0, 2.0}, b = {1.0, 2.0};
    CHECK(gradient_relative_error(a, b) == 0.0);
    const std::vector<double> c = {1.0, 2.0 + 1e-6};
    CHECK(gradient_relative_error(a, c) > 0.0);
    CHECK(gradient_relative_error(a, c) < 1e-6);
}
