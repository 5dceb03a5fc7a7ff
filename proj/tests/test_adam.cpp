#include <doctest.h>

#include <sfec/adam.hpp>
#include <sfec/ops.hpp>

#include <cmath>
#include <limits>
#include <vector>

using namespace sfec;

namespace {

// one backward pass leaves grad = weight on each element of t
template <typename T>
void seed_grad(Tensor<T>& t, T weight) {
    backward(mul_scalar(sum_all(t), weight));
}

}  // namespace

TEST_CASE("first step with unit gradient moves by almost exactly lr") {
    Tensor<double> theta = Tensor<double>::scalar(0.3);
    theta.set_requires_grad(true);
    ParamList<double> params = {{"theta", &theta}};
    Adam<double> adam(0.001);

    seed_grad(theta, 1.0);
    adam.step(params);
    adam.zero_grad(params);

    // m-hat = v-hat = 1 after bias correction, so the update is lr/(1+eps)
    const double expected = 0.3 - 0.001 / (1.0 + 1e-8);
    CHECK(theta.value() == doctest::Approx(expected).epsilon(1e-14));
    CHECK(adam.t == 1);
}

TEST_CASE("zero gradients leave parameters untouched") {
    Tensor<double> w({3}, {1.0, -2.0, 0.5});
    w.set_requires_grad(true);
    ParamList<double> params = {{"w", &w}};
    Adam<double> adam(0.01);
    for (int s = 0; s < 5; ++s) adam.step(params);  // grads stay at zero
    CHECK(w.values() == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("lr zero is the identity even with live gradients") {
    Tensor<double> w({2}, {4.0, -1.0});
    w.set_requires_grad(true);
    ParamList<double> params = {{"w", &w}};
    Adam<double> adam(0.0);
    for (int s = 0; s < 3; ++s) {
        seed_grad(w, 2.5);
        adam.step(params);
        adam.zero_grad(params);
    }
    CHECK(w.values() == std::vector<double>{4.0, -1.0});
}

TEST_CASE("identical gradient sequences give identical trajectories") {
    auto run = [] {
        Tensor<double> w({2}, {0.7, -0.4});
        w.set_requires_grad(true);
        ParamList<double> params = {{"w", &w}};
        Adam<double> adam(0.003);
        std::vector<double> trace;
        for (int s = 0; s < 10; ++s) {
            seed_grad(w, 1.0 + 0.1 * s);
            adam.step(params);
            adam.zero_grad(params);
            trace.push_back(w.at(0));
            trace.push_back(w.at(1));
        }
        return trace;
    };
    CHECK(run() == run());
}

TEST_CASE("adam follows the sign of a persistent gradient") {
    Tensor<double> w = Tensor<double>::scalar(1.0);
    w.set_requires_grad(true);
    ParamList<double> params = {{"w", &w}};
    Adam<double> adam(0.01);
    for (int s = 0; s < 100; ++s) {
        seed_grad(w, 3.0);
        adam.step(params);
        adam.zero_grad(params);
    }
    // constant positive gradient walks the parameter down about lr per step
    CHECK(w.value() == doctest::Approx(0.0).epsilon(0.02));
}

TEST_CASE("non-finite gradients abort the step with diagnostics") {
    Tensor<double> w({2}, {1.0, 2.0});
    w.set_requires_grad(true);
    ParamList<double> params = {{"w", &w}};
    Adam<double> adam(0.01);
    seed_grad(w, 1.0);
    w.node()->grad[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(adam.step(params), doctest::Contains("w"), std::runtime_error);
    CHECK(w.values() == std::vector<double>{1.0, 2.0});  // aborted before any update
    CHECK(adam.t == 0);

    w.zero_grad();
    seed_grad(w, 1.0);
    w.node()->grad[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(adam.step(params), std::runtime_error);
}

TEST_CASE("untrainable parameters are rejected") {
    Tensor<double> w({2}, {1.0, 2.0});
    ParamList<double> params = {{"w", &w}};
    Adam<double> adam(0.01);
    CHECK_THROWS_WITH_AS(adam.step(params), doctest::Contains("not trainable"),
                         std::invalid_argument);
}
