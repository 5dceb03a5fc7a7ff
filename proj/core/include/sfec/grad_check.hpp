#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sfec/tensor.hpp"

namespace sfec {

template <typename T>
T relative_error(T a, T b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), T(1e-8)});
}

template <typename T>
struct GradCheckResult {
    T max_rel = 0;        // worst relative error over all checked coordinates
    std::size_t param = 0;  // which parameter tensor it occurred in
    std::size_t index = 0;  // flat element index within that tensor
    T analytic = 0;
    T numeric = 0;
};

/// Compares reverse-mode gradients against central finite differences.
/// `loss_fn` must rebuild the scalar loss from the current parameter values on
/// every call; params are leaf tensors with requires_grad set. Copies share
/// storage, so perturbing the copies perturbs what loss_fn reads. Perturbed
/// evaluations run with the tape disabled.
template <typename T, typename LossFn>
GradCheckResult<T> grad_check(LossFn&& loss_fn, std::vector<Tensor<T>> params, T eps = T(1e-5)) {
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i].requires_grad())
            throw std::invalid_argument("grad_check: parameter " + std::to_string(i) +
                                        " does not require grad");

    for (auto& p : params) p.zero_grad();
    Tensor<T> loss = loss_fn();
    if (loss.size() != 1)
        throw std::invalid_argument("grad_check: loss " + shape_str(loss.shape()) +
                                    " is not a scalar");
    backward(loss);

    std::vector<std::vector<T>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(p.node()->grad);

    GradCheckResult<T> res;
    NoGradGuard ng;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& vals = params[pi].mutable_values();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const T saved = vals[i];
            vals[i] = saved + eps;
            const T up = loss_fn().value();
            vals[i] = saved - eps;
            const T down = loss_fn().value();
            vals[i] = saved;
            const T numeric = (up - down) / (2 * eps);
            const T rel = relative_error(analytic[pi][i], numeric);
            if (rel > res.max_rel) {
                res.max_rel = rel;
                res.param = pi;
                res.index = i;
                res.analytic = analytic[pi][i];
                res.numeric = numeric;
            }
        }
    }
    return res;
}

}  // namespace sfec
