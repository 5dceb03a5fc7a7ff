#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfec/layers.hpp"
#include "sfec/tensor.hpp"

namespace sfec {

/// Bias-corrected Adam over a parameter registry. Gradients are read from the
/// leaf accumulators that backward() filled; call zero_grad afterwards to
/// start the next batch clean.
template <typename T>
struct Adam {
    T lr;
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
    long t = 0;
    std::vector<std::vector<T>> m, v;

    explicit Adam(T lr) : lr(lr) {}

    void step(const ParamList<T>& params) {
        if (m.empty()) {
            m.resize(params.size());
            v.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                m[i].assign(params[i].tensor->size(), T(0));
                v[i].assign(params[i].tensor->size(), T(0));
            }
        }
        if (m.size() != params.size())
            throw std::invalid_argument("adam: registry size changed from " +
                                        std::to_string(m.size()) + " to " +
                                        std::to_string(params.size()));

        for (const auto& p : params) {
            if (!p.tensor->taped())
                throw std::invalid_argument("adam: parameter " + p.name + " is not trainable");
            for (std::size_t j = 0; j < p.tensor->node()->grad.size(); ++j)
                if (!std::isfinite(p.tensor->node()->grad[j]))
                    throw std::runtime_error("adam: non-finite gradient in " + p.name +
                                             " at element " + std::to_string(j) +
                                             "; step aborted before touching parameters");
        }

        ++t;
        const T c1 = T(1) - std::pow(beta1, T(t));
        const T c2 = T(1) - std::pow(beta2, T(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& x = params[i].tensor->mutable_values();
            const auto& g = params[i].tensor->node()->grad;
            if (g.size() != x.size() || m[i].size() != x.size())
                throw std::invalid_argument("adam: parameter " + params[i].name +
                                            " changed size mid-run");
            for (std::size_t j = 0; j < x.size(); ++j) {
                m[i][j] = beta1 * m[i][j] + (T(1) - beta1) * g[j];
                v[i][j] = beta2 * v[i][j] + (T(1) - beta2) * g[j] * g[j];
                x[j] -= lr * (m[i][j] / c1) / (std::sqrt(v[i][j] / c2) + eps);
            }
        }
    }

    void zero_grad(const ParamList<T>& params) {
        for (const auto& p : params) p.tensor->zero_grad();
    }
};

}  // namespace sfec
