#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sfec/ops.hpp"
#include "sfec/tensor.hpp"

namespace sfec {

// Parameter registry entries point at the owning layer's members so that
// set_requires_grad / optimizer updates act on the tensors the forward pass
// actually reads.
template <typename T>
struct NamedParam {
    std::string name;
    Tensor<T>* tensor;
};

template <typename T>
using ParamList = std::vector<NamedParam<T>>;

template <typename T>
void mark_trainable(const ParamList<T>& params) {
    for (const auto& p : params)
        if (!p.tensor->taped()) p.tensor->set_requires_grad(true);
}

// --- loss -------------------------------------------------------------------

/// loss = -log softmax(logits)[label], stabilized through log-sum-exp.
template <typename T>
Tensor<T> cross_entropy_logits(const Tensor<T>& logits, std::size_t label) {
    if (logits.rank() != 1 || logits.size() < 2)
        throw std::invalid_argument("cross_entropy: logits must be a vector of at least 2 classes, got " +
                                    shape_str(logits.shape()));
    const std::size_t classes = logits.size();
    if (label >= classes)
        throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                    " out of range for " + std::to_string(classes) + " classes");
    const auto& z = logits.values();
    T mx = z[0];
    for (T v : z) mx = std::max(mx, v);
    T sum = 0;
    std::vector<T> probs(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        probs[c] = std::exp(z[c] - mx);
        sum += probs[c];
    }
    for (T& p : probs) p /= sum;
    const T loss = std::log(sum) + mx - z[label];
    Tensor<T> y = Tensor<T>::scalar(loss);
    detail::tape_op(y, "cross_entropy", {logits}, [&](const auto& parents) {
        return [parents, probs, label](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t c = 0; c < probs.size(); ++c)
                    p->grad[c] += g[0] * (probs[c] - (c == label ? T(1) : T(0)));
        };
    });
    return y;
}

// --- batchnorm (fused primitive) --------------------------------------------

/// Channel-wise affine normalization of x [C,T] with the given per-channel
/// statistics. When stats_from_batch is set, the statistics are understood to
/// be the biased mean/variance of x itself along the time axis and the
/// backward pass differentiates through them; otherwise they are constants
/// (eval mode with running statistics).
template <typename T>
Tensor<T> batchnorm1d(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                      const std::vector<T>& mean, const std::vector<T>& var, T eps,
                      bool stats_from_batch) {
    if (x.rank() != 2)
        throw std::invalid_argument("batchnorm: expects [channels,T], got " + shape_str(x.shape()));
    const std::size_t chans = x.dim(0), tlen = x.dim(1);
    if (gamma.size() != chans || beta.size() != chans || mean.size() != chans || var.size() != chans)
        throw std::invalid_argument("batchnorm: parameter size does not match " +
                                    std::to_string(chans) + " channels");

    const auto& xv = x.values();
    std::vector<T> out(xv.size());
    std::vector<T> inv_std(chans);
    for (std::size_t c = 0; c < chans; ++c) {
        inv_std[c] = T(1) / std::sqrt(var[c] + eps);
        const T g = gamma.values()[c], b = beta.values()[c], m = mean[c], is = inv_std[c];
        for (std::size_t t = 0; t < tlen; ++t) out[c * tlen + t] = g * (xv[c * tlen + t] - m) * is + b;
    }
    Tensor<T> y(x.shape(), std::move(out));

    auto xdata = x.storage();
    auto gdata = gamma.storage();
    detail::tape_op(y, "batchnorm", {x, gamma, beta}, [&](const auto& parents) {
        return [parents, xdata, gdata, mean, inv_std, chans, tlen,
                stats_from_batch](const std::vector<T>& g) {
            const auto& px = parents[0];
            const auto& pg = parents[1];
            const auto& pb = parents[2];
            const T n = static_cast<T>(tlen);
            for (std::size_t c = 0; c < chans; ++c) {
                const T* xrow = xdata->data() + c * tlen;
                const T* grow = g.data() + c * tlen;
                const T gam = (*gdata)[c], m = mean[c], is = inv_std[c];
                T sum_g = 0, sum_gx = 0;  // sums of grad and grad*xhat over time
                for (std::size_t t = 0; t < tlen; ++t) {
                    sum_g += grow[t];
                    sum_gx += grow[t] * (xrow[t] - m) * is;
                }
                if (pb) pb->grad[c] += sum_g;
                if (pg) pg->grad[c] += sum_gx;
                if (px) {
                    T* dx = px->grad.data() + c * tlen;
                    if (stats_from_batch) {
                        for (std::size_t t = 0; t < tlen; ++t) {
                            const T xhat = (xrow[t] - m) * is;
                            dx[t] += gam * is / n * (n * grow[t] - sum_g - xhat * sum_gx);
                        }
                    } else {
                        for (std::size_t t = 0; t < tlen; ++t) dx[t] += gam * is * grow[t];
                    }
                }
            }
        };
    });
    return y;
}

// --- layers -----------------------------------------------------------------

template <typename T>
struct Dense {
    Tensor<T> W;  // [out, in]
    Tensor<T> b;  // [out]

    Dense() = default;
    Dense(std::size_t out, std::size_t in, std::mt19937_64& rng) {
        const T bound = std::sqrt(T(1) / static_cast<T>(in));
        W = Tensor<T>::uniform(Shape{out, in}, -bound, bound, rng);
        b = Tensor<T>(Shape{out});
    }

    Tensor<T> forward(const Tensor<T>& x) const { return add(matmul(W, x), b); }

    void collect(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".W", &W});
        out.push_back({prefix + ".b", &b});
    }
};

enum class Padding { valid, same };

template <typename T>
struct Conv1D {
    Tensor<T> kernels;  // [out_ch, in_ch, width]
    Tensor<T> bias;     // [out_ch]
    Padding padding = Padding::valid;

    Conv1D() = default;
    // use_bias=false suits convolutions feeding a batchnorm, which cancels any
    // per-channel constant and would leave the bias gradient identically zero
    Conv1D(std::size_t out_ch, std::size_t in_ch, std::size_t width, Padding pad,
           std::mt19937_64& rng, bool use_bias = true)
        : padding(pad) {
        const T bound = std::sqrt(T(1) / static_cast<T>(in_ch * width));
        kernels = Tensor<T>::uniform(Shape{out_ch, in_ch, width}, -bound, bound, rng);
        if (use_bias) bias = Tensor<T>(Shape{out_ch});
    }

    Tensor<T> forward(const Tensor<T>& x) const {
        if (padding == Padding::same) {
            const std::size_t w = kernels.dim(2);
            const std::size_t left = (w - 1) / 2;
            return conv1d_valid(pad_last(x, left, w - 1 - left), kernels, bias);
        }
        return conv1d_valid(x, kernels, bias);
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".kernels", &kernels});
        if (bias.defined()) out.push_back({prefix + ".bias", &bias});
    }
};

template <typename T>
struct BatchNorm1D {
    Tensor<T> gamma, beta;              // trainable
    Tensor<T> running_mean, running_var;  // buffers, not optimized
    T eps = T(1e-5);
    T momentum = T(0.1);

    BatchNorm1D() = default;
    explicit BatchNorm1D(std::size_t channels) {
        gamma = Tensor<T>::full(Shape{channels}, T(1));
        beta = Tensor<T>(Shape{channels});
        running_mean = Tensor<T>(Shape{channels});
        running_var = Tensor<T>::full(Shape{channels}, T(1));
    }

    /// Train mode normalizes with the biased per-channel statistics of this
    /// input and folds them into the running estimates; eval mode uses the
    /// running estimates as constants.
    Tensor<T> forward(const Tensor<T>& x, bool train) {
        const std::size_t chans = gamma.size();
        if (train) {
            const std::size_t tlen = x.dim(1);
            const auto& xv = x.values();
            std::vector<T> mu(chans, T(0)), var(chans, T(0));
            for (std::size_t c = 0; c < chans; ++c) {
                const T* row = xv.data() + c * tlen;
                for (std::size_t t = 0; t < tlen; ++t) mu[c] += row[t];
                mu[c] /= static_cast<T>(tlen);
                for (std::size_t t = 0; t < tlen; ++t) {
                    const T d = row[t] - mu[c];
                    var[c] += d * d;
                }
                var[c] /= static_cast<T>(tlen);
            }
            auto& rm = running_mean.mutable_values();
            auto& rv = running_var.mutable_values();
            for (std::size_t c = 0; c < chans; ++c) {
                rm[c] = (T(1) - momentum) * rm[c] + momentum * mu[c];
                rv[c] = (T(1) - momentum) * rv[c] + momentum * var[c];
            }
            return batchnorm1d(x, gamma, beta, mu, var, eps, true);
        }
        return batchnorm1d(x, gamma, beta, running_mean.values(), running_var.values(), eps, false);
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".gamma", &gamma});
        out.push_back({prefix + ".beta", &beta});
    }
    void collect_buffers(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".running_mean", &running_mean});
        out.push_back({prefix + ".running_var", &running_var});
    }
};

// --- LSTM -------------------------------------------------------------------

/// Single-direction LSTM. Gate rows of the stacked [4H] projection are
/// ordered input, forget, output, candidate.
template <typename T>
struct LSTM {
    Tensor<T> Wx;  // [4H, D]
    Tensor<T> Wh;  // [4H, H]
    Tensor<T> b;   // [4H]
    std::size_t hidden = 0;

    LSTM() = default;
    LSTM(std::size_t H, std::size_t input_dim, std::mt19937_64& rng) : hidden(H) {
        const T bound = T(1) / std::sqrt(static_cast<T>(H));
        Wx = Tensor<T>::uniform(Shape{4 * H, input_dim}, -bound, bound, rng);
        Wh = Tensor<T>::uniform(Shape{4 * H, H}, -bound, bound, rng);
        b = Tensor<T>(Shape{4 * H});
        auto& bv = b.mutable_values();
        for (std::size_t i = H; i < 2 * H; ++i) bv[i] = T(1);  // forget gate bias
    }

    /// x [T, D] -> hidden states [T, H].
    Tensor<T> forward(const Tensor<T>& x) const {
        if (x.rank() != 2 || x.dim(1) != Wx.dim(1))
            throw std::invalid_argument("lstm: input " + shape_str(x.shape()) +
                                        " does not match weight " + shape_str(Wx.shape()));
        const std::size_t steps = x.dim(0);
        const std::size_t H = hidden;

        // one big input projection, then a cheap recurrence over rows
        Tensor<T> zx = matmul(x, transpose(Wx));  // [T, 4H]
        auto zx_rows = split(zx, 0, std::vector<std::size_t>(steps, 1));

        Tensor<T> h(Shape{H});
        Tensor<T> c(Shape{H});
        std::vector<Tensor<T>> outputs;
        outputs.reserve(steps);
        const std::vector<std::size_t> gate_sizes{H, H, H, H};
        for (std::size_t t = 0; t < steps; ++t) {
            auto z = add(add(flatten(zx_rows[t]), matmul(Wh, h)), b);
            auto gates = split(z, 0, gate_sizes);
            auto i = sigmoid_t(gates[0]);
            auto f = sigmoid_t(gates[1]);
            auto o = sigmoid_t(gates[2]);
            auto g = tanh_t(gates[3]);
            c = add(mul(f, c), mul(i, g));
            h = mul(o, tanh_t(c));
            outputs.push_back(h);
        }
        return reshape(concat(outputs, 0), Shape{steps, H});
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".Wx", &Wx});
        out.push_back({prefix + ".Wh", &Wh});
        out.push_back({prefix + ".b", &b});
    }
};

/// Bidirectional wrapper; output row t is [forward_h(t), backward_h(t)].
template <typename T>
struct BiLSTM {
    LSTM<T> fwd, bwd;

    BiLSTM() = default;
    BiLSTM(std::size_t H, std::size_t input_dim, std::mt19937_64& rng)
        : fwd(H, input_dim, rng), bwd(H, input_dim, rng) {}

    Tensor<T> forward(const Tensor<T>& x) const {
        Tensor<T> hf = fwd.forward(x);
        Tensor<T> hb = bwd.forward(reverse_rows(x));
        return concat<T>({hf, reverse_rows(hb)}, 1);  // [T, 2H]
    }

    static Tensor<T> reverse_rows(const Tensor<T>& x) {
        const std::size_t steps = x.dim(0);
        auto rows = split(x, 0, std::vector<std::size_t>(steps, 1));
        std::reverse(rows.begin(), rows.end());
        return reshape(concat(rows, 0), x.shape());
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        fwd.collect(prefix + ".fwd", out);
        bwd.collect(prefix + ".bwd", out);
    }
};

// --- dropout ----------------------------------------------------------------

/// Inverted dropout: surviving activations are scaled by 1/(1-p) so eval is
/// the identity. A no-op when train is false or p == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, T p, std::mt19937_64& rng, bool train) {
    if (!train || p <= T(0)) return x;
    if (p >= T(1)) throw std::invalid_argument("dropout: rate must be < 1");
    const T keep = T(1) - p;
    std::uniform_real_distribution<T> dist(T(0), T(1));
    Tensor<T> mask(x.shape());
    auto& mv = mask.mutable_values();
    for (auto& v : mv) v = dist(rng) < keep ? T(1) / keep : T(0);
    return mul(x, mask);
}

}  // namespace sfec
