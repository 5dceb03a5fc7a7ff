#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <sfec/layers.hpp>
#include <sfec/ops.hpp>
#include <sfec/sinc.hpp>
#include <sfec/tensor.hpp>

namespace sfec {

// Scale a waveform so its peak magnitude is exactly 1. All-zero input is
// returned as-is; there is nothing meaningful to scale it by.
template <typename T>
Tensor<T> normalize_amplitude(const Tensor<T>& wave) {
    if (!wave.defined() || wave.rank() != 1)
        throw std::invalid_argument("normalize_amplitude: expects a nonempty flat waveform");
    T peak = T(0);
    for (T v : wave.values()) {
        const T m = v < T(0) ? -v : v;
        if (m > peak) peak = m;
    }
    if (peak == T(0)) return wave;
    Tensor<T> out(wave.shape());
    auto& ov = out.mutable_values();
    const auto& iv = wave.values();
    for (std::size_t i = 0; i < iv.size(); ++i) ov[i] = iv[i] / peak;
    return out;
}

// Fixed-length analysis windows over a waveform: 250 ms windows every 10 ms at
// 16 kHz by default. A wave shorter than one window is zero-padded into a
// single window; a tail shorter than one hop past the last full window is
// dropped.
struct ChunkPlan {
    std::size_t window = 4000;
    std::size_t hop = 160;

    std::size_t count(std::size_t total) const {
        if (window == 0 || hop == 0)
            throw std::invalid_argument("ChunkPlan: window and hop must be positive");
        if (total < window) return 1;
        return (total - window) / hop + 1;
    }
};

template <typename T>
Tensor<T> extract_chunk(const Tensor<T>& wave, const ChunkPlan& plan, std::size_t index) {
    if (!wave.defined() || wave.rank() != 1)
        throw std::invalid_argument("extract_chunk: expects a nonempty flat waveform");
    const std::size_t total = wave.size();
    if (index >= plan.count(total))
        throw std::invalid_argument("extract_chunk: window " + std::to_string(index) +
                                    " out of range for " + std::to_string(total) + " samples");
    Tensor<T> out(Shape{plan.window});
    auto& ov = out.mutable_values();
    const auto& iv = wave.values();
    const std::size_t start = total < plan.window ? 0 : index * plan.hop;
    const std::size_t n = total < plan.window ? total : plan.window;
    for (std::size_t i = 0; i < n; ++i) ov[i] = iv[start + i];
    return out;
}

template <typename T>
Tensor<T> sample_training_chunk(const Tensor<T>& wave, const ChunkPlan& plan,
                                std::mt19937_64& rng) {
    if (!wave.defined() || wave.rank() != 1)
        throw std::invalid_argument("sample_training_chunk: expects a nonempty flat waveform");
    const std::size_t total = wave.size();
    if (total <= plan.window) return extract_chunk(wave, plan, 0);
    std::uniform_int_distribution<std::size_t> dist(0, total - plan.window);
    const std::size_t start = dist(rng);
    Tensor<T> out(Shape{plan.window});
    auto& ov = out.mutable_values();
    const auto& iv = wave.values();
    for (std::size_t i = 0; i < plan.window; ++i) ov[i] = iv[start + i];
    return out;
}

struct AcousticConfig {
    std::size_t sinc_filters = 80;
    std::size_t sinc_length = 251;
    std::size_t conv_blocks = 2;
    std::size_t conv_filters = 60;
    std::size_t conv_width = 5;
    std::size_t pool_width = 3;
    std::size_t feature_width = 2048;
    std::size_t classes = 4;
    std::size_t window = 4000;
    std::size_t hop = 160;
    double sample_rate = 16000.0;
};

// Raw-waveform classifier: sinc filterbank, abs + pool, a stack of
// conv/batchnorm/leaky-relu/pool blocks, then a dense feature layer feeding a
// small classification head. The penultimate activation doubles as the
// per-chunk feature vector handed to the fusion stage.
template <typename T>
struct AcousticNet {
    struct Block {
        Conv1D<T> conv;
        BatchNorm1D<T> bn;
    };

    AcousticConfig cfg;
    SincLayer<T> sinc;
    std::vector<Block> blocks;
    Dense<T> feature;
    Dense<T> head;
    std::size_t flat_width = 0;

    AcousticNet() = default;

    AcousticNet(const AcousticConfig& c, std::mt19937_64& rng)
        : cfg(c), sinc(c.sinc_filters, c.sinc_length, T(c.sample_rate)) {
        if (cfg.window <= cfg.sinc_length)
            throw std::invalid_argument("acoustic: window of " + std::to_string(cfg.window) +
                                        " samples does not cover sinc filter length " +
                                        std::to_string(cfg.sinc_length));
        if (cfg.pool_width == 0 || cfg.classes == 0 || cfg.feature_width == 0)
            throw std::invalid_argument("acoustic: pool width, class count and feature width "
                                        "must be positive");
        std::size_t len = cfg.window - cfg.sinc_length + 1;
        len = pooled(len);
        std::size_t ch = cfg.sinc_filters;
        blocks.reserve(cfg.conv_blocks);
        for (std::size_t i = 0; i < cfg.conv_blocks; ++i) {
            blocks.push_back(
                {Conv1D<T>(cfg.conv_filters, ch, cfg.conv_width, Padding::same, rng, false),
                 BatchNorm1D<T>(cfg.conv_filters)});
            ch = cfg.conv_filters;
            len = pooled(len);
        }
        flat_width = ch * len;
        feature = Dense<T>(cfg.feature_width, flat_width, rng);
        head = Dense<T>(cfg.classes, cfg.feature_width, rng);
    }

    // Everything after the sinc convolution; y is [C, U] with C equal to the
    // sinc filter count. Split out so eval can reuse one full-wave sinc pass
    // across all windows.
    Tensor<T> trunk_post_sinc(const Tensor<T>& y, bool train) {
        Tensor<T> h = max_pool1d(abs_t(y), cfg.pool_width);
        for (auto& blk : blocks) {
            h = blk.conv.forward(h);
            h = blk.bn.forward(h, train);
            h = leaky_relu(h);
            h = max_pool1d(h, cfg.pool_width);
        }
        return leaky_relu(feature.forward(flatten(h)));
    }

    Tensor<T> chunk_feature(const Tensor<T>& chunk, bool train) {
        return trunk_post_sinc(sinc.forward(chunk), train);
    }

    Tensor<T> chunk_logits(const Tensor<T>& chunk, bool train) {
        return head.forward(chunk_feature(chunk, train));
    }

    // Shared-trunk forward for a whole training minibatch. Convolutions still
    // run per window, but each batchnorm normalizes the concatenation of the
    // batch along time, so train-mode statistics describe the minibatch
    // instead of a single window and stay close to the running estimates that
    // eval mode applies.
    std::vector<Tensor<T>> chunk_features_batch(const std::vector<Tensor<T>>& chunks,
                                                bool train) {
        std::vector<Tensor<T>> hs;
        hs.reserve(chunks.size());
        for (const auto& chunk : chunks)
            hs.push_back(max_pool1d(abs_t(sinc.forward(chunk)), cfg.pool_width));
        for (auto& blk : blocks) {
            for (auto& h : hs) h = blk.conv.forward(h);
            const std::size_t len = hs.front().dim(1);
            const Tensor<T> joint = leaky_relu(blk.bn.forward(concat(hs, 1), train));
            for (std::size_t i = 0; i < hs.size(); ++i)
                hs[i] = max_pool1d(slice_last(joint, i * len, len), cfg.pool_width);
        }
        std::vector<Tensor<T>> feats;
        feats.reserve(hs.size());
        for (auto& h : hs) feats.push_back(leaky_relu(feature.forward(flatten(h))));
        return feats;
    }

    std::vector<Tensor<T>> chunk_logits_batch(const std::vector<Tensor<T>>& chunks, bool train) {
        std::vector<Tensor<T>> logits = chunk_features_batch(chunks, train);
        for (auto& f : logits) f = head.forward(f);
        return logits;
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        sinc.collect(prefix + ".sinc", out);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const std::string b = prefix + ".block" + std::to_string(i);
            blocks[i].conv.collect(b + ".conv", out);
            blocks[i].bn.collect(b + ".bn", out);
        }
        feature.collect(prefix + ".feature", out);
        head.collect(prefix + ".head", out);
    }

    void collect_buffers(const std::string& prefix, ParamList<T>& out) {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            blocks[i].bn.collect_buffers(prefix + ".block" + std::to_string(i) + ".bn", out);
    }

   private:
    std::size_t pooled(std::size_t len) const {
        if (len < cfg.pool_width)
            throw std::invalid_argument("acoustic: " + std::to_string(len) +
                                        " samples left before a pool of width " +
                                        std::to_string(cfg.pool_width) +
                                        "; shrink the filter stack or widen the window");
        return len / cfg.pool_width;
    }
};

namespace detail {

// Run the evaluation trunk over every analysis window, calling fn with each
// window's penultimate feature. A valid convolution of a window equals the
// matching slice of the full wave's convolution, so the sinc layer runs once
// over the whole wave and the per-window work starts from slices of it.
template <typename T, typename Fn>
void for_each_window(const Tensor<T>& wave, AcousticNet<T>& net, const ChunkPlan& plan, Fn&& fn) {
    if (!wave.defined() || wave.rank() != 1)
        throw std::invalid_argument("acoustic eval: expects a nonempty flat waveform");
    if (plan.window != net.cfg.window)
        throw std::invalid_argument("acoustic eval: plan window " + std::to_string(plan.window) +
                                    " does not match the network's configured window " +
                                    std::to_string(net.cfg.window));
    NoGradGuard ng;
    const std::size_t total = wave.size();
    if (total < plan.window) {
        fn(net.chunk_feature(extract_chunk(wave, plan, 0), false));
        return;
    }
    const std::size_t span = plan.window - net.cfg.sinc_length + 1;
    const Tensor<T> full = net.sinc.forward(wave);
    const std::size_t n = plan.count(total);
    for (std::size_t i = 0; i < n; ++i)
        fn(net.trunk_post_sinc(slice_last(full, i * plan.hop, span), false));
}

}  // namespace detail

// Sum of per-window softmax probabilities; argmax of the sum is the
// utterance-level prediction.
template <typename T>
Tensor<T> utterance_predict(const Tensor<T>& wave, AcousticNet<T>& net, const ChunkPlan& plan) {
    std::vector<T> acc(net.cfg.classes, T(0));
    detail::for_each_window(wave, net, plan, [&](const Tensor<T>& feat) {
        const Tensor<T> probs = softmax(net.head.forward(feat));
        const auto& pv = probs.values();
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += pv[c];
    });
    return Tensor<T>(Shape{net.cfg.classes}, acc);
}

// Mean of per-window penultimate features; the utterance-level acoustic
// feature handed to fusion.
template <typename T>
Tensor<T> utterance_feature(const Tensor<T>& wave, AcousticNet<T>& net, const ChunkPlan& plan) {
    std::vector<T> acc(net.cfg.feature_width, T(0));
    std::size_t n = 0;
    detail::for_each_window(wave, net, plan, [&](const Tensor<T>& feat) {
        const auto& fv = feat.values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += fv[i];
        ++n;
    });
    for (T& v : acc) v /= T(n);
    return Tensor<T>(Shape{net.cfg.feature_width}, acc);
}

}  // namespace sfec
