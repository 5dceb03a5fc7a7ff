#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <sfec/layers.hpp>
#include <sfec/ops.hpp>
#include <sfec/tensor.hpp>

namespace sfec {

// Elementwise self-gate: squash a linear map of the input into (0,1) and use
// it to rescale the input itself.
template <typename T>
struct GatedAttention {
    Tensor<T> W_h;  // [D, D]
    Tensor<T> b_h;  // [D]

    GatedAttention() = default;

    GatedAttention(std::size_t dim, std::mt19937_64& rng) {
        const T bound = std::sqrt(T(1) / static_cast<T>(dim));
        W_h = Tensor<T>::uniform(Shape{dim, dim}, -bound, bound, rng);
        b_h = Tensor<T>(Shape{dim});
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".W_h", &W_h});
        out.push_back({prefix + ".b_h", &b_h});
    }
};

template <typename T>
Tensor<T> gated_attention(const Tensor<T>& c, const GatedAttention<T>& gate) {
    if (!c.defined() || c.rank() != 1 || !gate.W_h.defined() || gate.W_h.dim(1) != c.size())
        throw std::invalid_argument(
            "gated_attention: gate built for width " +
            (gate.W_h.defined() ? std::to_string(gate.W_h.dim(1)) : std::string("(unset)")) +
            " cannot score input " + (c.defined() ? shape_str(c.shape()) : "(undefined)"));
    Tensor<T> h = tanh_t(add(matmul(gate.W_h, c), gate.b_h));
    return mul(sigmoid_t(h), c);
}

enum class FusionMode { F1, F2, F3 };

inline const char* to_string(FusionMode m) {
    switch (m) {
        case FusionMode::F1: return "F1";
        case FusionMode::F2: return "F2";
        case FusionMode::F3: return "F3";
    }
    return "F1";
}

inline FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "F1") return FusionMode::F1;
    if (s == "F2") return FusionMode::F2;
    if (s == "F3") return FusionMode::F3;
    throw std::invalid_argument("fusion: unknown mode '" + s + "', expected F1, F2 or F3");
}

struct FusionConfig {
    FusionMode mode = FusionMode::F1;
    std::size_t acoustic_width = 2048;
    std::size_t text_width = 4800;
    std::size_t hidden = 512;
    std::size_t classes = 4;

    std::size_t merged_width() const { return acoustic_width + text_width; }
};

// Merges the two per-utterance feature vectors and classifies. F1 feeds raw
// concatenation to the classifier, F2 gates the concatenation as a whole, F3
// gates each modality with its own parameters before concatenating.
template <typename T>
struct FusionNet {
    FusionConfig cfg;
    GatedAttention<T> gate_merged;    // F2
    GatedAttention<T> gate_acoustic;  // F3
    GatedAttention<T> gate_text;      // F3
    Dense<T> hidden;
    Dense<T> head;

    FusionNet() = default;

    FusionNet(const FusionConfig& c, std::mt19937_64& rng) : cfg(c) {
        if (cfg.acoustic_width == 0 || cfg.text_width == 0 || cfg.hidden == 0 ||
            cfg.classes < 2)
            throw std::invalid_argument("fusion: widths must be positive and at least two "
                                        "classes are required");
        if (cfg.mode == FusionMode::F2) {
            gate_merged = GatedAttention<T>(cfg.merged_width(), rng);
        } else if (cfg.mode == FusionMode::F3) {
            gate_acoustic = GatedAttention<T>(cfg.acoustic_width, rng);
            gate_text = GatedAttention<T>(cfg.text_width, rng);
        }
        hidden = Dense<T>(cfg.hidden, cfg.merged_width(), rng);
        head = Dense<T>(cfg.classes, cfg.hidden, rng);
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        if (cfg.mode == FusionMode::F2) gate_merged.collect(prefix + ".gate", out);
        if (cfg.mode == FusionMode::F3) {
            gate_acoustic.collect(prefix + ".gate_acoustic", out);
            gate_text.collect(prefix + ".gate_text", out);
        }
        hidden.collect(prefix + ".hidden", out);
        head.collect(prefix + ".head", out);
    }
};

template <typename T>
Tensor<T> fuse_and_classify(const Tensor<T>& a, const Tensor<T>& t, FusionNet<T>& net) {
    const FusionConfig& cfg = net.cfg;
    if (!a.defined() || a.rank() != 1 || a.size() != cfg.acoustic_width)
        throw std::invalid_argument(
            "fusion: acoustic feature must be [" + std::to_string(cfg.acoustic_width) +
            "], got " + (a.defined() ? shape_str(a.shape()) : "(undefined)"));
    if (!t.defined() || t.rank() != 1 || t.size() != cfg.text_width)
        throw std::invalid_argument(
            "fusion: text feature must be [" + std::to_string(cfg.text_width) + "], got " +
            (t.defined() ? shape_str(t.shape()) : "(undefined)"));

    Tensor<T> merged;
    switch (cfg.mode) {
        case FusionMode::F1:
            merged = concat(std::vector<Tensor<T>>{a, t}, 0);
            break;
        case FusionMode::F2:
            merged = gated_attention(concat(std::vector<Tensor<T>>{a, t}, 0), net.gate_merged);
            break;
        case FusionMode::F3:
            merged = concat(std::vector<Tensor<T>>{gated_attention(a, net.gate_acoustic),
                                                   gated_attention(t, net.gate_text)},
                            0);
            break;
    }
    return net.head.forward(leaky_relu(net.hidden.forward(merged)));
}

}  // namespace sfec
