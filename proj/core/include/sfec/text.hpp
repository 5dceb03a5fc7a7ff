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

template <typename T>
struct AttentionSummary {
    Tensor<T> alpha;  // [T] scores, nonnegative, summing to 1
    Tensor<T> H;      // [C] attended left-branch summary
};

// Score each position of the left branch by its dot product with the right
// branch at the same position, softmax the scores over positions, and collapse
// the left branch to the alpha-weighted sum of its rows. Both inputs are
// [positions, channels].
template <typename T>
AttentionSummary<T> cross_attention(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.defined() || !b.defined() || a.rank() != 2 || b.rank() != 2 ||
        a.shape() != b.shape())
        throw std::invalid_argument("cross_attention: branch shapes " +
                                    (a.defined() ? shape_str(a.shape()) : "(undefined)") +
                                    " and " +
                                    (b.defined() ? shape_str(b.shape()) : "(undefined)") +
                                    " must match and be rank 2");
    Tensor<T> s = sum_axis(mul(a, b), 1);
    Tensor<T> alpha = softmax(s);
    return {alpha, matmul(alpha, a)};
}

struct TextConfig {
    std::size_t max_tokens = 100;
    std::size_t embed_dim = 300;
    std::size_t lstm_hidden = 64;  // per direction
    std::vector<std::size_t> conv_widths = {1, 3, 5};
    std::size_t conv_filters = 8;
    std::size_t tdnn_hidden = 512;
    std::size_t feature_width = 4800;
    std::size_t classes = 4;
    double dropout = 0.3;
    bool include_right_pooled = true;

    std::size_t merged_width() const {
        return conv_widths.size() * conv_filters * (include_right_pooled ? 2 : 1);
    }
};

// Dual-branch text classifier over a fixed-length token sequence: a shared
// frozen embedding feeds a BiLSTM-then-conv left branch and a conv-only right
// branch; per conv width the right branch scores cross-attention over the
// left, and the attended summaries (plus optionally the right branch's
// max-pooled vectors) are merged into a dense stack ending in the feature
// layer the fusion stage consumes.
template <typename T>
struct TextNet {
    TextConfig cfg;
    Tensor<T> embeddings;  // [vocab, embed_dim], row 0 is the pad vector; never trained
    BiLSTM<T> bilstm;
    std::vector<Conv1D<T>> left_convs;
    std::vector<Conv1D<T>> right_convs;
    Dense<T> tdnn1;
    Dense<T> tdnn2;
    Dense<T> head;

    TextNet() = default;

    TextNet(const TextConfig& c, Tensor<T> table, std::mt19937_64& rng)
        : cfg(c), embeddings(std::move(table)) {
        if (!embeddings.defined() || embeddings.rank() != 2 ||
            embeddings.dim(1) != cfg.embed_dim)
            throw std::invalid_argument(
                "text: embedding table must be [vocab, " + std::to_string(cfg.embed_dim) +
                "], got " + (embeddings.defined() ? shape_str(embeddings.shape()) : "(undefined)"));
        if (cfg.max_tokens == 0 || cfg.conv_widths.empty() || cfg.conv_filters == 0 ||
            cfg.classes < 2 || cfg.feature_width == 0 || cfg.tdnn_hidden == 0 ||
            cfg.lstm_hidden == 0)
            throw std::invalid_argument("text: every width in the config must be positive "
                                        "and at least two classes are required");
        bilstm = BiLSTM<T>(cfg.lstm_hidden, cfg.embed_dim, rng);
        for (std::size_t w : cfg.conv_widths) {
            left_convs.emplace_back(cfg.conv_filters, 2 * cfg.lstm_hidden, w, Padding::same, rng);
            right_convs.emplace_back(cfg.conv_filters, cfg.embed_dim, w, Padding::same, rng);
        }
        tdnn1 = Dense<T>(cfg.tdnn_hidden, cfg.merged_width(), rng);
        tdnn2 = Dense<T>(cfg.feature_width, cfg.tdnn_hidden, rng);
        head = Dense<T>(cfg.classes, cfg.feature_width, rng);
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        bilstm.collect(prefix + ".bilstm", out);
        for (std::size_t j = 0; j < cfg.conv_widths.size(); ++j) {
            const std::string w = std::to_string(cfg.conv_widths[j]);
            left_convs[j].collect(prefix + ".left_w" + w, out);
            right_convs[j].collect(prefix + ".right_w" + w, out);
        }
        tdnn1.collect(prefix + ".tdnn1", out);
        tdnn2.collect(prefix + ".tdnn2", out);
        head.collect(prefix + ".head", out);
    }
};

template <typename T>
struct TextOut {
    Tensor<T> logits;   // [classes]
    Tensor<T> feature;  // [feature_width], taken before the final dropout
};

template <typename T>
TextOut<T> text_forward(const std::vector<std::size_t>& tokens, TextNet<T>& net, bool train,
                        std::mt19937_64& rng) {
    const TextConfig& cfg = net.cfg;
    if (tokens.size() != cfg.max_tokens)
        throw std::invalid_argument("text: got " + std::to_string(tokens.size()) +
                                    " tokens, expected exactly " +
                                    std::to_string(cfg.max_tokens));
    const Tensor<T> emb = embedding_rows(net.embeddings, tokens);  // [T, E]
    const Tensor<T> ht = transpose(net.bilstm.forward(emb));       // [2H, T]
    const Tensor<T> et = transpose(emb);                           // [E, T]

    std::vector<Tensor<T>> attended;
    std::vector<Tensor<T>> pooled;
    for (std::size_t j = 0; j < cfg.conv_widths.size(); ++j) {
        const Tensor<T> left = net.left_convs[j].forward(ht);    // [F, T]
        const Tensor<T> right = net.right_convs[j].forward(et);  // [F, T]
        attended.push_back(cross_attention(transpose(left), transpose(right)).H);
        if (cfg.include_right_pooled) pooled.push_back(max_axis(right, 1));
    }
    for (auto& p : pooled) attended.push_back(p);

    const T p = T(cfg.dropout);
    Tensor<T> z = concat(attended, 0);
    Tensor<T> d1 = dropout(leaky_relu(net.tdnn1.forward(z)), p, rng, train);
    Tensor<T> feature = leaky_relu(net.tdnn2.forward(d1));
    Tensor<T> logits = net.head.forward(dropout(feature, p, rng, train));
    return {logits, feature};
}

// Ties resolve to the lowest class index; argmax keeps the first maximum.
template <typename T>
std::size_t text_classify(const std::vector<std::size_t>& tokens, TextNet<T>& net) {
    NoGradGuard ng;
    std::mt19937_64 unused(0);
    const TextOut<T> out = text_forward(tokens, net, false, unused);
    return argmax(softmax(out.logits).values());
}

}  // namespace sfec
