#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfec/acoustic.hpp"
#include "sfec/adam.hpp"
#include "sfec/dataset.hpp"
#include "sfec/fusion.hpp"
#include "sfec/metrics.hpp"
#include "sfec/text.hpp"
#include "sfec/wav.hpp"

namespace sfec {

template <typename T>
struct LoadedSample {
    std::string id;
    std::size_t label = 0;
    Tensor<T> wave;    // amplitude-normalized
    std::vector<std::size_t> tokens;
};

template <typename T>
std::vector<LoadedSample<T>> load_samples(const std::vector<UtteranceRecord>& records,
                                          const EmbeddingTable& vocab, std::size_t max_tokens) {
    std::vector<LoadedSample<T>> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        LoadedSample<T> s;
        s.id = rec.id;
        s.label = label_index(rec.label);
        const WavData wav = read_wav(rec.audio_path);
        std::vector<T> w(wav.samples.begin(), wav.samples.end());
        const Shape shape = {w.size()};
        s.wave = normalize_amplitude(Tensor<T>(shape, std::move(w)));
        s.tokens = tokenize_and_pad(rec.transcript, vocab, max_tokens);
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<UtteranceRecord> filter_records(const std::vector<UtteranceRecord>& records,
                                                   const std::vector<std::string>& ids) {
    std::vector<UtteranceRecord> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = std::find_if(records.begin(), records.end(),
                               [&](const UtteranceRecord& r) { return r.id == id; });
        if (it == records.end())
            throw std::invalid_argument("split references unknown record id \"" + id + "\"");
        out.push_back(*it);
    }
    return out;
}

struct TrainOptions {
    double lr = 0.001;
    std::size_t batch = 64;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    std::uint64_t seed = 1;
};

template <typename T>
struct TrainLog {
    std::vector<T> epoch_loss;  // mean per-sample loss
    std::vector<double> val_wa;
    std::size_t best_epoch = 0;
    double best_val_wa = 0.0;

    std::size_t epochs_run() const { return epoch_loss.size(); }
};

namespace detail {

/// Mean cross-entropy over one minibatch as a single graph; one backward pass
/// then sees the mean-loss gradient directly.
template <typename T, typename PerSample>
Tensor<T> batch_mean_loss(const std::vector<std::size_t>& batch, PerSample&& per_sample) {
    Tensor<T> total;
    for (const std::size_t idx : batch) {
        Tensor<T> li = per_sample(idx);
        total = total.defined() ? add(total, li) : li;
    }
    return mul_scalar(total, T(1) / static_cast<T>(batch.size()));
}

/// Batched optimization with early stopping on validation WA. The stage
/// supplies the mean loss of a whole minibatch, so layers that look at batch
/// statistics see the entire batch. The best-validation parameter snapshot
/// (and any buffers, e.g. batchnorm running stats) is restored before
/// returning.
template <typename T, typename BatchLoss, typename ValWa>
TrainLog<T> run_stage(const ParamList<T>& params, const ParamList<T>& buffers, std::size_t n,
                      BatchLoss&& batch_loss, ValWa&& val_wa, const TrainOptions& opt,
                      std::mt19937_64& rng) {
    if (n == 0) throw std::invalid_argument("train: empty training set");
    mark_trainable(params);
    Adam<T> adam(static_cast<T>(opt.lr));
    TrainLog<T> log;
    std::vector<std::vector<T>> best_params, best_buffers;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < opt.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        T total = 0;
        for (std::size_t start = 0; start < n; start += opt.batch) {
            const std::size_t stop = std::min(n, start + opt.batch);
            const std::vector<std::size_t> batch(order.begin() + start, order.begin() + stop);
            Tensor<T> loss = batch_loss(batch);
            const T v = loss.value();
            if (!std::isfinite(v))
                throw std::runtime_error("train: non-finite batch loss at sample offset " +
                                         std::to_string(start) + " in epoch " +
                                         std::to_string(epoch));
            total += v * static_cast<T>(stop - start);
            backward(loss);
            adam.step(params);
            adam.zero_grad(params);
        }
        log.epoch_loss.push_back(total / static_cast<T>(n));

        const double wa = val_wa();
        log.val_wa.push_back(wa);
        if (log.val_wa.size() == 1 || wa > log.best_val_wa) {
            log.best_val_wa = wa;
            log.best_epoch = epoch;
            best_params.clear();
            best_buffers.clear();
            for (const auto& p : params) best_params.push_back(p.tensor->values());
            for (const auto& b : buffers) best_buffers.push_back(b.tensor->values());
        }
        if (epoch - log.best_epoch >= opt.patience) break;
    }
    for (std::size_t i = 0; i < best_params.size(); ++i)
        params[i].tensor->mutable_values() = best_params[i];
    for (std::size_t i = 0; i < best_buffers.size(); ++i)
        buffers[i].tensor->mutable_values() = best_buffers[i];
    return log;
}

}  // namespace detail

template <typename T>
EvalReport evaluate_acoustic(AcousticNet<T>& net, const std::vector<LoadedSample<T>>& samples) {
    if (samples.empty()) throw std::invalid_argument("evaluate: empty record set");
    const ChunkPlan plan{net.cfg.window, net.cfg.hop};
    std::vector<std::size_t> truth, pred;
    for (const auto& s : samples) {
        truth.push_back(s.label);
        pred.push_back(argmax(utterance_predict(s.wave, net, plan).values()));
    }
    return evaluate_predictions(truth, pred, net.cfg.classes);
}

template <typename T>
EvalReport evaluate_text(TextNet<T>& net, const std::vector<LoadedSample<T>>& samples) {
    if (samples.empty()) throw std::invalid_argument("evaluate: empty record set");
    std::vector<std::size_t> truth, pred;
    for (const auto& s : samples) {
        truth.push_back(s.label);
        pred.push_back(text_classify(s.tokens, net));
    }
    return evaluate_predictions(truth, pred, net.cfg.classes);
}

template <typename T>
EvalReport evaluate_fusion(FusionNet<T>& fnet, AcousticNet<T>& anet, TextNet<T>& tnet,
                           const std::vector<LoadedSample<T>>& samples) {
    if (samples.empty()) throw std::invalid_argument("evaluate: empty record set");
    NoGradGuard ng;
    const ChunkPlan plan{anet.cfg.window, anet.cfg.hop};
    std::mt19937_64 rng(0);  // dropout is off in eval, never consulted
    std::vector<std::size_t> truth, pred;
    for (const auto& s : samples) {
        truth.push_back(s.label);
        const Tensor<T> af = utterance_feature(s.wave, anet, plan);
        const Tensor<T> tf = text_forward(s.tokens, tnet, false, rng).feature;
        pred.push_back(argmax(fuse_and_classify(af, tf, fnet).values()));
    }
    return evaluate_predictions(truth, pred, fnet.cfg.classes);
}

/// Stage 1: acoustic network with its own head, one random window per
/// utterance per epoch, whole-utterance window aggregation for validation.
template <typename T>
TrainLog<T> train_acoustic(AcousticNet<T>& net, const std::vector<LoadedSample<T>>& train,
                           const std::vector<LoadedSample<T>>& val, const TrainOptions& opt) {
    ParamList<T> params, buffers;
    net.collect("acoustic", params);
    net.collect_buffers("acoustic", buffers);
    const ChunkPlan plan{net.cfg.window, net.cfg.hop};
    std::mt19937_64 rng(opt.seed);
    auto loss = [&](const std::vector<std::size_t>& batch) {
        std::vector<Tensor<T>> chunks;
        chunks.reserve(batch.size());
        for (const std::size_t i : batch)
            chunks.push_back(sample_training_chunk(train[i].wave, plan, rng));
        const std::vector<Tensor<T>> logits = net.chunk_logits_batch(chunks, true);
        Tensor<T> total;
        for (std::size_t k = 0; k < batch.size(); ++k) {
            Tensor<T> li = cross_entropy_logits(logits[k], train[batch[k]].label);
            total = total.defined() ? add(total, li) : li;
        }
        return mul_scalar(total, T(1) / static_cast<T>(batch.size()));
    };
    auto wa = [&] { return evaluate_acoustic(net, val).wa; };
    return detail::run_stage<T>(params, buffers, train.size(), loss, wa, opt, rng);
}

/// Stage 2: text network with its own head.
template <typename T>
TrainLog<T> train_text(TextNet<T>& net, const std::vector<LoadedSample<T>>& train,
                       const std::vector<LoadedSample<T>>& val, const TrainOptions& opt) {
    ParamList<T> params, buffers;
    net.collect("text", params);
    std::mt19937_64 rng(opt.seed);
    auto loss = [&](const std::vector<std::size_t>& batch) {
        return detail::batch_mean_loss<T>(batch, [&](std::size_t i) {
            return cross_entropy_logits(text_forward(train[i].tokens, net, true, rng).logits,
                                        train[i].label);
        });
    };
    auto wa = [&] { return evaluate_text(net, val).wa; };
    return detail::run_stage<T>(params, buffers, train.size(), loss, wa, opt, rng);
}

template <typename T>
struct FusionFeatures {
    std::vector<Tensor<T>> acoustic;
    std::vector<Tensor<T>> text;
};

/// Frozen-encoder features, computed once per sample off the tape.
template <typename T>
FusionFeatures<T> precompute_features(AcousticNet<T>& anet, TextNet<T>& tnet,
                                      const std::vector<LoadedSample<T>>& samples) {
    NoGradGuard ng;
    const ChunkPlan plan{anet.cfg.window, anet.cfg.hop};
    std::mt19937_64 rng(0);
    FusionFeatures<T> out;
    out.acoustic.reserve(samples.size());
    out.text.reserve(samples.size());
    for (const auto& s : samples) {
        out.acoustic.push_back(utterance_feature(s.wave, anet, plan));
        out.text.push_back(text_forward(s.tokens, tnet, false, rng).feature);
    }
    return out;
}

/// Stage 3, default form: encoders stay frozen and training runs on the
/// cached features, so an epoch costs only the fusion head.
template <typename T>
TrainLog<T> train_fusion(FusionNet<T>& net, const FusionFeatures<T>& train_feats,
                         const std::vector<LoadedSample<T>>& train,
                         const FusionFeatures<T>& val_feats,
                         const std::vector<LoadedSample<T>>& val, const TrainOptions& opt) {
    if (train_feats.acoustic.size() != train.size() || val_feats.acoustic.size() != val.size())
        throw std::invalid_argument("train_fusion: feature cache does not match the sample lists");
    ParamList<T> params, buffers;
    net.collect("fusion", params);
    std::mt19937_64 rng(opt.seed);
    auto loss = [&](const std::vector<std::size_t>& batch) {
        return detail::batch_mean_loss<T>(batch, [&](std::size_t i) {
            return cross_entropy_logits(
                fuse_and_classify(train_feats.acoustic[i], train_feats.text[i], net),
                train[i].label);
        });
    };
    auto wa = [&] {
        NoGradGuard ng;
        std::vector<std::size_t> truth, pred;
        for (std::size_t i = 0; i < val.size(); ++i) {
            truth.push_back(val[i].label);
            pred.push_back(
                argmax(fuse_and_classify(val_feats.acoustic[i], val_feats.text[i], net).values()));
        }
        return evaluate_predictions(truth, pred, net.cfg.classes).wa;
    };
    return detail::run_stage<T>(params, buffers, train.size(), loss, wa, opt, rng);
}

/// Stage 3, fine-tune form: gradients flow through both encoders, with the
/// acoustic side seeing one random window per utterance like stage 1.
template <typename T>
TrainLog<T> train_fusion_joint(FusionNet<T>& fnet, AcousticNet<T>& anet, TextNet<T>& tnet,
                               const std::vector<LoadedSample<T>>& train,
                               const std::vector<LoadedSample<T>>& val, const TrainOptions& opt) {
    ParamList<T> params, buffers;
    fnet.collect("fusion", params);
    anet.collect("acoustic", params);
    tnet.collect("text", params);
    anet.collect_buffers("acoustic", buffers);
    const ChunkPlan plan{anet.cfg.window, anet.cfg.hop};
    std::mt19937_64 rng(opt.seed);
    auto loss = [&](const std::vector<std::size_t>& batch) {
        std::vector<Tensor<T>> chunks;
        chunks.reserve(batch.size());
        for (const std::size_t i : batch)
            chunks.push_back(sample_training_chunk(train[i].wave, plan, rng));
        const std::vector<Tensor<T>> afs = anet.chunk_features_batch(chunks, true);
        Tensor<T> total;
        for (std::size_t k = 0; k < batch.size(); ++k) {
            const std::size_t i = batch[k];
            const Tensor<T> tf = text_forward(train[i].tokens, tnet, true, rng).feature;
            Tensor<T> li = cross_entropy_logits(fuse_and_classify(afs[k], tf, fnet),
                                                train[i].label);
            total = total.defined() ? add(total, li) : li;
        }
        return mul_scalar(total, T(1) / static_cast<T>(batch.size()));
    };
    auto wa = [&] { return evaluate_fusion(fnet, anet, tnet, val).wa; };
    return detail::run_stage<T>(params, buffers, train.size(), loss, wa, opt, rng);
}

}  // namespace sfec
