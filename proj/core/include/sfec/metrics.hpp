#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfec {

/// Confusion rows are true classes, columns predictions. WA is overall sample
/// accuracy (trace over total); UA is the mean recall over classes that have
/// support, with empty classes excluded and flagged.
struct EvalReport {
    std::vector<std::vector<long>> confusion;
    std::vector<double> per_class_recall;  // 0 where the class has no support
    std::vector<bool> zero_support;
    double wa = 0.0;
    double ua = 0.0;
    long n = 0;
};

inline EvalReport report_from_confusion(std::vector<std::vector<long>> confusion) {
    const std::size_t classes = confusion.size();
    if (classes == 0) throw std::invalid_argument("metrics: empty confusion matrix");
    for (const auto& row : confusion) {
        if (row.size() != classes)
            throw std::invalid_argument("metrics: confusion matrix must be square");
        for (long v : row)
            if (v < 0) throw std::invalid_argument("metrics: negative confusion count");
    }

    EvalReport r;
    r.confusion = std::move(confusion);
    r.per_class_recall.assign(classes, 0.0);
    r.zero_support.assign(classes, false);
    long trace = 0;
    double recall_sum = 0.0;
    std::size_t supported = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        long support = 0;
        for (long v : r.confusion[c]) support += v;
        r.n += support;
        trace += r.confusion[c][c];
        if (support == 0) {
            r.zero_support[c] = true;
            continue;
        }
        r.per_class_recall[c] = double(r.confusion[c][c]) / double(support);
        recall_sum += r.per_class_recall[c];
        ++supported;
    }
    if (r.n == 0) throw std::invalid_argument("metrics: no samples in confusion matrix");
    r.wa = double(trace) / double(r.n);
    r.ua = recall_sum / double(supported);
    return r;
}

inline EvalReport evaluate_predictions(const std::vector<std::size_t>& truth,
                                       const std::vector<std::size_t>& predicted,
                                       std::size_t classes) {
    if (truth.empty()) throw std::invalid_argument("metrics: empty record set");
    if (truth.size() != predicted.size())
        throw std::invalid_argument("metrics: " + std::to_string(truth.size()) +
                                    " labels vs " + std::to_string(predicted.size()) +
                                    " predictions");
    std::vector<std::vector<long>> confusion(classes, std::vector<long>(classes, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= classes || predicted[i] >= classes)
            throw std::invalid_argument("metrics: class index out of range at sample " +
                                        std::to_string(i));
        ++confusion[truth[i]][predicted[i]];
    }
    return report_from_confusion(std::move(confusion));
}

}  // namespace sfec
