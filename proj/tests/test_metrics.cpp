#include <doctest.h>

#include <sfec/metrics.hpp>

#include <random>
#include <vector>

using namespace sfec;

namespace {

// independent direct-count oracle working from prediction lists
struct Oracle {
    double wa, ua;
};

Oracle count_oracle(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                    std::size_t classes) {
    long correct = 0;
    std::vector<long> class_total(classes, 0), class_correct(classes, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++class_total[truth[i]];
        if (truth[i] == pred[i]) {
            ++correct;
            ++class_correct[truth[i]];
        }
    }
    Oracle o{double(correct) / double(truth.size()), 0.0};
    std::size_t supported = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        if (class_total[c] == 0) continue;
        o.ua += double(class_correct[c]) / double(class_total[c]);
        ++supported;
    }
    o.ua /= double(supported);
    return o;
}

}  // namespace

TEST_CASE("worked two-class example") {
    const auto r = report_from_confusion({{9, 1}, {2, 2}});
    CHECK(r.n == 14);
    CHECK(r.wa == doctest::Approx(11.0 / 14.0).epsilon(1e-15));
    CHECK(r.ua == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(r.per_class_recall[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(r.per_class_recall[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_FALSE(r.zero_support[0]);
    CHECK_FALSE(r.zero_support[1]);
}

TEST_CASE("perfect and degenerate predictions") {
    const auto perfect = report_from_confusion({{3, 0}, {0, 5}});
    CHECK(perfect.wa == 1.0);
    CHECK(perfect.ua == 1.0);

    // everything predicted as class 0 with equal supports
    const auto lazy = report_from_confusion({{5, 0, 0, 0}, {5, 0, 0, 0}, {5, 0, 0, 0},
                                             {5, 0, 0, 0}});
    CHECK(lazy.wa == 0.25);
    CHECK(lazy.ua == 0.25);
    CHECK(lazy.per_class_recall[0] == 1.0);
    CHECK(lazy.per_class_recall[1] == 0.0);
}

TEST_CASE("zero-support classes are excluded from UA and flagged") {
    const auto r = report_from_confusion({{4, 0, 0}, {0, 0, 0}, {1, 0, 1}});
    CHECK(r.zero_support[1]);
    CHECK_FALSE(r.zero_support[0]);
    CHECK(r.n == 6);
    CHECK(r.ua == doctest::Approx((1.0 + 0.5) / 2.0).epsilon(1e-15));
    CHECK(r.per_class_recall[1] == 0.0);
}

TEST_CASE("random confusion matrices match the direct-count oracle exactly") {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<long> cell(0, 30);
    std::uniform_int_distribution<std::size_t> size(2, 6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t classes = size(rng);
        std::vector<std::vector<long>> m(classes, std::vector<long>(classes));
        std::vector<std::size_t> truth, pred;
        long total = 0;
        for (std::size_t r = 0; r < classes; ++r)
            for (std::size_t c = 0; c < classes; ++c) {
                m[r][c] = cell(rng);
                total += m[r][c];
                for (long k = 0; k < m[r][c]; ++k) {
                    truth.push_back(r);
                    pred.push_back(c);
                }
            }
        if (total == 0) {
            m[0][0] = 1;
            truth.push_back(0);
            pred.push_back(0);
        }

        const auto from_matrix = report_from_confusion(m);
        const auto from_lists = evaluate_predictions(truth, pred, classes);
        const auto oracle = count_oracle(truth, pred, classes);
        CHECK(from_matrix.wa == oracle.wa);
        CHECK(from_matrix.ua == oracle.ua);
        CHECK(from_lists.wa == oracle.wa);
        CHECK(from_lists.ua == oracle.ua);
        CHECK(from_lists.confusion == from_matrix.confusion);
        CHECK(from_matrix.n == long(truth.size()));
    }
}

TEST_CASE("row sums equal class supports") {
    std::vector<std::size_t> truth = {0, 0, 1, 2, 2, 2, 3};
    std::vector<std::size_t> pred = {0, 1, 1, 2, 0, 2, 3};
    const auto r = evaluate_predictions(truth, pred, 4);
    long support2 = 0;
    for (long v : r.confusion[2]) support2 += v;
    CHECK(support2 == 3);
    CHECK(r.confusion[0][1] == 1);
    CHECK(r.confusion[2][0] == 1);
}

TEST_CASE("malformed inputs are rejected") {
    CHECK_THROWS_AS(report_from_confusion({}), std::invalid_argument);
    CHECK_THROWS_AS(report_from_confusion({{1, 2}, {3}}), std::invalid_argument);
    CHECK_THROWS_AS(report_from_confusion({{0, 0}, {0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(report_from_confusion({{-1, 1}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_WITH_AS(evaluate_predictions({}, {}, 4), doctest::Contains("empty"),
                         std::invalid_argument);
    CHECK_THROWS_AS(evaluate_predictions({0, 1}, {0}, 4), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_predictions({5}, {0}, 4), std::invalid_argument);
}
