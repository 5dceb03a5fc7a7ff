#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sfec/grad_check.hpp"
#include "sfec/sinc.hpp"

using sfec::Shape;
using sfec::Tensor;

namespace {

// independent DFT magnitude of one kernel row at a single frequency
template <typename T>
T dft_mag(const std::vector<T>& k, T freq, T fs) {
    const T omega = T(2) * std::numbers::pi_v<T> * freq / fs;
    T re = 0, im = 0;
    for (std::size_t n = 0; n < k.size(); ++n) {
        re += k[n] * std::cos(omega * static_cast<T>(n));
        im -= k[n] * std::sin(omega * static_cast<T>(n));
    }
    return std::sqrt(re * re + im * im);
}

template <typename T>
std::vector<T> kernel_row(const Tensor<T>& kernels, std::size_t f) {
    const std::size_t length = kernels.dim(1);
    std::vector<T> row(length);
    for (std::size_t n = 0; n < length; ++n) row[n] = kernels.at2(f, n);
    return row;
}

}  // namespace

TEST_SUITE_BEGIN("sinc");

TEST_CASE("hamming window shape") {
    auto w = sfec::hamming_window<double>(251);
    CHECK(w[125] == 1.0);
    CHECK(w[0] == doctest::Approx(0.08));
    for (std::size_t i = 0; i < 251; ++i) CHECK(w[i] == w[250 - i]);
    CHECK_THROWS_AS(sfec::hamming_window<double>(250), std::invalid_argument);
}

TEST_CASE("center tap at f1=1000 f2=2000 is 0.125") {
    sfec::SincLayer<double> layer(1, 251, 16000.0);
    layer.theta_low = Tensor<double>(Shape{1}, {950.0});   // f1 = 50 + 950
    layer.theta_band = Tensor<double>(Shape{1}, {950.0});  // f2 = f1 + 50 + 950
    auto bands = layer.effective_cutoffs();
    CHECK(bands[0].first == 1000.0);
    CHECK(bands[0].second == 2000.0);
    auto k = layer.build();
    CHECK(k.at2(0, 125) == 0.125);
}

TEST_CASE("kernels are exactly palindromic for arbitrary parameters") {
    sfec::SincLayer<float> layer(4, 101, 16000.0f);
    layer.theta_low = Tensor<float>(Shape{4}, {0.0f, -321.7f, 5000.0f, 123.456f});
    layer.theta_band = Tensor<float>(Shape{4}, {-1.5f, 7100.0f, 0.0f, 999.9f});
    auto k = layer.build();
    for (std::size_t f = 0; f < 4; ++f)
        for (std::size_t i = 0; i < 101; ++i) CHECK(k.at2(f, i) == k.at2(f, 100 - i));
}

TEST_CASE("effective bands stay ordered and bounded for every theta") {
    const double fs = 16000.0, nyq = 8000.0;
    sfec::SincLayer<double> layer(1, 11, fs);
    const double grid[] = {0.0, 1.0, -1.0, 49.9, 500.0, -500.0, 7899.0, 7950.0,
                           8000.0, 12345.0, -99999.0, 1e7};
    for (double tl : grid)
        for (double tb : grid) {
            layer.theta_low = Tensor<double>(Shape{1}, {tl});
            layer.theta_band = Tensor<double>(Shape{1}, {tb});
            auto b = layer.effective_cutoffs()[0];
            INFO("theta_low ", tl, " theta_band ", tb);
            CHECK(b.first > 0.0);
            CHECK(b.second > b.first);
            CHECK(b.second <= nyq);
        }
}

TEST_CASE("mel init round trip reproduces the intended band edges") {
    const double fs = 16000.0;
    sfec::SincLayer<double> layer(80, 251, fs);
    auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto imel = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    const double lo = mel(30.0), hi = mel(fs / 2);

    auto bands = layer.effective_cutoffs();
    for (std::size_t i = 0; i < 80; ++i) {
        const double e1 = imel(lo + (hi - lo) * double(i) / 80.0);
        const double e2 = imel(lo + (hi - lo) * double(i + 1) / 80.0);
        const double f1_target = std::max(e1, 50.0);
        const double f2_target = f1_target + std::max(e2 - f1_target, 50.0);
        CHECK(std::abs(bands[i].first - f1_target) <= 1e-6);
        CHECK(std::abs(bands[i].second - f2_target) <= 1e-6);
    }
}

TEST_CASE("mel init at F=80 gives ordered in-range bands with increasing f1") {
    sfec::SincLayer<double> layer(80, 251, 16000.0);
    auto bands = layer.effective_cutoffs();
    for (std::size_t i = 0; i < 80; ++i) {
        CHECK(bands[i].first > 0.0);
        CHECK(bands[i].first < bands[i].second);
        CHECK(bands[i].second <= 8000.0);
        if (i) CHECK(bands[i].first > bands[i - 1].first);
    }
}

TEST_CASE("mel init degenerate single filter spans the range") {
    sfec::SincLayer<double> layer(1, 251, 16000.0);
    auto b = layer.effective_cutoffs()[0];
    CHECK(b.first == doctest::Approx(50.0));
    CHECK(b.second == doctest::Approx(8000.0).epsilon(1e-9));
}

TEST_CASE("band-pass property by DFT oracle") {
    sfec::SincLayer<double> layer(1, 251, 16000.0);
    layer.theta_low = Tensor<double>(Shape{1}, {950.0});
    layer.theta_band = Tensor<double>(Shape{1}, {950.0});
    auto row = kernel_row(layer.build(), 0);
    const double mid = dft_mag(row, 1500.0, 16000.0);
    const double dc = dft_mag(row, 0.0, 16000.0);
    const double ny = dft_mag(row, 8000.0, 16000.0);
    CHECK(mid >= 5.0 * dc);
    CHECK(mid >= 5.0 * ny);
}

TEST_CASE("band-pass property holds across the mel bank for wide bands") {
    sfec::SincLayer<double> layer(80, 251, 16000.0);
    auto kernels = layer.build();
    auto bands = layer.effective_cutoffs();
    std::size_t wide = 0;
    std::size_t at_nyquist = 0;
    for (std::size_t f = 0; f < 80; ++f) {
        if (bands[f].second - bands[f].first < 100.0) continue;
        ++wide;
        auto row = kernel_row(kernels, f);
        const double mid = dft_mag(row, (bands[f].first + bands[f].second) / 2, 16000.0);
        CHECK(mid >= 5.0 * dft_mag(row, 0.0, 16000.0));
        if (bands[f].second < 8000.0) {
            CHECK(mid >= 5.0 * dft_mag(row, 8000.0, 16000.0));
        } else {
            // a band whose upper edge sits at fs/2 meets its own negative-frequency
            // image there, so a real kernel's response at Nyquist is ~1 regardless
            // of parameters; the rejection check cannot apply to such a band
            ++at_nyquist;
            CHECK(dft_mag(row, 8000.0, 16000.0) <= 1.1);
        }
    }
    CHECK(at_nyquist == 1);  // only the top mel band touches fs/2
    CHECK(wide == 32);       // deterministic under the fixed mel grid
}

TEST_CASE("unit impulse reproduces the kernel row") {
    sfec::SincLayer<double> layer(2, 101, 16000.0);
    Tensor<double> x(Shape{300});
    x.mutable_values()[120] = 1.0;
    auto y = layer.forward(x);
    auto kernels = layer.build();
    CHECK(y.shape() == Shape{2, 200});
    // correlation picks the kernel up time-reversed; palindromic kernels make
    // the reversal invisible, so compare against the reversed row explicitly
    for (std::size_t f = 0; f < 2; ++f)
        for (std::size_t i = 0; i < 101; ++i)
            CHECK(y.at2(f, 120 - 100 + i) == doctest::Approx(kernels.at2(f, 100 - i)).epsilon(1e-12));
}

TEST_CASE("zero input gives zero output") {
    sfec::SincLayer<float> layer(3, 51, 16000.0f);
    auto y = layer.forward(Tensor<float>(Shape{128}));
    for (float v : y.values()) CHECK(v == 0.0f);
}

TEST_CASE("input validation") {
    sfec::SincLayer<double> layer(2, 51, 16000.0);
    CHECK_THROWS_WITH_AS(layer.forward(Tensor<double>(Shape{50})), doctest::Contains("shorter"),
                         std::invalid_argument);
    CHECK_THROWS_AS(layer.forward(Tensor<double>(Shape{2, 128})), std::invalid_argument);
    CHECK_THROWS_AS(sfec::SincLayer<double>(2, 50, 16000.0), std::invalid_argument);
    CHECK_THROWS_AS(sfec::SincLayer<double>(0, 51, 16000.0), std::invalid_argument);
    CHECK_THROWS_AS(sfec::SincLayer<double>(2, 51, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(sfec::SincLayer<double>(2, 51, 16000.0, 7000.0, 2000.0), std::invalid_argument);
}

TEST_CASE("theta gradients through build and conv match central differences") {
    std::mt19937_64 rng(67);
    sfec::SincLayer<double> layer(3, 31, 16000.0);
    layer.theta_low = Tensor<double>(Shape{3}, {200.0, -750.0, 1500.0});
    layer.theta_band = Tensor<double>(Shape{3}, {400.0, 900.0, -2500.0});
    layer.theta_low.set_requires_grad(true);
    layer.theta_band.set_requires_grad(true);
    auto x = Tensor<double>::uniform(Shape{64}, -1.0, 1.0, rng);

    auto loss_fn = [&]() { return sfec::sum_all(sfec::tanh_t(layer.forward(x))); };
    auto res = sfec::grad_check<double>(loss_fn, {layer.theta_low, layer.theta_band}, 1e-2);
    INFO("param ", res.param, " index ", res.index, " analytic ", res.analytic, " numeric ",
         res.numeric);
    CHECK(res.max_rel < 1e-6);
}

TEST_CASE("clamped bandwidth stops the gradient") {
    std::mt19937_64 rng(71);
    sfec::SincLayer<double> layer(1, 31, 16000.0);
    layer.theta_low = Tensor<double>(Shape{1}, {100.0});
    layer.theta_band = Tensor<double>(Shape{1}, {20000.0});  // far past Nyquist
    layer.theta_low.set_requires_grad(true);
    layer.theta_band.set_requires_grad(true);
    auto x = Tensor<double>::uniform(Shape{64}, -1.0, 1.0, rng);

    auto loss = sfec::sum_all(sfec::tanh_t(layer.forward(x)));
    sfec::backward(loss);
    CHECK(layer.theta_band.grad().value() == 0.0);
    // and the numeric view agrees: f2 pinned at Nyquist either side of eps
    auto res = sfec::grad_check<double>(
        [&]() { return sfec::sum_all(sfec::tanh_t(layer.forward(x))); },
        {layer.theta_low, layer.theta_band}, 1e-2);
    CHECK(res.max_rel < 1e-6);
}

TEST_CASE("magnitude response helper has 257 points and peaks inside the band") {
    sfec::SincLayer<double> layer(1, 251, 16000.0);
    layer.theta_low = Tensor<double>(Shape{1}, {950.0});
    layer.theta_band = Tensor<double>(Shape{1}, {950.0});
    auto mags = layer.magnitude_response(0);
    REQUIRE(mags.size() == 257);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < mags.size(); ++i)
        if (mags[i] > mags[peak]) peak = i;
    const double peak_hz = 8000.0 * double(peak) / 256.0;
    CHECK(peak_hz > 1000.0);
    CHECK(peak_hz < 2000.0);
}

TEST_SUITE_END();
