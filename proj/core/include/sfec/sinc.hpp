#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "sfec/layers.hpp"
#include "sfec/ops.hpp"
#include "sfec/tensor.hpp"

namespace sfec {

/// Hamming window of odd length, built as one half plus mirror so the array
/// is exactly palindromic and the center tap is exactly 1.
template <typename T>
std::vector<T> hamming_window(std::size_t length) {
    if (length % 2 == 0) throw std::invalid_argument("hamming: length must be odd");
    std::vector<T> w(length);
    const std::size_t half = length / 2;
    for (std::size_t m = 0; m < half; ++m) {
        const T v = T(0.54) - T(0.46) * std::cos(T(2) * std::numbers::pi_v<T> * static_cast<T>(m) /
                                                 static_cast<T>(length - 1));
        w[m] = v;
        w[length - 1 - m] = v;
    }
    w[half] = T(1);
    return w;
}

namespace detail {

// shared by forward and backward: effective band edges for one filter.
// f1 is additionally capped at nyq - b_min so f2 > f1 holds for every theta,
// not only those reachable from a sane initialization.
template <typename T>
struct SincBand {
    T f1, f2;
    bool f1_clamped;  // f1 hit its ceiling; theta_low gradient blocked
    bool f2_clamped;  // f2 hit Nyquist; bandwidth gradient blocked
};

template <typename T>
SincBand<T> effective_band(T theta_low, T theta_band, T fs, T f_min, T b_min) {
    const T nyq = fs / T(2);
    const T f1_raw = f_min + std::abs(theta_low);
    const T f1_cap = nyq - b_min;
    const bool c1 = f1_raw > f1_cap;
    const T f1 = c1 ? f1_cap : f1_raw;
    const T hi_raw = f1 + b_min + std::abs(theta_band);
    const bool c2 = hi_raw > nyq;
    return {f1, c2 ? nyq : hi_raw, c1, c2};
}

template <typename T>
T sign0(T v) {
    return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
}

}  // namespace detail

/// Windowed band-pass FIR kernels from learnable cutoff parameters.
/// For tap offset n in [-(L-1)/2, (L-1)/2]:
///   k[n] = (2 f2~ sinc(2 pi f2~ n) - 2 f1~ sinc(2 pi f1~ n)) * window[n]
/// with f~ = f / fs, sinc(x) = sin(x)/x, sinc(0) = 1. Kernels are built as one
/// half plus mirror, so k[i] == k[L-1-i] holds bit-exactly. Differentiable in
/// theta_low and theta_band.
template <typename T>
Tensor<T> build_sinc_filters(const Tensor<T>& theta_low, const Tensor<T>& theta_band,
                             const std::vector<T>& window, T fs, T f_min, T b_min) {
    if (fs <= T(0)) throw std::invalid_argument("sinc: sample rate must be positive");
    if (window.size() % 2 == 0) throw std::invalid_argument("sinc: filter length must be odd");
    if (theta_low.rank() != 1 || theta_low.shape() != theta_band.shape())
        throw std::invalid_argument("sinc: theta shapes " + shape_str(theta_low.shape()) + " vs " +
                                    shape_str(theta_band.shape()));

    const std::size_t nfilt = theta_low.size();
    const std::size_t length = window.size();
    const std::size_t half = length / 2;
    const T pi = std::numbers::pi_v<T>;

    std::vector<T> out(nfilt * length);
    for (std::size_t f = 0; f < nfilt; ++f) {
        const auto band = detail::effective_band(theta_low.at(f), theta_band.at(f), fs, f_min, b_min);
        const T w1 = T(2) * pi * band.f1 / fs;
        const T w2 = T(2) * pi * band.f2 / fs;
        T* k = out.data() + f * length;
        k[half] = T(2) * (band.f2 - band.f1) / fs * window[half];
        for (std::size_t n = 1; n <= half; ++n) {
            const T x = static_cast<T>(n);
            const T v = (std::sin(w2 * x) - std::sin(w1 * x)) / (pi * x) * window[half + n];
            k[half + n] = v;
            k[half - n] = v;
        }
    }
    Tensor<T> y(Shape{nfilt, length}, std::move(out));

    auto tl = theta_low.storage();
    auto tb = theta_band.storage();
    detail::tape_op(y, "build_sinc_filters", {theta_low, theta_band}, [&](const auto& parents) {
        return [parents, tl, tb, window, fs, f_min, b_min, nfilt, length, half,
                pi](const std::vector<T>& g) {
            const auto& pl = parents[0];
            const auto& pb = parents[1];
            if (!pl && !pb) return;
            for (std::size_t f = 0; f < nfilt; ++f) {
                const T thl = (*tl)[f], thb = (*tb)[f];
                const auto band = detail::effective_band(thl, thb, fs, f_min, b_min);
                const T w1 = T(2) * pi * band.f1 / fs;
                const T w2 = T(2) * pi * band.f2 / fs;
                const T* grow = g.data() + f * length;

                // dk[n]/df~ for each low-pass term is 2 cos(2 pi f~ n) * window[n]
                T acc1 = 0, acc2 = 0;  // dL/df1~, dL/df2~
                acc1 += grow[half] * T(-2) * window[half];
                acc2 += grow[half] * T(2) * window[half];
                for (std::size_t n = 1; n <= half; ++n) {
                    const T x = static_cast<T>(n);
                    const T gn = grow[half + n] + grow[half - n];
                    const T win = window[half + n];
                    acc1 += gn * T(-2) * std::cos(w1 * x) * win;
                    acc2 += gn * T(2) * std::cos(w2 * x) * win;
                }
                const T d_f1 = acc1 / fs;  // dL/d(f1 in Hz)
                const T d_f2 = band.f2_clamped ? T(0) : acc2 / fs;
                // f1 = f_min + |thl| (capped); f2 = f1 + b_min + |thb| (capped)
                if (pl && !band.f1_clamped) pl->grad[f] += (d_f1 + d_f2) * detail::sign0(thl);
                if (pb) pb->grad[f] += d_f2 * detail::sign0(thb);
            }
        };
    });
    return y;
}

/// Learnable sinc filterbank front end.
template <typename T>
struct SincLayer {
    Tensor<T> theta_low, theta_band;  // [F], Hz-domain offsets
    std::size_t filters = 0;
    std::size_t length = 0;
    T sample_rate = T(16000);
    T f_min = T(50), b_min = T(50);
    std::vector<T> window;

    SincLayer() = default;
    SincLayer(std::size_t F, std::size_t L, T fs, T fmin = T(50), T bmin = T(50))
        : filters(F), length(L), sample_rate(fs), f_min(fmin), b_min(bmin) {
        if (F < 1) throw std::invalid_argument("sinc: filter count must be >= 1");
        if (L % 2 == 0) throw std::invalid_argument("sinc: filter length must be odd");
        if (fs <= T(0)) throw std::invalid_argument("sinc: sample rate must be positive");
        if (fmin <= T(0) || bmin <= T(0) || fmin + bmin >= fs / T(2))
            throw std::invalid_argument("sinc: f_min/b_min leave no representable band below fs/2");
        window = hamming_window<T>(L);
        theta_low = Tensor<T>(Shape{F});
        theta_band = Tensor<T>(Shape{F});
        init_mel();
    }

    /// Band edges equally spaced on the mel scale between 30 Hz and fs/2.
    /// Edges below f_min or widths below b_min are unrepresentable with the
    /// |theta| offsets, so each edge is clamped to the nearest representable
    /// target before solving for theta.
    void init_mel() {
        auto mel = [](T f) { return T(2595) * std::log10(T(1) + f / T(700)); };
        auto imel = [](T m) { return T(700) * (std::pow(T(10), m / T(2595)) - T(1)); };
        const T lo = mel(T(30)), hi = mel(sample_rate / T(2));
        auto& thl = theta_low.mutable_values();
        auto& thb = theta_band.mutable_values();
        for (std::size_t i = 0; i < filters; ++i) {
            const T e1 = imel(lo + (hi - lo) * static_cast<T>(i) / static_cast<T>(filters));
            const T e2 = imel(lo + (hi - lo) * static_cast<T>(i + 1) / static_cast<T>(filters));
            const T f1_target = std::max(e1, f_min);
            const T width = std::max(e2 - f1_target, b_min);
            thl[i] = f1_target - f_min;
            thb[i] = width - b_min;
        }
    }

    Tensor<T> build() const {
        return build_sinc_filters(theta_low, theta_band, window, sample_rate, f_min, b_min);
    }

    /// x [T] -> [F, T-L+1], valid-mode correlation with the built kernels.
    Tensor<T> forward(const Tensor<T>& x) const {
        if (x.rank() != 1)
            throw std::invalid_argument("sinc: expects a flat waveform, got " + shape_str(x.shape()));
        if (x.size() < length)
            throw std::invalid_argument("sinc: chunk of " + std::to_string(x.size()) +
                                        " samples is shorter than filter length " +
                                        std::to_string(length));
        auto kernels = reshape(build(), Shape{filters, 1, length});
        return conv1d_valid(reshape(x, Shape{1, x.size()}), kernels, Tensor<T>{});
    }

    std::vector<std::pair<T, T>> effective_cutoffs() const {
        std::vector<std::pair<T, T>> bands(filters);
        for (std::size_t f = 0; f < filters; ++f) {
            const auto b =
                detail::effective_band(theta_low.at(f), theta_band.at(f), sample_rate, f_min, b_min);
            bands[f] = {b.f1, b.f2};
        }
        return bands;
    }

    /// Magnitude response of filter f sampled at `points` frequencies from DC
    /// to Nyquist inclusive.
    std::vector<T> magnitude_response(std::size_t f, std::size_t points = 257) const {
        NoGradGuard ng;
        auto kernels = build();
        std::vector<T> mags(points);
        for (std::size_t p = 0; p < points; ++p) {
            const T freq = sample_rate / T(2) * static_cast<T>(p) / static_cast<T>(points - 1);
            const T omega = T(2) * std::numbers::pi_v<T> * freq / sample_rate;
            T re = 0, im = 0;
            for (std::size_t n = 0; n < length; ++n) {
                const T v = kernels.at2(f, n);
                re += v * std::cos(omega * static_cast<T>(n));
                im -= v * std::sin(omega * static_cast<T>(n));
            }
            mags[p] = std::sqrt(re * re + im * im);
        }
        return mags;
    }

    void collect(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".theta_low", &theta_low});
        out.push_back({prefix + ".theta_band", &theta_band});
    }
};

}  // namespace sfec
