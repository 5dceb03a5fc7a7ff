#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sfec/tensor.hpp"

// Forward op family with reverse-mode rules. Elementwise binaries accept
// equal shapes or a one-element scalar operand; there is no general
// broadcasting. All ops reject empty tensors by construction (tensors cannot
// be empty) and name both shapes on a mismatch.

namespace sfec {

namespace detail {

template <typename T>
inline void accumulate(const std::shared_ptr<TapeNode<T>>& p, const std::vector<T>& contrib) {
    if (!p) return;
    for (std::size_t i = 0; i < contrib.size(); ++i) p->grad[i] += contrib[i];
}

inline void check_same_shape(const char* op, const Shape& a, const Shape& b) {
    if (a != b) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                                    shape_str(b));
    }
}

}  // namespace detail

// --- elementwise binaries ---------------------------------------------------

namespace detail {

enum class BinKind { add, sub, mul };

template <typename T>
Tensor<T> binary_op(const char* name, BinKind kind, const Tensor<T>& a, const Tensor<T>& b) {
    const bool a_scalar = a.size() == 1;
    const bool b_scalar = b.size() == 1;
    if (!(a.shape() == b.shape() || a_scalar || b_scalar))
        check_same_shape(name, a.shape(), b.shape());

    const auto& av = a.values();
    const auto& bv = b.values();
    const std::size_t n = std::max(av.size(), bv.size());
    std::vector<T> out(n);
    auto ai = [&](std::size_t i) { return a_scalar ? av[0] : av[i]; };
    auto bi = [&](std::size_t i) { return b_scalar ? bv[0] : bv[i]; };
    switch (kind) {
        case BinKind::add:
            for (std::size_t i = 0; i < n; ++i) out[i] = ai(i) + bi(i);
            break;
        case BinKind::sub:
            for (std::size_t i = 0; i < n; ++i) out[i] = ai(i) - bi(i);
            break;
        case BinKind::mul:
            for (std::size_t i = 0; i < n; ++i) out[i] = ai(i) * bi(i);
            break;
    }
    Tensor<T> y(av.size() >= bv.size() ? a.shape() : b.shape(), std::move(out));

    auto adata = a.storage();
    auto bdata = b.storage();
    tape_op(y, name, {a, b}, [=](const auto& parents) {
        return [=](const std::vector<T>& g) {
            const auto& pa = parents[0];
            const auto& pb = parents[1];
            if (pa) {
                if (a_scalar && g.size() > 1) {
                    T s = 0;
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        T gi = kind == BinKind::mul ? g[i] * (*bdata)[b_scalar ? 0 : i] : g[i];
                        s += gi;
                    }
                    pa->grad[0] += s;
                } else {
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        T gi = kind == BinKind::mul ? g[i] * (b_scalar ? (*bdata)[0] : (*bdata)[i])
                                                    : g[i];
                        pa->grad[i] += gi;
                    }
                }
            }
            if (pb) {
                const T sign = kind == BinKind::sub ? T(-1) : T(1);
                if (b_scalar && g.size() > 1) {
                    T s = 0;
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        T gi = kind == BinKind::mul ? g[i] * (*adata)[a_scalar ? 0 : i] : g[i];
                        s += gi;
                    }
                    pb->grad[0] += sign * s;
                } else {
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        T gi = kind == BinKind::mul ? g[i] * (a_scalar ? (*adata)[0] : (*adata)[i])
                                                    : g[i];
                        pb->grad[i] += sign * gi;
                    }
                }
            }
        };
    });
    return y;
}

}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op("add", detail::BinKind::add, a, b);
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op("sub", detail::BinKind::sub, a, b);
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op("mul", detail::BinKind::mul, a, b);
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
    std::vector<T> out(a.values());
    for (T& v : out) v += s;
    Tensor<T> y(a.shape(), std::move(out));
    detail::tape_op(y, "add_scalar", {a}, [](const auto& parents) {
        return [parents](const std::vector<T>& g) { detail::accumulate(parents[0], g); };
    });
    return y;
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& a, T s) {
    std::vector<T> out(a.values());
    for (T& v : out) v *= s;
    Tensor<T> y(a.shape(), std::move(out));
    detail::tape_op(y, "mul_scalar", {a}, [s](const auto& parents) {
        return [parents, s](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t i = 0; i < g.size(); ++i) p->grad[i] += g[i] * s;
        };
    });
    return y;
}

template <typename T>
Tensor<T> neg(const Tensor<T>& a) {
    return mul_scalar(a, T(-1));
}

// --- unary activations ------------------------------------------------------

namespace detail {

template <typename T, typename Fwd, typename MakeBwd>
Tensor<T> unary_op(const char* name, const Tensor<T>& a, Fwd fwd, MakeBwd make_bwd) {
    const auto& av = a.values();
    std::vector<T> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
    Tensor<T> y(a.shape(), std::move(out));
    tape_op(y, name, {a}, [&](const auto& parents) { return make_bwd(parents, y.storage()); });
    return y;
}

}  // namespace detail

template <typename T>
Tensor<T> tanh_t(const Tensor<T>& a) {
    return detail::unary_op(
        "tanh", a, [](T x) { return std::tanh(x); },
        [](const auto& parents, const auto& ydata) {
            return [=](const std::vector<T>& g) {
                if (const auto& p = parents[0])
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        T y = (*ydata)[i];
                        p->grad[i] += g[i] * (T(1) - y * y);
                    }
            };
        });
}

template <typename T>
Tensor<T> sigmoid_t(const Tensor<T>& a) {
    return detail::unary_op(
        "sigmoid", a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
        [](const auto& parents, const auto& ydata) {
            return [=](const std::vector<T>& g) {
                if (const auto& p = parents[0])
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        T y = (*ydata)[i];
                        p->grad[i] += g[i] * y * (T(1) - y);
                    }
            };
        });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& a, T slope = T(0.01)) {
    auto xdata = a.storage();
    return detail::unary_op(
        "leaky_relu", a, [slope](T x) { return x > T(0) ? x : slope * x; },
        [xdata, slope](const auto& parents, const auto&) {
            return [=](const std::vector<T>& g) {
                if (const auto& p = parents[0])
                    for (std::size_t i = 0; i < g.size(); ++i)
                        p->grad[i] += g[i] * ((*xdata)[i] > T(0) ? T(1) : slope);
            };
        });
}

template <typename T>
Tensor<T> abs_t(const Tensor<T>& a) {
    auto xdata = a.storage();
    return detail::unary_op(
        "abs", a, [](T x) { return std::abs(x); },
        [xdata](const auto& parents, const auto&) {
            return [=](const std::vector<T>& g) {
                if (const auto& p = parents[0])
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        T x = (*xdata)[i];
                        T s = x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0));
                        p->grad[i] += g[i] * s;
                    }
            };
        });
}

// --- softmax (last axis) ----------------------------------------------------

/// Row-wise softmax over the last axis (rank 1 or 2), stabilized by
/// max-subtraction so finite inputs always produce finite rows summing to 1.
template <typename T>
Tensor<T> softmax(const Tensor<T>& a) {
    if (a.rank() < 1 || a.rank() > 2)
        throw std::invalid_argument("softmax: rank " + std::to_string(a.rank()) + " unsupported");
    const std::size_t cols = a.shape().back();
    const std::size_t rows = a.size() / cols;
    const auto& av = a.values();
    std::vector<T> out(av.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const T* x = av.data() + r * cols;
        T* y = out.data() + r * cols;
        T mx = x[0];
        for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
        T sum = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            y[c] = std::exp(x[c] - mx);
            sum += y[c];
        }
        for (std::size_t c = 0; c < cols; ++c) y[c] /= sum;
    }
    Tensor<T> y(a.shape(), std::move(out));
    auto ydata = y.storage();
    detail::tape_op(y, "softmax", {a}, [&](const auto& parents) {
        return [parents, ydata, rows, cols](const std::vector<T>& g) {
            if (const auto& p = parents[0]) {
                for (std::size_t r = 0; r < rows; ++r) {
                    const T* yv = ydata->data() + r * cols;
                    const T* gv = g.data() + r * cols;
                    T dot = 0;
                    for (std::size_t c = 0; c < cols; ++c) dot += gv[c] * yv[c];
                    for (std::size_t c = 0; c < cols; ++c)
                        p->grad[r * cols + c] += yv[c] * (gv[c] - dot);
                }
            }
        };
    });
    return y;
}

// --- reductions -------------------------------------------------------------

template <typename T>
Tensor<T> sum_all(const Tensor<T>& a) {
    T s = 0;
    for (T v : a.values()) s += v;
    Tensor<T> y = Tensor<T>::scalar(s);
    detail::tape_op(y, "sum_all", {a}, [&](const auto& parents) {
        std::size_t n = a.size();
        return [parents, n](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t i = 0; i < n; ++i) p->grad[i] += g[0];
        };
    });
    return y;
}

namespace detail {

template <typename T>
Tensor<T> reduce_axis(const char* name, const Tensor<T>& a, std::size_t axis, bool mean) {
    if (a.rank() == 1) {
        if (axis != 0) throw std::invalid_argument(std::string(name) + ": axis out of range");
        Tensor<T> s = sum_all(a);
        return mean ? mul_scalar(s, T(1) / static_cast<T>(a.size())) : s;
    }
    if (a.rank() != 2 || axis > 1)
        throw std::invalid_argument(std::string(name) + ": expects rank 1 or 2, axis 0 or 1, got " +
                                    shape_str(a.shape()) + " axis " + std::to_string(axis));
    const std::size_t rows = a.dim(0), cols = a.dim(1);
    const auto& av = a.values();
    const std::size_t out_n = axis == 0 ? cols : rows;
    const std::size_t red_n = axis == 0 ? rows : cols;
    std::vector<T> out(out_n, T(0));
    if (axis == 0) {
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) out[c] += av[r * cols + c];
    } else {
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) out[r] += av[r * cols + c];
    }
    const T scale = mean ? T(1) / static_cast<T>(red_n) : T(1);
    if (mean)
        for (T& v : out) v *= scale;
    Tensor<T> y(Shape{out_n}, std::move(out));
    tape_op(y, name, {a}, [&](const auto& parents) {
        return [parents, rows, cols, axis, scale](const std::vector<T>& g) {
            if (const auto& p = parents[0]) {
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c)
                        p->grad[r * cols + c] += g[axis == 0 ? c : r] * scale;
            }
        };
    });
    return y;
}

}  // namespace detail

template <typename T>
Tensor<T> sum_axis(const Tensor<T>& a, std::size_t axis) {
    return detail::reduce_axis("sum_axis", a, axis, false);
}
template <typename T>
Tensor<T> mean_axis(const Tensor<T>& a, std::size_t axis) {
    return detail::reduce_axis("mean_axis", a, axis, true);
}

// --- max reductions ---------------------------------------------------------

/// Global max along an axis. Gradient goes to the first maximum.
template <typename T>
Tensor<T> max_axis(const Tensor<T>& a, std::size_t axis) {
    const std::size_t rows = a.rank() == 1 ? a.size() : a.dim(0);
    const std::size_t cols = a.rank() == 1 ? 1 : a.dim(1);
    if (a.rank() > 2 || axis >= a.rank())
        throw std::invalid_argument("max_axis: bad axis for " + shape_str(a.shape()));
    const auto& av = a.values();
    std::size_t out_n = a.rank() == 1 ? 1 : (axis == 0 ? cols : rows);
    std::vector<T> out(out_n);
    std::vector<std::size_t> arg(out_n);
    auto scan = [&](std::size_t o, std::size_t base, std::size_t stride, std::size_t n) {
        T best = av[base];
        std::size_t bi = base;
        for (std::size_t i = 1; i < n; ++i) {
            T v = av[base + i * stride];
            if (v > best) {
                best = v;
                bi = base + i * stride;
            }
        }
        out[o] = best;
        arg[o] = bi;
    };
    if (a.rank() == 1) {
        scan(0, 0, 1, rows);
    } else if (axis == 0) {
        for (std::size_t c = 0; c < cols; ++c) scan(c, c, cols, rows);
    } else {
        for (std::size_t r = 0; r < rows; ++r) scan(r, r * cols, 1, cols);
    }
    Tensor<T> y(Shape{out_n}, std::move(out));
    detail::tape_op(y, "max_axis", {a}, [&](const auto& parents) {
        return [parents, arg](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t o = 0; o < g.size(); ++o) p->grad[arg[o]] += g[o];
        };
    });
    return y;
}

/// Non-overlapping max pooling with stride = width along the last axis.
/// Output length floor(T / width); a trailing remainder is dropped.
template <typename T>
Tensor<T> max_pool1d(const Tensor<T>& a, std::size_t width) {
    if (width == 0) throw std::invalid_argument("max_pool1d: width 0");
    const std::size_t tlen = a.shape().back();
    const std::size_t chans = a.size() / tlen;
    if (tlen < width)
        throw std::invalid_argument("max_pool1d: width " + std::to_string(width) +
                                    " exceeds axis length " + std::to_string(tlen));
    const std::size_t out_t = tlen / width;
    const auto& av = a.values();
    std::vector<T> out(chans * out_t);
    std::vector<std::size_t> arg(out.size());
    for (std::size_t c = 0; c < chans; ++c) {
        for (std::size_t t = 0; t < out_t; ++t) {
            std::size_t base = c * tlen + t * width;
            T best = av[base];
            std::size_t bi = base;
            for (std::size_t k = 1; k < width; ++k)
                if (av[base + k] > best) {
                    best = av[base + k];
                    bi = base + k;
                }
            out[c * out_t + t] = best;
            arg[c * out_t + t] = bi;
        }
    }
    Shape os = a.shape();
    os.back() = out_t;
    Tensor<T> y(std::move(os), std::move(out));
    detail::tape_op(y, "max_pool1d", {a}, [&](const auto& parents) {
        return [parents, arg](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t o = 0; o < g.size(); ++o) p->grad[arg[o]] += g[o];
        };
    });
    return y;
}

// --- shape ops --------------------------------------------------------------

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
    if (shape_numel(shape) != a.size())
        throw std::invalid_argument("reshape: " + shape_str(a.shape()) + " to " + shape_str(shape) +
                                    " changes element count");
    Tensor<T> y(std::move(shape), std::vector<T>(a.values()));
    detail::tape_op(y, "reshape", {a}, [](const auto& parents) {
        return [parents](const std::vector<T>& g) { detail::accumulate(parents[0], g); };
    });
    return y;
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& a) {
    return reshape(a, Shape{a.size()});
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
    if (a.rank() != 2) throw std::invalid_argument("transpose: expects rank 2, got " + shape_str(a.shape()));
    const std::size_t rows = a.dim(0), cols = a.dim(1);
    const auto& av = a.values();
    std::vector<T> out(av.size());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = av[r * cols + c];
    Tensor<T> y(Shape{cols, rows}, std::move(out));
    detail::tape_op(y, "transpose", {a}, [&](const auto& parents) {
        return [parents, rows, cols](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c)
                        p->grad[r * cols + c] += g[c * rows + r];
        };
    });
    return y;
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    const std::size_t rank = parts[0].rank();
    if (rank > 2 || axis >= rank)
        throw std::invalid_argument("concat: bad axis " + std::to_string(axis) + " for rank " +
                                    std::to_string(rank));
    for (const auto& p : parts) {
        if (p.rank() != rank)
            throw std::invalid_argument("concat: rank mismatch " + shape_str(parts[0].shape()) +
                                        " vs " + shape_str(p.shape()));
        for (std::size_t d = 0; d < rank; ++d)
            if (d != axis && p.dim(d) != parts[0].dim(d))
                throw std::invalid_argument("concat: shape mismatch " + shape_str(parts[0].shape()) +
                                            " vs " + shape_str(p.shape()));
    }

    Shape os = parts[0].shape();
    os[axis] = 0;
    for (const auto& p : parts) os[axis] += p.dim(axis);
    std::vector<T> out(shape_numel(os));

    // rows/cols of the output grid; rank-1 treated as a single row (axis 0
    // concat of vectors lays them end to end).
    std::size_t out_cols = rank == 2 ? os[1] : os[0];
    std::size_t col_off = 0, row_off = 0;
    std::vector<std::size_t> offsets;  // flat offset of each part's first element
    offsets.reserve(parts.size());
    for (const auto& p : parts) {
        std::size_t p_rows = rank == 2 ? p.dim(0) : 1;
        std::size_t p_cols = rank == 2 ? p.dim(1) : p.dim(0);
        std::size_t base = (rank == 2 && axis == 1) || rank == 1 ? col_off : row_off * out_cols;
        offsets.push_back(base);
        const auto& pv = p.values();
        for (std::size_t r = 0; r < p_rows; ++r)
            for (std::size_t c = 0; c < p_cols; ++c) out[base + r * out_cols + c] = pv[r * p_cols + c];
        if ((rank == 2 && axis == 1) || rank == 1)
            col_off += p_cols;
        else
            row_off += p_rows;
    }

    Tensor<T> y(std::move(os), std::move(out));
    detail::tape_op(y, "concat", parts, [&](const auto& parent_nodes) {
        std::vector<std::pair<std::size_t, std::size_t>> dims;  // rows, cols per part
        for (const auto& p : parts)
            dims.emplace_back(rank == 2 ? p.dim(0) : 1, rank == 2 ? p.dim(1) : p.dim(0));
        return [parent_nodes, offsets, dims, out_cols](const std::vector<T>& g) {
            for (std::size_t k = 0; k < parent_nodes.size(); ++k) {
                const auto& p = parent_nodes[k];
                if (!p) continue;
                auto [p_rows, p_cols] = dims[k];
                for (std::size_t r = 0; r < p_rows; ++r)
                    for (std::size_t c = 0; c < p_cols; ++c)
                        p->grad[r * p_cols + c] += g[offsets[k] + r * out_cols + c];
            }
        };
    });
    return y;
}

template <typename T>
std::vector<Tensor<T>> split(const Tensor<T>& a, std::size_t axis,
                             const std::vector<std::size_t>& sizes) {
    const std::size_t rank = a.rank();
    if (rank > 2 || axis >= rank)
        throw std::invalid_argument("split: bad axis " + std::to_string(axis) + " for " +
                                    shape_str(a.shape()));
    std::size_t total = 0;
    for (std::size_t s : sizes) total += s;
    if (total != a.dim(axis))
        throw std::invalid_argument("split: sizes sum " + std::to_string(total) +
                                    " != axis length " + std::to_string(a.dim(axis)));

    const std::size_t out_cols = rank == 2 ? a.dim(1) : a.dim(0);
    const auto& av = a.values();
    std::vector<Tensor<T>> parts;
    parts.reserve(sizes.size());
    std::size_t col_off = 0, row_off = 0;
    for (std::size_t s : sizes) {
        std::size_t p_rows = rank == 2 ? (axis == 0 ? s : a.dim(0)) : 1;
        std::size_t p_cols = rank == 2 ? (axis == 0 ? a.dim(1) : s) : s;
        std::size_t base = (rank == 2 && axis == 1) || rank == 1 ? col_off : row_off * out_cols;
        std::vector<T> buf(p_rows * p_cols);
        for (std::size_t r = 0; r < p_rows; ++r)
            for (std::size_t c = 0; c < p_cols; ++c) buf[r * p_cols + c] = av[base + r * out_cols + c];
        Shape ps = rank == 2 ? Shape{p_rows, p_cols} : Shape{p_cols};
        Tensor<T> part(std::move(ps), std::move(buf));
        detail::tape_op(part, "split", {a}, [&](const auto& parents) {
            return [parents, base, p_rows, p_cols, out_cols](const std::vector<T>& g) {
                if (const auto& p = parents[0])
                    for (std::size_t r = 0; r < p_rows; ++r)
                        for (std::size_t c = 0; c < p_cols; ++c)
                            p->grad[base + r * out_cols + c] += g[r * p_cols + c];
            };
        });
        parts.push_back(std::move(part));
        if ((rank == 2 && axis == 1) || rank == 1)
            col_off += p_cols;
        else
            row_off += p_rows;
    }
    return parts;
}

/// Zero padding at both ends of the last axis.
template <typename T>
Tensor<T> pad_last(const Tensor<T>& a, std::size_t left, std::size_t right) {
    if (left + right == 0) return a;
    const std::size_t tlen = a.shape().back();
    const std::size_t chans = a.size() / tlen;
    const std::size_t out_t = tlen + left + right;
    const auto& av = a.values();
    std::vector<T> out(chans * out_t, T(0));
    for (std::size_t c = 0; c < chans; ++c)
        for (std::size_t t = 0; t < tlen; ++t) out[c * out_t + left + t] = av[c * tlen + t];
    Shape os = a.shape();
    os.back() = out_t;
    Tensor<T> y(std::move(os), std::move(out));
    detail::tape_op(y, "pad_last", {a}, [&](const auto& parents) {
        return [parents, chans, tlen, out_t, left](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t c = 0; c < chans; ++c)
                    for (std::size_t t = 0; t < tlen; ++t)
                        p->grad[c * tlen + t] += g[c * out_t + left + t];
        };
    });
    return y;
}

template <typename T>
Tensor<T> slice_last(const Tensor<T>& a, std::size_t start, std::size_t len) {
    const std::size_t tlen = a.shape().back();
    if (len == 0 || start + len > tlen)
        throw std::invalid_argument("slice_last: [" + std::to_string(start) + "," +
                                    std::to_string(start + len) + ") out of range for axis length " +
                                    std::to_string(tlen));
    const std::size_t chans = a.size() / tlen;
    const auto& av = a.values();
    std::vector<T> out(chans * len);
    for (std::size_t c = 0; c < chans; ++c)
        for (std::size_t t = 0; t < len; ++t) out[c * len + t] = av[c * tlen + start + t];
    Shape os = a.shape();
    os.back() = len;
    Tensor<T> y(std::move(os), std::move(out));
    detail::tape_op(y, "slice_last", {a}, [&](const auto& parents) {
        return [parents, chans, tlen, len, start](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t c = 0; c < chans; ++c)
                    for (std::size_t t = 0; t < len; ++t)
                        p->grad[c * tlen + start + t] += g[c * len + t];
        };
    });
    return y;
}

// --- matmul -----------------------------------------------------------------

/// Matrix product, [m,k]x[k,n] -> [m,n]; one operand may be rank 1 and is
/// treated as a column ([m,k]x[k] -> [m]) or row ([k]x[k,n] -> [n]) vector.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    const bool a_vec = a.rank() == 1;
    const bool b_vec = b.rank() == 1;
    if (a.rank() > 2 || b.rank() > 2 || (a_vec && b_vec))
        throw std::invalid_argument("matmul: unsupported ranks " + shape_str(a.shape()) + " x " +
                                    shape_str(b.shape()));
    const std::size_t m = a_vec ? 1 : a.dim(0);
    const std::size_t k = a_vec ? a.dim(0) : a.dim(1);
    const std::size_t k2 = b.dim(0);
    const std::size_t n = b_vec ? 1 : b.dim(1);
    if (k != k2)
        throw std::invalid_argument("matmul: inner dimensions differ: " + shape_str(a.shape()) +
                                    " x " + shape_str(b.shape()));

    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<T> out(m * n, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = av.data() + i * k;
        T* orow = out.data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const T aik = arow[kk];
            const T* brow = bv.data() + kk * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }
    Shape os = a_vec ? Shape{n} : (b_vec ? Shape{m} : Shape{m, n});
    Tensor<T> y(std::move(os), std::move(out));

    auto adata = a.storage();
    auto bdata = b.storage();
    detail::tape_op(y, "matmul", {a, b}, [&](const auto& parents) {
        return [parents, adata, bdata, m, k, n](const std::vector<T>& g) {
            if (const auto& pa = parents[0]) {
                // dA = G * B^T
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        T s = 0;
                        const T* grow = g.data() + i * n;
                        const T* brow = bdata->data() + kk * n;
                        for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
                        pa->grad[i * k + kk] += s;
                    }
            }
            if (const auto& pb = parents[1]) {
                // dB = A^T * G
                for (std::size_t i = 0; i < m; ++i) {
                    const T* arow = adata->data() + i * k;
                    const T* grow = g.data() + i * n;
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        const T aik = arow[kk];
                        T* brow = pb->grad.data() + kk * n;
                        for (std::size_t j = 0; j < n; ++j) brow[j] += aik * grow[j];
                    }
                }
            }
        };
    });
    return y;
}

// --- 1-D convolution (fused primitive) --------------------------------------

/// Valid-mode 1-D cross-correlation: y[o,t] = bias[o] + sum_{i,k} x[i,t+k] K[o,i,k].
/// No kernel flip. Pass an undefined tensor to skip the bias.
template <typename T>
Tensor<T> conv1d_valid(const Tensor<T>& x, const Tensor<T>& kernels, const Tensor<T>& bias) {
    if (x.rank() != 2 || kernels.rank() != 3)
        throw std::invalid_argument("conv1d: expects x [in,T] and kernels [out,in,w], got " +
                                    shape_str(x.shape()) + " and " + shape_str(kernels.shape()));
    const std::size_t in_ch = x.dim(0), tlen = x.dim(1);
    const std::size_t out_ch = kernels.dim(0), kin = kernels.dim(1), w = kernels.dim(2);
    if (kin != in_ch)
        throw std::invalid_argument("conv1d: channel mismatch, x has " + std::to_string(in_ch) +
                                    " channels but kernels expect " + std::to_string(kin));
    if (w > tlen)
        throw std::invalid_argument("conv1d: kernel width " + std::to_string(w) +
                                    " exceeds input length " + std::to_string(tlen));
    const bool use_bias = bias.defined();
    if (use_bias && bias.size() != out_ch)
        throw std::invalid_argument("conv1d: bias " + shape_str(bias.shape()) + " does not match " +
                                    std::to_string(out_ch) + " output channels");

    const std::size_t out_t = tlen - w + 1;
    const auto& xv = x.values();
    const auto& kv = kernels.values();
    std::vector<T> out(out_ch * out_t, T(0));
    for (std::size_t o = 0; o < out_ch; ++o) {
        T* orow = out.data() + o * out_t;
        for (std::size_t i = 0; i < in_ch; ++i) {
            const T* xrow = xv.data() + i * tlen;
            const T* krow = kv.data() + (o * in_ch + i) * w;
            for (std::size_t k = 0; k < w; ++k) {
                const T coef = krow[k];
                const T* xs = xrow + k;
                for (std::size_t t = 0; t < out_t; ++t) orow[t] += coef * xs[t];
            }
        }
        if (use_bias) {
            const T bo = bias.values()[o];
            for (std::size_t t = 0; t < out_t; ++t) orow[t] += bo;
        }
    }
    Tensor<T> y(Shape{out_ch, out_t}, std::move(out));

    auto xdata = x.storage();
    auto kdata = kernels.storage();
    std::vector<Tensor<T>> inputs = use_bias ? std::vector<Tensor<T>>{x, kernels, bias}
                                             : std::vector<Tensor<T>>{x, kernels};
    detail::tape_op(y, "conv1d", inputs, [&](const auto& parents) {
        return [parents, xdata, kdata, in_ch, tlen, out_ch, w, out_t,
                use_bias](const std::vector<T>& g) {
            if (const auto& px = parents[0]) {
                for (std::size_t o = 0; o < out_ch; ++o) {
                    const T* grow = g.data() + o * out_t;
                    for (std::size_t i = 0; i < in_ch; ++i) {
                        T* dx = px->grad.data() + i * tlen;
                        const T* krow = kdata->data() + (o * in_ch + i) * w;
                        for (std::size_t k = 0; k < w; ++k) {
                            const T coef = krow[k];
                            T* dxs = dx + k;
                            for (std::size_t t = 0; t < out_t; ++t) dxs[t] += coef * grow[t];
                        }
                    }
                }
            }
            if (const auto& pk = parents[1]) {
                for (std::size_t o = 0; o < out_ch; ++o) {
                    const T* grow = g.data() + o * out_t;
                    for (std::size_t i = 0; i < in_ch; ++i) {
                        const T* xrow = xdata->data() + i * tlen;
                        T* dk = pk->grad.data() + (o * in_ch + i) * w;
                        for (std::size_t k = 0; k < w; ++k) {
                            T s = 0;
                            const T* xs = xrow + k;
                            for (std::size_t t = 0; t < out_t; ++t) s += grow[t] * xs[t];
                            dk[k] += s;
                        }
                    }
                }
            }
            if (use_bias) {
                if (const auto& pb = parents[2]) {
                    for (std::size_t o = 0; o < out_ch; ++o) {
                        T s = 0;
                        const T* grow = g.data() + o * out_t;
                        for (std::size_t t = 0; t < out_t; ++t) s += grow[t];
                        pb->grad[o] += s;
                    }
                }
            }
        };
    });
    return y;
}

// --- embedding gather -------------------------------------------------------

/// Row gather from a [V,E] table. Indices are data, not tape inputs; the
/// gradient scatter-adds into the table rows.
template <typename T>
Tensor<T> embedding_rows(const Tensor<T>& table, const std::vector<std::size_t>& indices) {
    if (table.rank() != 2)
        throw std::invalid_argument("embedding_rows: table must be rank 2, got " +
                                    shape_str(table.shape()));
    const std::size_t vocab = table.dim(0), width = table.dim(1);
    const auto& tv = table.values();
    std::vector<T> out(indices.size() * width);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= vocab)
            throw std::invalid_argument("embedding_rows: index " + std::to_string(indices[r]) +
                                        " out of range for vocabulary of " + std::to_string(vocab));
        const T* src = tv.data() + indices[r] * width;
        std::copy(src, src + width, out.data() + r * width);
    }
    Tensor<T> y(Shape{indices.size(), width}, std::move(out));
    detail::tape_op(y, "embedding_rows", {table}, [&](const auto& parents) {
        return [parents, indices, width](const std::vector<T>& g) {
            if (const auto& p = parents[0])
                for (std::size_t r = 0; r < indices.size(); ++r)
                    for (std::size_t c = 0; c < width; ++c)
                        p->grad[indices[r] * width + c] += g[r * width + c];
        };
    });
    return y;
}

// --- small conveniences -----------------------------------------------------

template <typename T>
Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) {
    return add(a, b);
}
template <typename T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) {
    return sub(a, b);
}
template <typename T>
Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) {
    return mul(a, b);
}

template <typename T>
std::size_t argmax(const std::vector<T>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

template <typename T>
bool all_finite(const std::vector<T>& v) {
    for (T x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace sfec
