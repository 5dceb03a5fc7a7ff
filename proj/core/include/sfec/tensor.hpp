#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace sfec {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

// --- gradient recording mode (thread-local) ---------------------------------

namespace detail {
inline bool& grad_mode_flag() {
    thread_local bool enabled = true;
    return enabled;
}
}  // namespace detail

inline bool grad_enabled() { return detail::grad_mode_flag(); }
inline void set_grad_enabled(bool on) { detail::grad_mode_flag() = on; }

/// Disables tape recording for the enclosing scope (inference, finite differences).
struct NoGradGuard {
    NoGradGuard() : prev_(grad_enabled()) { set_grad_enabled(false); }
    ~NoGradGuard() { set_grad_enabled(prev_); }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

  private:
    bool prev_;
};

// --- tape -------------------------------------------------------------------

/// One node of the reverse-mode tape. Holds the op name, handles to the
/// parent nodes, a gradient accumulator matching the output, and a backward
/// function that routes the accumulated output gradient to the parents.
/// Parent handles may be null where an input was not recorded.
template <typename T>
struct TapeNode {
    const char* op = "leaf";
    std::vector<std::shared_ptr<TapeNode<T>>> parents;
    std::function<void(const std::vector<T>&)> backward;  // null for leaves
    std::vector<T> grad;
};

// --- tensor -----------------------------------------------------------------

/// Dense row-major tensor. Copies are shallow (shared storage); values are
/// treated as immutable once an op has consumed them. `mutable_values` exists
/// for construction-time fills and optimizer updates between steps.
template <typename T>
class Tensor {
  public:
    using Scalar = T;

    Tensor() = default;

    explicit Tensor(Shape shape) { reset_storage(std::move(shape)); }

    Tensor(Shape shape, std::vector<T> values) {
        if (shape_numel(shape) != values.size() || values.empty()) {
            throw std::invalid_argument("tensor: shape " + shape_str(shape) + " does not match " +
                                        std::to_string(values.size()) + " values");
        }
        shape_ = std::move(shape);
        data_ = std::make_shared<std::vector<T>>(std::move(values));
    }

    static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, T v) {
        Tensor t(std::move(shape));
        for (T& x : *t.data_) x = v;
        return t;
    }

    static Tensor uniform(Shape shape, T lo, T hi, std::mt19937_64& rng) {
        Tensor t(std::move(shape));
        std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
        for (T& x : *t.data_) x = static_cast<T>(dist(rng));
        return t;
    }

    bool defined() const { return data_ != nullptr; }
    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_ ? data_->size() : 0; }

    const std::vector<T>& values() const& {
        require_defined();
        return *data_;
    }

    // rvalue access returns a copy; a reference into a temporary's storage
    // would dangle as soon as the temporary dies
    std::vector<T> values() const&& {
        require_defined();
        return *data_;
    }

    std::vector<T>& mutable_values() {
        require_defined();
        return *data_;
    }

    T at(std::size_t i) const { return (*data_).at(i); }
    T at2(std::size_t r, std::size_t c) const {
        if (rank() != 2) throw std::invalid_argument("at2: tensor is not rank 2");
        return (*data_)[r * shape_[1] + c];
    }

    /// Extracts the single element of a one-element tensor.
    T value() const {
        require_defined();
        if (data_->size() != 1)
            throw std::invalid_argument("value: tensor " + shape_str(shape_) + " is not a scalar");
        return (*data_)[0];
    }

    /// Deep copy, not on the tape.
    Tensor clone() const {
        require_defined();
        return Tensor(shape_, std::vector<T>(*data_));
    }

    /// Shares storage, not on the tape.
    Tensor detached() const {
        Tensor t;
        t.shape_ = shape_;
        t.data_ = data_;
        return t;
    }

    /// Marks this tensor as a trainable leaf: attaches a persistent tape node
    /// whose accumulator collects d(loss)/d(this) across backward passes.
    Tensor& set_requires_grad(bool want) {
        require_defined();
        if (want) {
            if (!node_) {
                node_ = std::make_shared<TapeNode<T>>();
                node_->op = "leaf";
                node_->grad.assign(data_->size(), T(0));
            } else if (node_->backward) {
                throw std::invalid_argument("set_requires_grad: tensor is already an op output");
            }
            requires_grad_ = true;
        } else {
            requires_grad_ = false;
            node_.reset();
        }
        return *this;
    }

    bool requires_grad() const { return requires_grad_; }
    bool taped() const { return node_ != nullptr; }
    const std::shared_ptr<TapeNode<T>>& node() const { return node_; }
    const std::shared_ptr<std::vector<T>>& storage() const { return data_; }

    /// Attaches an op node. Also used by tests that build custom nodes.
    void set_node(std::shared_ptr<TapeNode<T>> n) {
        node_ = std::move(n);
        requires_grad_ = node_ != nullptr;
    }

    /// Copy of the accumulated gradient, shaped like this tensor.
    Tensor grad() const {
        if (!node_) throw std::invalid_argument("grad: tensor is not on the tape");
        return Tensor(shape_, std::vector<T>(node_->grad));
    }

    void zero_grad() {
        if (node_) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
    }

  private:
    void reset_storage(Shape shape) {
        std::size_t n = shape_numel(shape);
        if (n == 0 || shape.empty())
            throw std::invalid_argument("tensor: empty shape " + shape_str(shape) + " rejected");
        shape_ = std::move(shape);
        data_ = std::make_shared<std::vector<T>>(n, T(0));
    }

    void require_defined() const {
        if (!data_) throw std::invalid_argument("tensor: undefined");
    }

    Shape shape_;
    std::shared_ptr<std::vector<T>> data_;
    std::shared_ptr<TapeNode<T>> node_;
    bool requires_grad_ = false;
};

// --- backward ---------------------------------------------------------------

/// Reverse-mode sweep from a scalar loss. Visits each reachable node exactly
/// once in reverse topological order. Leaf accumulators are not cleared, so
/// successive calls accumulate (batch-style); use zero_grad to reset.
template <typename T>
void backward(const Tensor<T>& loss) {
    if (!loss.taped()) throw std::invalid_argument("backward: tensor is not on the tape");
    if (loss.size() != 1)
        throw std::invalid_argument("backward: loss " + shape_str(loss.shape()) + " is not a scalar");

    using Node = TapeNode<T>;
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.node()->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward) n->backward(n->grad);
    }
}

namespace detail {

/// Creates the tape node for an op output when recording applies.
/// `make_backward` receives the parent node handles actually recorded and
/// returns the backward function; it is invoked only when a node is needed.
template <typename T, typename MakeBackward>
void tape_op(Tensor<T>& out, const char* op, const std::vector<Tensor<T>>& inputs,
             MakeBackward&& make_backward) {
    if (!grad_enabled()) return;
    bool any = false;
    for (const auto& in : inputs) any = any || in.taped();
    if (!any) return;
    auto node = std::make_shared<TapeNode<T>>();
    node->op = op;
    node->parents.reserve(inputs.size());
    for (const auto& in : inputs) node->parents.push_back(in.node());
    node->grad.assign(out.size(), T(0));
    node->backward = make_backward(node->parents);
    out.set_node(std::move(node));
}

}  // namespace detail

}  // namespace sfec
