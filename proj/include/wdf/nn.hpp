#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "wdf/errors.hpp"
#include "wdf/rng.hpp"

// Reverse-mode automatic differentiation on dense tensors, sized for this
// project's models: dilated causal conv stacks, 3x3 conv branches, a single
// cross-attention layer, and log-softmax contrastive losses. Templated on the
// scalar so production training runs in float while gradient checks run in
// double.
namespace wdf::nn {

template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numel(shape), T(0)) {}
    Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<long long>(data.size()) != numel(shape)) {
            throw InvalidArgumentError("tensor: data length does not match shape");
        }
    }

    static long long numel(const std::vector<int>& s) {
        long long n = 1;
        for (int d : s) {
            if (d <= 0) throw InvalidArgumentError("tensor: non-positive dimension");
            n *= d;
        }
        return n;
    }

    long long size() const { return static_cast<long long>(data.size()); }
    int ndim() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    T& operator()(int i) { return data[static_cast<std::size_t>(i)]; }
    T operator()(int i) const { return data[static_cast<std::size_t>(i)]; }
    T& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    T operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    T& operator()(int i, int j, int k) {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    T operator()(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    T& operator()(int i, int j, int k, int l) {
        return data[((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
    }
    T operator()(int i, int j, int k, int l) const {
        return data[((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <typename T>
MatMap<T> as_matrix(Tensor<T>& t, long long rows, long long cols) {
    return MatMap<T>(t.data.data(), rows, cols);
}
template <typename T>
ConstMatMap<T> as_matrix(const Tensor<T>& t, long long rows, long long cols) {
    return ConstMatMap<T>(t.data.data(), rows, cols);
}

template <typename T>
struct Node;
template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

inline std::uint64_t next_node_id() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
}

// One vertex of the computation graph. Parents always carry smaller ids than
// children (they exist before the op runs), so reverse id order is a valid
// topological order for the backward sweep.
template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::uint64_t id = 0;
    std::vector<NodePtr<T>> parents;
    std::function<void(Node<T>&)> backward_fn;

    bool has_grad() const { return !grad.data.empty(); }
    void ensure_grad() {
        if (grad.data.empty()) grad = Tensor<T>(value.shape);
    }
};

template <typename T>
NodePtr<T> make_param(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = true;
    n->id = next_node_id();
    return n;
}

template <typename T>
NodePtr<T> make_const(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = false;
    n->id = next_node_id();
    return n;
}

template <typename T>
NodePtr<T> make_op(Tensor<T> value, std::vector<NodePtr<T>> parents,
                   std::function<void(Node<T>&)> bw) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    n->id = next_node_id();
    for (const auto& p : n->parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    if (n->requires_grad) n->backward_fn = std::move(bw);
    return n;
}

// Backpropagates from a scalar root through every reachable grad-requiring
// node. Gradients accumulate (+=) into leaf nodes; call zero_grad between
// steps.
template <typename T>
void backward(const NodePtr<T>& root) {
    if (root->value.size() != 1) {
        throw InvalidArgumentError("backward: root must be a scalar");
    }
    root->ensure_grad();
    root->grad.data[0] += T(1);

    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<Node<T>*> stack{root.get()};
    seen.insert(root.get());
    while (!stack.empty()) {
        Node<T>* n = stack.back();
        stack.pop_back();
        order.push_back(n);
        for (const auto& p : n->parents) {
            if (p->requires_grad && seen.insert(p.get()).second) {
                stack.push_back(p.get());
            }
        }
    }
    std::sort(order.begin(), order.end(),
              [](const Node<T>* a, const Node<T>* b) { return a->id > b->id; });
    for (Node<T>* n : order) {
        if (n->backward_fn && n->has_grad()) n->backward_fn(*n);
    }
}

namespace detail {

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape != b.shape) {
        throw InvalidArgumentError(std::string(op) + ": shape mismatch");
    }
}

}  // namespace detail

// ---- elementwise ops -------------------------------------------------------

template <typename T>
NodePtr<T> add(const NodePtr<T>& a, const NodePtr<T>& b) {
    detail::check_same_shape(a->value, b->value, "add");
    Tensor<T> out = a->value;
    for (long long i = 0; i < out.size(); ++i) out.data[i] += b->value.data[i];
    return make_op<T>(std::move(out), {a, b}, [](Node<T>& self) {
        for (int pi = 0; pi < 2; ++pi) {
            auto& p = self.parents[pi];
            if (!p->requires_grad) continue;
            p->ensure_grad();
            for (long long i = 0; i < self.grad.size(); ++i) p->grad.data[i] += self.grad.data[i];
        }
    });
}

// c0*nodes[0] + c1*nodes[1] + ... over same-shape tensors.
template <typename T>
NodePtr<T> lincomb(const std::vector<NodePtr<T>>& nodes, const std::vector<T>& coeffs) {
    if (nodes.empty() || nodes.size() != coeffs.size()) {
        throw InvalidArgumentError("lincomb: need one coefficient per node");
    }
    for (const auto& n : nodes) detail::check_same_shape(nodes[0]->value, n->value, "lincomb");
    Tensor<T> out(nodes[0]->value.shape);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const T c = coeffs[j];
        for (long long i = 0; i < out.size(); ++i) out.data[i] += c * nodes[j]->value.data[i];
    }
    return make_op<T>(std::move(out), nodes, [coeffs](Node<T>& self) {
        for (std::size_t j = 0; j < self.parents.size(); ++j) {
            auto& p = self.parents[j];
            if (!p->requires_grad) continue;
            p->ensure_grad();
            const T c = coeffs[j];
            for (long long i = 0; i < self.grad.size(); ++i) {
                p->grad.data[i] += c * self.grad.data[i];
            }
        }
    });
}

template <typename T>
NodePtr<T> scale(const NodePtr<T>& a, T c) {
    return lincomb<T>({a}, {c});
}

template <typename T>
NodePtr<T> mul(const NodePtr<T>& a, const NodePtr<T>& b) {
    detail::check_same_shape(a->value, b->value, "mul");
    Tensor<T> out = a->value;
    for (long long i = 0; i < out.size(); ++i) out.data[i] *= b->value.data[i];
    return make_op<T>(std::move(out), {a, b}, [](Node<T>& self) {
        auto& a = self.parents[0];
        auto& b = self.parents[1];
        if (a->requires_grad) {
            a->ensure_grad();
            for (long long i = 0; i < self.grad.size(); ++i) {
                a->grad.data[i] += self.grad.data[i] * b->value.data[i];
            }
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (long long i = 0; i < self.grad.size(); ++i) {
                b->grad.data[i] += self.grad.data[i] * a->value.data[i];
            }
        }
    });
}

// x[..., C] + bias[C]
template <typename T>
NodePtr<T> add_bias(const NodePtr<T>& x, const NodePtr<T>& bias) {
    if (bias->value.ndim() != 1 || x->value.ndim() < 1 ||
        x->value.shape.back() != bias->value.dim(0)) {
        throw InvalidArgumentError("add_bias: bias must match the trailing dimension");
    }
    const long long c = bias->value.size();
    Tensor<T> out = x->value;
    for (long long i = 0; i < out.size(); ++i) out.data[i] += bias->value.data[i % c];
    return make_op<T>(std::move(out), {x, bias}, [c](Node<T>& self) {
        auto& x = self.parents[0];
        auto& b = self.parents[1];
        if (x->requires_grad) {
            x->ensure_grad();
            for (long long i = 0; i < self.grad.size(); ++i) {
                x->grad.data[i] += self.grad.data[i];
            }
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (long long i = 0; i < self.grad.size(); ++i) {
                b->grad.data[i % c] += self.grad.data[i];
            }
        }
    });
}

// x[B,T,C] scaled per-timestep by a constant 0/1 mask[B,T]. Used for the
// train-mode timestamp masking of latents; the mask itself carries no grad.
template <typename T>
NodePtr<T> mask_timesteps(const NodePtr<T>& x, Tensor<T> mask) {
    if (x->value.ndim() != 3 || mask.ndim() != 2 || mask.dim(0) != x->value.dim(0) ||
        mask.dim(1) != x->value.dim(1)) {
        throw InvalidArgumentError("mask_timesteps: mask must be [B,T] matching x");
    }
    const int c = x->value.dim(2);
    Tensor<T> out = x->value;
    for (long long r = 0; r < mask.size(); ++r) {
        const T m = mask.data[r];
        for (int k = 0; k < c; ++k) out.data[r * c + k] *= m;
    }
    return make_op<T>(std::move(out), {x}, [mask = std::move(mask), c](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long r = 0; r < mask.size(); ++r) {
            const T m = mask.data[r];
            for (int k = 0; k < c; ++k) {
                x->grad.data[r * c + k] += self.grad.data[r * c + k] * m;
            }
        }
    });
}

template <typename T>
NodePtr<T> relu(const NodePtr<T>& x) {
    Tensor<T> out = x->value;
    for (auto& v : out.data) v = v > T(0) ? v : T(0);
    return make_op<T>(std::move(out), {x}, [](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long i = 0; i < self.grad.size(); ++i) {
            if (x->value.data[i] > T(0)) x->grad.data[i] += self.grad.data[i];
        }
    });
}

template <typename T>
NodePtr<T> leaky_relu(const NodePtr<T>& x, T negative_slope = T(0.01)) {
    Tensor<T> out = x->value;
    for (auto& v : out.data) {
        if (v < T(0)) v *= negative_slope;
    }
    return make_op<T>(std::move(out), {x}, [negative_slope](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long i = 0; i < self.grad.size(); ++i) {
            const T s = x->value.data[i] > T(0) ? T(1) : negative_slope;
            x->grad.data[i] += self.grad.data[i] * s;
        }
    });
}

// Exact (erf-based) GELU.
template <typename T>
NodePtr<T> gelu(const NodePtr<T>& x) {
    Tensor<T> out = x->value;
    for (auto& v : out.data) {
        v = T(0.5) * v * (T(1) + std::erf(v * T(M_SQRT1_2)));
    }
    return make_op<T>(std::move(out), {x}, [](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        constexpr T inv_sqrt_2pi = T(0.3989422804014326779);
        for (long long i = 0; i < self.grad.size(); ++i) {
            const T v = x->value.data[i];
            const T cdf = T(0.5) * (T(1) + std::erf(v * T(M_SQRT1_2)));
            const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
            x->grad.data[i] += self.grad.data[i] * (cdf + v * pdf);
        }
    });
}

template <typename T>
NodePtr<T> tanh_op(const NodePtr<T>& x) {
    Tensor<T> out = x->value;
    for (auto& v : out.data) v = std::tanh(v);
    return make_op<T>(std::move(out), {x}, [](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long i = 0; i < self.grad.size(); ++i) {
            const T y = self.value.data[i];
            x->grad.data[i] += self.grad.data[i] * (T(1) - y * y);
        }
    });
}

template <typename T>
NodePtr<T> sigmoid(const NodePtr<T>& x) {
    Tensor<T> out = x->value;
    for (auto& v : out.data) v = T(1) / (T(1) + std::exp(-v));
    return make_op<T>(std::move(out), {x}, [](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long i = 0; i < self.grad.size(); ++i) {
            const T y = self.value.data[i];
            x->grad.data[i] += self.grad.data[i] * y * (T(1) - y);
        }
    });
}

// ---- shape ops -------------------------------------------------------------

template <typename T>
NodePtr<T> reshape(const NodePtr<T>& x, std::vector<int> shape) {
    if (Tensor<T>::numel(shape) != x->value.size()) {
        throw InvalidArgumentError("reshape: element count mismatch");
    }
    Tensor<T> out(std::move(shape), x->value.data);
    return make_op<T>(std::move(out), {x}, [](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long i = 0; i < self.grad.size(); ++i) {
            x->grad.data[i] += self.grad.data[i];
        }
    });
}

// [A,B,C] -> [B,A,C]
template <typename T>
NodePtr<T> permute102(const NodePtr<T>& x) {
    if (x->value.ndim() != 3) throw InvalidArgumentError("permute102: need a 3-d tensor");
    const int a = x->value.dim(0), b = x->value.dim(1), c = x->value.dim(2);
    Tensor<T> out({b, a, c});
    for (int i = 0; i < a; ++i) {
        for (int j = 0; j < b; ++j) {
            const T* src = &x->value.data[(static_cast<std::size_t>(i) * b + j) * c];
            T* dst = &out.data[(static_cast<std::size_t>(j) * a + i) * c];
            std::copy(src, src + c, dst);
        }
    }
    return make_op<T>(std::move(out), {x}, [a, b, c](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (int i = 0; i < a; ++i) {
            for (int j = 0; j < b; ++j) {
                const T* g = &self.grad.data[(static_cast<std::size_t>(j) * a + i) * c];
                T* dst = &x->grad.data[(static_cast<std::size_t>(i) * b + j) * c];
                for (int k = 0; k < c; ++k) dst[k] += g[k];
            }
        }
    });
}

// Concatenation along axis 0 (any rank, matching trailing dims).
template <typename T>
NodePtr<T> concat0(const NodePtr<T>& a, const NodePtr<T>& b) {
    if (a->value.ndim() != b->value.ndim() || a->value.ndim() < 1) {
        throw InvalidArgumentError("concat0: rank mismatch");
    }
    for (int i = 1; i < a->value.ndim(); ++i) {
        if (a->value.dim(i) != b->value.dim(i)) {
            throw InvalidArgumentError("concat0: trailing dimensions differ");
        }
    }
    std::vector<int> shape = a->value.shape;
    shape[0] += b->value.dim(0);
    Tensor<T> out(shape);
    std::copy(a->value.data.begin(), a->value.data.end(), out.data.begin());
    std::copy(b->value.data.begin(), b->value.data.end(),
              out.data.begin() + a->value.size());
    const long long na = a->value.size();
    return make_op<T>(std::move(out), {a, b}, [na](Node<T>& self) {
        auto& a = self.parents[0];
        auto& b = self.parents[1];
        if (a->requires_grad) {
            a->ensure_grad();
            for (long long i = 0; i < na; ++i) a->grad.data[i] += self.grad.data[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (long long i = na; i < self.grad.size(); ++i) {
                b->grad.data[i - na] += self.grad.data[i];
            }
        }
    });
}

// Concatenation of two [B,T,C] tensors along the time axis.
template <typename T>
NodePtr<T> concat1(const NodePtr<T>& a, const NodePtr<T>& b) {
    if (a->value.ndim() != 3 || b->value.ndim() != 3 || a->value.dim(0) != b->value.dim(0) ||
        a->value.dim(2) != b->value.dim(2)) {
        throw InvalidArgumentError("concat1: need [B,T,C] tensors with matching B and C");
    }
    const int bs = a->value.dim(0), ta = a->value.dim(1), tb = b->value.dim(1),
              c = a->value.dim(2);
    Tensor<T> out({bs, ta + tb, c});
    for (int i = 0; i < bs; ++i) {
        std::copy(&a->value.data[static_cast<std::size_t>(i) * ta * c],
                  &a->value.data[static_cast<std::size_t>(i) * ta * c] + ta * c,
                  &out.data[static_cast<std::size_t>(i) * (ta + tb) * c]);
        std::copy(&b->value.data[static_cast<std::size_t>(i) * tb * c],
                  &b->value.data[static_cast<std::size_t>(i) * tb * c] + tb * c,
                  &out.data[static_cast<std::size_t>(i) * (ta + tb) * c + ta * c]);
    }
    return make_op<T>(std::move(out), {a, b}, [bs, ta, tb, c](Node<T>& self) {
        auto& a = self.parents[0];
        auto& b = self.parents[1];
        for (int i = 0; i < bs; ++i) {
            const T* g = &self.grad.data[static_cast<std::size_t>(i) * (ta + tb) * c];
            if (a->requires_grad) {
                a->ensure_grad();
                T* ga = &a->grad.data[static_cast<std::size_t>(i) * ta * c];
                for (long long k = 0; k < static_cast<long long>(ta) * c; ++k) ga[k] += g[k];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                T* gb = &b->grad.data[static_cast<std::size_t>(i) * tb * c];
                for (long long k = 0; k < static_cast<long long>(tb) * c; ++k) {
                    gb[k] += g[ta * c + k];
                }
            }
        }
    });
}

// Rows [t0, t1) of the time axis of [B,T,C].
template <typename T>
NodePtr<T> slice_time(const NodePtr<T>& x, int t0, int t1) {
    if (x->value.ndim() != 3) throw InvalidArgumentError("slice_time: need [B,T,C]");
    const int b = x->value.dim(0), t = x->value.dim(1), c = x->value.dim(2);
    if (t0 < 0 || t1 > t || t0 >= t1) throw InvalidArgumentError("slice_time: bad range");
    Tensor<T> out({b, t1 - t0, c});
    for (int i = 0; i < b; ++i) {
        const T* src = &x->value.data[(static_cast<std::size_t>(i) * t + t0) * c];
        std::copy(src, src + static_cast<std::size_t>(t1 - t0) * c,
                  &out.data[static_cast<std::size_t>(i) * (t1 - t0) * c]);
    }
    return make_op<T>(std::move(out), {x}, [b, t, c, t0, t1](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (int i = 0; i < b; ++i) {
            const T* g = &self.grad.data[static_cast<std::size_t>(i) * (t1 - t0) * c];
            T* dst = &x->grad.data[(static_cast<std::size_t>(i) * t + t0) * c];
            for (long long k = 0; k < static_cast<long long>(t1 - t0) * c; ++k) dst[k] += g[k];
        }
    });
}

// Channels [c0, c1) of the trailing axis (any rank >= 1).
template <typename T>
NodePtr<T> slice_lastdim(const NodePtr<T>& x, int c0, int c1) {
    const int c = x->value.shape.back();
    if (c0 < 0 || c1 > c || c0 >= c1) throw InvalidArgumentError("slice_lastdim: bad range");
    std::vector<int> shape = x->value.shape;
    shape.back() = c1 - c0;
    const long long rows = x->value.size() / c;
    Tensor<T> out(shape);
    for (long long r = 0; r < rows; ++r) {
        std::copy(&x->value.data[r * c + c0], &x->value.data[r * c + c1],
                  &out.data[r * (c1 - c0)]);
    }
    return make_op<T>(std::move(out), {x}, [c, c0, c1, rows](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long r = 0; r < rows; ++r) {
            for (int k = c0; k < c1; ++k) {
                x->grad.data[r * c + k] += self.grad.data[r * (c1 - c0) + (k - c0)];
            }
        }
    });
}

// ---- dense / convolution ops ------------------------------------------------

// x[..., Cin] * w[Cin, Cout] (+ bias[Cout]); leading dims are flattened into
// rows. Pass bias = nullptr for a pure matrix product.
template <typename T>
NodePtr<T> linear(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& bias = nullptr) {
    if (w->value.ndim() != 2 || x->value.shape.back() != w->value.dim(0)) {
        throw InvalidArgumentError("linear: weight must be [Cin, Cout] with Cin matching x");
    }
    const int cin = w->value.dim(0), cout = w->value.dim(1);
    if (bias && (bias->value.ndim() != 1 || bias->value.dim(0) != cout)) {
        throw InvalidArgumentError("linear: bias must be [Cout]");
    }
    const long long rows = x->value.size() / cin;
    std::vector<int> shape = x->value.shape;
    shape.back() = cout;
    Tensor<T> out(shape);
    as_matrix(out, rows, cout).noalias() =
        as_matrix(x->value, rows, cin) * as_matrix(w->value, cin, cout);
    if (bias) {
        for (long long i = 0; i < out.size(); ++i) out.data[i] += bias->value.data[i % cout];
    }
    std::vector<NodePtr<T>> parents{x, w};
    if (bias) parents.push_back(bias);
    return make_op<T>(std::move(out), std::move(parents), [rows, cin, cout](Node<T>& self) {
        auto& x = self.parents[0];
        auto& w = self.parents[1];
        auto g = as_matrix(self.grad, rows, cout);
        if (x->requires_grad) {
            x->ensure_grad();
            as_matrix(x->grad, rows, cin).noalias() +=
                g * as_matrix(w->value, cin, cout).transpose();
        }
        if (w->requires_grad) {
            w->ensure_grad();
            as_matrix(w->grad, cin, cout).noalias() +=
                as_matrix(x->value, rows, cin).transpose() * g;
        }
        if (self.parents.size() == 3 && self.parents[2]->requires_grad) {
            auto& b = self.parents[2];
            b->ensure_grad();
            for (long long i = 0; i < self.grad.size(); ++i) {
                b->grad.data[i % cout] += self.grad.data[i];
            }
        }
    });
}

// Causal dilated 1-D convolution: out[b,t] = sum_k w[k] . x[b, t-(K-1-k)*dilation]
// with zero padding on the left, so output t depends only on inputs <= t.
// x: [B,T,Cin], w: [K,Cin,Cout], bias: [Cout]. The im2col matrix is kept for
// the backward GEMMs.
template <typename T>
NodePtr<T> conv1d_causal(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& bias,
                         int dilation) {
    if (x->value.ndim() != 3 || w->value.ndim() != 3) {
        throw InvalidArgumentError("conv1d_causal: need x[B,T,Cin], w[K,Cin,Cout]");
    }
    const int B = x->value.dim(0), Tn = x->value.dim(1), cin = x->value.dim(2);
    const int K = w->value.dim(0), cout = w->value.dim(2);
    if (w->value.dim(1) != cin) throw InvalidArgumentError("conv1d_causal: channel mismatch");
    if (bias->value.ndim() != 1 || bias->value.dim(0) != cout) {
        throw InvalidArgumentError("conv1d_causal: bias must be [Cout]");
    }
    if (dilation < 1) throw InvalidArgumentError("conv1d_causal: dilation must be >= 1");

    auto cols = std::make_shared<Tensor<T>>(
        std::vector<int>{B * Tn, K * cin});
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < Tn; ++t) {
            T* row = &cols->data[(static_cast<std::size_t>(b) * Tn + t) * K * cin];
            for (int k = 0; k < K; ++k) {
                const int src = t - (K - 1 - k) * dilation;
                if (src >= 0) {
                    const T* from = &x->value.data[(static_cast<std::size_t>(b) * Tn + src) * cin];
                    std::copy(from, from + cin, row + k * cin);
                }
            }
        }
    }
    Tensor<T> out({B, Tn, cout});
    as_matrix(out, static_cast<long long>(B) * Tn, cout).noalias() =
        as_matrix(*cols, static_cast<long long>(B) * Tn, K * cin) *
        as_matrix(w->value, K * cin, cout);
    for (long long i = 0; i < out.size(); ++i) out.data[i] += bias->value.data[i % cout];

    return make_op<T>(
        std::move(out), {x, w, bias},
        [cols, B, Tn, cin, K, cout, dilation](Node<T>& self) {
            auto& x = self.parents[0];
            auto& w = self.parents[1];
            auto& b = self.parents[2];
            const long long rows = static_cast<long long>(B) * Tn;
            auto g = as_matrix(self.grad, rows, cout);
            if (w->requires_grad) {
                w->ensure_grad();
                as_matrix(w->grad, K * cin, cout).noalias() +=
                    as_matrix(*cols, rows, K * cin).transpose() * g;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (long long i = 0; i < self.grad.size(); ++i) {
                    b->grad.data[i % cout] += self.grad.data[i];
                }
            }
            if (x->requires_grad) {
                x->ensure_grad();
                RowMat<T> dcols = g * as_matrix(w->value, K * cin, cout).transpose();
                for (int bb = 0; bb < B; ++bb) {
                    for (int t = 0; t < Tn; ++t) {
                        const T* row = dcols.data() +
                                       (static_cast<std::size_t>(bb) * Tn + t) * K * cin;
                        for (int k = 0; k < K; ++k) {
                            const int src = t - (K - 1 - k) * dilation;
                            if (src < 0) continue;
                            T* dst =
                                &x->grad.data[(static_cast<std::size_t>(bb) * Tn + src) * cin];
                            const T* from = row + k * cin;
                            for (int c = 0; c < cin; ++c) dst[c] += from[c];
                        }
                    }
                }
            }
        });
}

// 3x3 same-padding 2-D convolution on channel-last images.
// x: [B,H,W,Cin], w: [3,3,Cin,Cout] (taps ordered dy,dx from (-1,-1)), bias: [Cout].
template <typename T>
NodePtr<T> conv2d_same3x3(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& bias) {
    if (x->value.ndim() != 4 || w->value.ndim() != 4 || w->value.dim(0) != 3 ||
        w->value.dim(1) != 3) {
        throw InvalidArgumentError("conv2d_same3x3: need x[B,H,W,Cin], w[3,3,Cin,Cout]");
    }
    const int B = x->value.dim(0), H = x->value.dim(1), W = x->value.dim(2),
              cin = x->value.dim(3);
    const int cout = w->value.dim(3);
    if (w->value.dim(2) != cin) throw InvalidArgumentError("conv2d_same3x3: channel mismatch");
    if (bias->value.ndim() != 1 || bias->value.dim(0) != cout) {
        throw InvalidArgumentError("conv2d_same3x3: bias must be [Cout]");
    }

    const long long rows = static_cast<long long>(B) * H * W;
    auto cols = std::make_shared<Tensor<T>>(std::vector<int>{static_cast<int>(rows), 9 * cin});
    for (int b = 0; b < B; ++b) {
        for (int h = 0; h < H; ++h) {
            for (int ww = 0; ww < W; ++ww) {
                T* row = &cols->data[((static_cast<std::size_t>(b) * H + h) * W + ww) * 9 * cin];
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int sh = h + dy, sw = ww + dx;
                        if (sh < 0 || sh >= H || sw < 0 || sw >= W) continue;
                        const T* from =
                            &x->value
                                 .data[((static_cast<std::size_t>(b) * H + sh) * W + sw) * cin];
                        std::copy(from, from + cin, row + ((dy + 1) * 3 + (dx + 1)) * cin);
                    }
                }
            }
        }
    }
    Tensor<T> out({B, H, W, cout});
    as_matrix(out, rows, cout).noalias() =
        as_matrix(*cols, rows, 9 * cin) * as_matrix(w->value, 9 * cin, cout);
    for (long long i = 0; i < out.size(); ++i) out.data[i] += bias->value.data[i % cout];

    return make_op<T>(
        std::move(out), {x, w, bias}, [cols, B, H, W, cin, cout](Node<T>& self) {
            auto& x = self.parents[0];
            auto& w = self.parents[1];
            auto& b = self.parents[2];
            const long long rows = static_cast<long long>(B) * H * W;
            auto g = as_matrix(self.grad, rows, cout);
            if (w->requires_grad) {
                w->ensure_grad();
                as_matrix(w->grad, 9 * cin, cout).noalias() +=
                    as_matrix(*cols, rows, 9 * cin).transpose() * g;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (long long i = 0; i < self.grad.size(); ++i) {
                    b->grad.data[i % cout] += self.grad.data[i];
                }
            }
            if (x->requires_grad) {
                x->ensure_grad();
                RowMat<T> dcols = g * as_matrix(w->value, 9 * cin, cout).transpose();
                for (int bb = 0; bb < B; ++bb) {
                    for (int h = 0; h < H; ++h) {
                        for (int ww = 0; ww < W; ++ww) {
                            const T* row = dcols.data() +
                                           ((static_cast<std::size_t>(bb) * H + h) * W + ww) * 9 *
                                               cin;
                            for (int dy = -1; dy <= 1; ++dy) {
                                for (int dx = -1; dx <= 1; ++dx) {
                                    const int sh = h + dy, sw = ww + dx;
                                    if (sh < 0 || sh >= H || sw < 0 || sw >= W) continue;
                                    T* dst = &x->grad.data[((static_cast<std::size_t>(bb) * H + sh) *
                                                                W +
                                                            sw) *
                                                           cin];
                                    const T* from = row + ((dy + 1) * 3 + (dx + 1)) * cin;
                                    for (int c = 0; c < cin; ++c) dst[c] += from[c];
                                }
                            }
                        }
                    }
                }
            }
        });
}

// Batched matrix product: a[Bt,M,K] x b[Bt,K,N] (or b[Bt,N,K] with trans_b).
template <typename T>
NodePtr<T> bmm(const NodePtr<T>& a, const NodePtr<T>& b, bool trans_b = false) {
    if (a->value.ndim() != 3 || b->value.ndim() != 3 || a->value.dim(0) != b->value.dim(0)) {
        throw InvalidArgumentError("bmm: need 3-d tensors with a shared batch dimension");
    }
    const int Bt = a->value.dim(0), M = a->value.dim(1), K = a->value.dim(2);
    const int N = trans_b ? b->value.dim(1) : b->value.dim(2);
    const int Kb = trans_b ? b->value.dim(2) : b->value.dim(1);
    if (Kb != K) throw InvalidArgumentError("bmm: inner dimensions differ");

    Tensor<T> out({Bt, M, N});
    for (int i = 0; i < Bt; ++i) {
        ConstMatMap<T> ma(&a->value.data[static_cast<std::size_t>(i) * M * K], M, K);
        MatMap<T> mo(&out.data[static_cast<std::size_t>(i) * M * N], M, N);
        if (trans_b) {
            ConstMatMap<T> mb(&b->value.data[static_cast<std::size_t>(i) * N * K], N, K);
            mo.noalias() = ma * mb.transpose();
        } else {
            ConstMatMap<T> mb(&b->value.data[static_cast<std::size_t>(i) * K * N], K, N);
            mo.noalias() = ma * mb;
        }
    }
    return make_op<T>(std::move(out), {a, b}, [Bt, M, K, N, trans_b](Node<T>& self) {
        auto& a = self.parents[0];
        auto& b = self.parents[1];
        for (int i = 0; i < Bt; ++i) {
            ConstMatMap<T> g(&self.grad.data[static_cast<std::size_t>(i) * M * N], M, N);
            ConstMatMap<T> ma(&a->value.data[static_cast<std::size_t>(i) * M * K], M, K);
            if (a->requires_grad) {
                a->ensure_grad();
                MatMap<T> da(&a->grad.data[static_cast<std::size_t>(i) * M * K], M, K);
                if (trans_b) {
                    ConstMatMap<T> mb(&b->value.data[static_cast<std::size_t>(i) * N * K], N, K);
                    da.noalias() += g * mb;
                } else {
                    ConstMatMap<T> mb(&b->value.data[static_cast<std::size_t>(i) * K * N], K, N);
                    da.noalias() += g * mb.transpose();
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                if (trans_b) {
                    MatMap<T> db(&b->grad.data[static_cast<std::size_t>(i) * N * K], N, K);
                    db.noalias() += g.transpose() * ma;
                } else {
                    MatMap<T> db(&b->grad.data[static_cast<std::size_t>(i) * K * N], K, N);
                    db.noalias() += ma.transpose() * g;
                }
            }
        }
    });
}

// ---- reductions and pooling --------------------------------------------------

// Max-pool with kernel 2, stride 2 along the time axis of [B,T,C]; an odd
// trailing element is dropped (floor semantics). Ties keep the earlier step.
template <typename T>
NodePtr<T> maxpool_time2(const NodePtr<T>& x) {
    if (x->value.ndim() != 3) throw InvalidArgumentError("maxpool_time2: need [B,T,C]");
    const int B = x->value.dim(0), Tn = x->value.dim(1), C = x->value.dim(2);
    if (Tn < 2) throw InvalidArgumentError("maxpool_time2: time axis too short");
    const int To = Tn / 2;
    Tensor<T> out({B, To, C});
    auto arg = std::make_shared<std::vector<std::uint8_t>>(
        static_cast<std::size_t>(B) * To * C);
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < To; ++t) {
            const T* x0 = &x->value.data[(static_cast<std::size_t>(b) * Tn + 2 * t) * C];
            const T* x1 = x0 + C;
            T* o = &out.data[(static_cast<std::size_t>(b) * To + t) * C];
            std::uint8_t* am = &(*arg)[(static_cast<std::size_t>(b) * To + t) * C];
            for (int c = 0; c < C; ++c) {
                if (x1[c] > x0[c]) {
                    o[c] = x1[c];
                    am[c] = 1;
                } else {
                    o[c] = x0[c];
                    am[c] = 0;
                }
            }
        }
    }
    return make_op<T>(std::move(out), {x}, [arg, B, Tn, To, C](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (int b = 0; b < B; ++b) {
            for (int t = 0; t < To; ++t) {
                const T* g = &self.grad.data[(static_cast<std::size_t>(b) * To + t) * C];
                const std::uint8_t* am = &(*arg)[(static_cast<std::size_t>(b) * To + t) * C];
                T* dst = &x->grad.data[(static_cast<std::size_t>(b) * Tn + 2 * t) * C];
                for (int c = 0; c < C; ++c) dst[am[c] * C + c] += g[c];
            }
        }
    });
}

// Max over the whole time axis: [B,T,C] -> [B,C]. Ties keep the earliest step.
template <typename T>
NodePtr<T> max_over_time(const NodePtr<T>& x) {
    if (x->value.ndim() != 3) throw InvalidArgumentError("max_over_time: need [B,T,C]");
    const int B = x->value.dim(0), Tn = x->value.dim(1), C = x->value.dim(2);
    Tensor<T> out({B, C});
    auto arg = std::make_shared<std::vector<int>>(static_cast<std::size_t>(B) * C, 0);
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) out(b, c) = x->value(b, 0, c);
        for (int t = 1; t < Tn; ++t) {
            for (int c = 0; c < C; ++c) {
                const T v = x->value(b, t, c);
                if (v > out(b, c)) {
                    out(b, c) = v;
                    (*arg)[static_cast<std::size_t>(b) * C + c] = t;
                }
            }
        }
    }
    return make_op<T>(std::move(out), {x}, [arg, B, Tn, C](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (int b = 0; b < B; ++b) {
            for (int c = 0; c < C; ++c) {
                const int t = (*arg)[static_cast<std::size_t>(b) * C + c];
                x->grad(b, t, c) += self.grad(b, c);
            }
        }
    });
}

template <typename T>
NodePtr<T> mean_all(const NodePtr<T>& x) {
    const long long n = x->value.size();
    Tensor<T> out({1});
    T acc = T(0);
    for (const auto& v : x->value.data) acc += v;
    out.data[0] = acc / static_cast<T>(n);
    return make_op<T>(std::move(out), {x}, [n](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        const T g = self.grad.data[0] / static_cast<T>(n);
        for (auto& v : x->grad.data) v += g;
    });
}

// Mean squared error between two same-shape tensors -> scalar.
template <typename T>
NodePtr<T> mse(const NodePtr<T>& a, const NodePtr<T>& b) {
    detail::check_same_shape(a->value, b->value, "mse");
    const long long n = a->value.size();
    Tensor<T> out({1});
    T acc = T(0);
    for (long long i = 0; i < n; ++i) {
        const T d = a->value.data[i] - b->value.data[i];
        acc += d * d;
    }
    out.data[0] = acc / static_cast<T>(n);
    return make_op<T>(std::move(out), {a, b}, [n](Node<T>& self) {
        auto& a = self.parents[0];
        auto& b = self.parents[1];
        const T g = self.grad.data[0] * T(2) / static_cast<T>(n);
        if (a->requires_grad) a->ensure_grad();
        if (b->requires_grad) b->ensure_grad();
        for (long long i = 0; i < n; ++i) {
            const T d = a->value.data[i] - b->value.data[i];
            if (a->requires_grad) a->grad.data[i] += g * d;
            if (b->requires_grad) b->grad.data[i] -= g * d;
        }
    });
}

// ---- softmax family ----------------------------------------------------------

// Softmax along the trailing axis.
template <typename T>
NodePtr<T> softmax_lastdim(const NodePtr<T>& x) {
    const int c = x->value.shape.back();
    const long long rows = x->value.size() / c;
    Tensor<T> out = x->value;
    for (long long r = 0; r < rows; ++r) {
        T* row = &out.data[r * c];
        T m = row[0];
        for (int i = 1; i < c; ++i) m = std::max(m, row[i]);
        T sum = T(0);
        for (int i = 0; i < c; ++i) {
            row[i] = std::exp(row[i] - m);
            sum += row[i];
        }
        for (int i = 0; i < c; ++i) row[i] /= sum;
    }
    return make_op<T>(std::move(out), {x}, [rows, c](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long r = 0; r < rows; ++r) {
            const T* y = &self.value.data[r * c];
            const T* g = &self.grad.data[r * c];
            T dot = T(0);
            for (int i = 0; i < c; ++i) dot += y[i] * g[i];
            T* dst = &x->grad.data[r * c];
            for (int i = 0; i < c; ++i) dst[i] += y[i] * (g[i] - dot);
        }
    });
}

// Sentinel for excluded logits; exp(kMaskedLogit - max) underflows to exact 0.
template <typename T>
inline constexpr T kMaskedLogit = T(-1e30);

// Log-softmax along the trailing axis with an optional 0/1 exclusion mask.
// The mask covers the trailing two axes and is tiled over leading ones;
// excluded entries take the kMaskedLogit sentinel and zero probability.
template <typename T>
NodePtr<T> log_softmax_lastdim(const NodePtr<T>& x, const Tensor<T>* mask = nullptr) {
    const int c = x->value.shape.back();
    const long long rows = x->value.size() / c;
    long long mask_rows = 0;
    if (mask) {
        if (x->value.ndim() < 2 || mask->ndim() != 2 ||
            mask->dim(0) != x->value.shape[x->value.ndim() - 2] || mask->dim(1) != c) {
            throw InvalidArgumentError("log_softmax_lastdim: mask must match trailing axes");
        }
        mask_rows = mask->dim(0);
    }
    Tensor<T> out = x->value;
    for (long long r = 0; r < rows; ++r) {
        T* row = &out.data[r * c];
        const T* mrow = mask ? &mask->data[(r % mask_rows) * c] : nullptr;
        T m = kMaskedLogit<T>;
        int allowed = 0;
        for (int i = 0; i < c; ++i) {
            if (mrow && mrow[i] == T(0)) continue;
            m = allowed == 0 ? row[i] : std::max(m, row[i]);
            ++allowed;
        }
        if (allowed == 0) throw InvalidArgumentError("log_softmax_lastdim: fully masked row");
        T sum = T(0);
        for (int i = 0; i < c; ++i) {
            if (mrow && mrow[i] == T(0)) continue;
            sum += std::exp(row[i] - m);
        }
        const T lse = m + std::log(sum);
        for (int i = 0; i < c; ++i) {
            row[i] = (mrow && mrow[i] == T(0)) ? kMaskedLogit<T> : row[i] - lse;
        }
    }
    return make_op<T>(std::move(out), {x}, [rows, c](Node<T>& self) {
        auto& x = self.parents[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (long long r = 0; r < rows; ++r) {
            const T* y = &self.value.data[r * c];
            const T* g = &self.grad.data[r * c];
            T gsum = T(0);
            for (int i = 0; i < c; ++i) gsum += g[i];
            T* dst = &x->grad.data[r * c];
            for (int i = 0; i < c; ++i) {
                // exp(y) is the (masked-aware) probability; 0 on excluded entries.
                dst[i] += g[i] - std::exp(y[i]) * gsum;
            }
        }
    });
}

// Negative mean of the selected flat entries (cross-entropy readout over the
// positive positions of a log-softmax tensor).
template <typename T>
NodePtr<T> nll_selected(const NodePtr<T>& log_probs, std::vector<long long> indices) {
    if (indices.empty()) throw InvalidArgumentError("nll_selected: no indices");
    for (long long idx : indices) {
        if (idx < 0 || idx >= log_probs->value.size()) {
            throw InvalidArgumentError("nll_selected: index out of range");
        }
    }
    Tensor<T> out({1});
    T acc = T(0);
    for (long long idx : indices) acc += log_probs->value.data[idx];
    out.data[0] = -acc / static_cast<T>(indices.size());
    return make_op<T>(std::move(out), {log_probs},
                      [indices = std::move(indices)](Node<T>& self) {
                          auto& p = self.parents[0];
                          if (!p->requires_grad) return;
                          p->ensure_grad();
                          const T g = -self.grad.data[0] / static_cast<T>(indices.size());
                          for (long long idx : indices) p->grad.data[idx] += g;
                      });
}

// ---- optimizer / utilities ----------------------------------------------------

template <typename T>
long long parameter_count(const std::vector<NodePtr<T>>& params) {
    long long n = 0;
    for (const auto& p : params) n += p->value.size();
    return n;
}

template <typename T>
void zero_grad(const std::vector<NodePtr<T>>& params) {
    for (const auto& p : params) {
        if (p->has_grad()) p->grad.fill(T(0));
    }
}

// ADAM with bias correction. A parameter whose grad buffer was never touched
// in the step contributes a zero gradient.
template <typename T>
class Adam {
   public:
    explicit Adam(std::vector<NodePtr<T>> params, T lr, T beta1 = T(0.9), T beta2 = T(0.999),
                  T eps = T(1e-8))
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (const auto& p : params_) {
            m_.emplace_back(p->value.shape);
            v_.emplace_back(p->value.shape);
        }
    }

    void zero_grad() { nn::zero_grad(params_); }

    void step() {
        ++t_;
        const T bc1 = T(1) - std::pow(beta1_, static_cast<T>(t_));
        const T bc2 = T(1) - std::pow(beta2_, static_cast<T>(t_));
        for (std::size_t j = 0; j < params_.size(); ++j) {
            auto& p = params_[j];
            const T* g = p->has_grad() ? p->grad.data.data() : nullptr;
            for (long long i = 0; i < p->value.size(); ++i) {
                const T gi = g ? g[i] : T(0);
                m_[j].data[i] = beta1_ * m_[j].data[i] + (T(1) - beta1_) * gi;
                v_[j].data[i] = beta2_ * v_[j].data[i] + (T(1) - beta2_) * gi * gi;
                const T mhat = m_[j].data[i] / bc1;
                const T vhat = v_[j].data[i] / bc2;
                p->value.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

    const std::vector<NodePtr<T>>& params() const { return params_; }

   private:
    std::vector<NodePtr<T>> params_;
    T lr_, beta1_, beta2_, eps_;
    long long t_ = 0;
    std::vector<Tensor<T>> m_, v_;
};

// U(-bound, bound) fill, consuming the rng in flat element order.
template <typename T>
Tensor<T> uniform_tensor(Rng& rng, std::vector<int> shape, double bound) {
    Tensor<T> t(std::move(shape));
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-bound, bound));
    return t;
}

// The fan-in-scaled default: U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
template <typename T>
Tensor<T> fan_in_init(Rng& rng, std::vector<int> shape, long long fan_in) {
    if (fan_in <= 0) throw InvalidArgumentError("fan_in_init: fan_in must be positive");
    return uniform_tensor<T>(rng, std::move(shape), 1.0 / std::sqrt(static_cast<double>(fan_in)));
}

// Central finite-difference verification of d(loss)/d(params). The builder is
// invoked repeatedly and must construct a fresh scalar graph from the current
// parameter values. Returns the largest relative error over the coordinates
// visited (every stride-th coordinate of each parameter).
template <typename T, typename Builder>
double gradcheck_max_rel_error(const std::vector<NodePtr<T>>& params, Builder build_loss, T h,
                               long long stride = 1) {
    zero_grad(params);
    {
        auto loss = build_loss();
        backward(loss);
    }
    std::vector<Tensor<T>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) {
        analytic.push_back(p->has_grad() ? p->grad : Tensor<T>(p->value.shape));
    }

    double worst = 0.0;
    for (std::size_t j = 0; j < params.size(); ++j) {
        auto& val = params[j]->value;
        for (long long i = 0; i < val.size(); i += stride) {
            const T saved = val.data[i];
            val.data[i] = saved + h;
            const double fp = static_cast<double>(build_loss()->value.data[0]);
            val.data[i] = saved - h;
            const double fm = static_cast<double>(build_loss()->value.data[0]);
            val.data[i] = saved;
            const double fd = (fp - fm) / (2.0 * static_cast<double>(h));
            const double an = static_cast<double>(analytic[j].data[i]);
            const double rel =
                std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
            worst = std::max(worst, rel);
        }
    }
    zero_grad(params);
    return worst;
}

}  // namespace wdf::nn
