#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "lcl/tensor.hpp"

namespace lcl {

// Reverse-mode tape. A Graph is built per training step: leaves for
// parameters, constants for data, then ops; backward() walks the tape in
// reverse creation order. Node values are computed eagerly at op creation.
template <class T>
class Graph;

template <class T>
struct Var {
    Graph<T>* g = nullptr;
    int32_t id = -1;

    const Tensor<T>& val() const { return g->val(id); }
    const Tensor<T>& grad() const { return g->grad(id); }
};

template <class T>
class Graph {
public:
    using BackFn = std::function<void(Graph&, int32_t)>;

    struct Node {
        Tensor<T> value;
        Tensor<T> grad;  // empty until touched by backward
        std::vector<int32_t> parents;
        BackFn backward;
        bool requires_grad = false;
    };

    Var<T> constant(Tensor<T> v) { return push(std::move(v), {}, nullptr, false); }

    Var<T> leaf(Tensor<T> v) { return push(std::move(v), {}, nullptr, true); }

    Var<T> push(Tensor<T> value, std::vector<int32_t> parents, BackFn back, bool force_requires = false) {
        bool req = force_requires;
        for (int32_t p : parents) req = req || nodes_[static_cast<size_t>(p)].requires_grad;
        Node n;
        n.value = std::move(value);
        n.parents = std::move(parents);
        n.backward = req ? std::move(back) : nullptr;
        n.requires_grad = req;
        nodes_.push_back(std::move(n));
        return Var<T>{this, static_cast<int32_t>(nodes_.size()) - 1};
    }

    const Tensor<T>& val(int32_t id) const { return nodes_[static_cast<size_t>(id)].value; }

    const Tensor<T>& grad(int32_t id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.data.empty()) n.grad = Tensor<T>::zeros(n.value.shape);
        return n.grad;
    }

    bool requires_grad(int32_t id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }

    const std::vector<int32_t>& parents(int32_t id) const { return nodes_[static_cast<size_t>(id)].parents; }

    // Accumulate into a parent's gradient buffer, reducing over broadcast dims.
    void accum(int32_t id, const Tensor<T>& g) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (!n.requires_grad) return;
        Tensor<T> r = (g.shape == n.value.shape) ? g : reduce_to_shape(g, n.value.shape);
        if (n.grad.data.empty()) {
            n.grad = std::move(r);
        } else {
            for (size_t i = 0; i < n.grad.data.size(); ++i) n.grad.data[i] += r.data[i];
        }
    }

    Tensor<T>& grad_buf(int32_t id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.data.empty()) n.grad = Tensor<T>::zeros(n.value.shape);
        return n.grad;
    }

    void backward(Var<T> root) {
        Node& r = nodes_[static_cast<size_t>(root.id)];
        if (r.value.numel() != 1) throw ContractViolation("backward root must be scalar");
        grad_buf(root.id).data[0] = T(1);
        for (int32_t id = root.id; id >= 0; --id) {
            Node& n = nodes_[static_cast<size_t>(id)];
            if (!n.requires_grad || n.grad.data.empty() || !n.backward) continue;
            n.backward(*this, id);
        }
    }

    void clear() { nodes_.clear(); }
    size_t size() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

// ---------------- kernels ----------------

namespace detail {

template <class T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// C (+)= op(A) * op(B)
template <class T>
void matmul_kernel(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool trans_a, bool trans_b,
                   bool accumulate) {
    Eigen::Map<const MatRM<T>> A(a, trans_a ? k : m, trans_a ? m : k);
    Eigen::Map<const MatRM<T>> B(b, trans_b ? n : k, trans_b ? k : n);
    Eigen::Map<MatRM<T>> C(c, m, n);
    if (trans_a && trans_b) {
        if (accumulate) C.noalias() += A.transpose() * B.transpose();
        else C.noalias() = A.transpose() * B.transpose();
    } else if (trans_a) {
        if (accumulate) C.noalias() += A.transpose() * B;
        else C.noalias() = A.transpose() * B;
    } else if (trans_b) {
        if (accumulate) C.noalias() += A * B.transpose();
        else C.noalias() = A * B.transpose();
    } else {
        if (accumulate) C.noalias() += A * B;
        else C.noalias() = A * B;
    }
}

}  // namespace detail

// ---------------- elementwise binary ----------------

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    Tensor<T> out = broadcast_binary(g.val(a.id), g.val(b.id), [](T x, T y) { return x + y; });
    return g.push(std::move(out), {a.id, b.id}, [](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        const auto& ps = gg.parents(self);
        gg.accum(ps[0], ng);
        gg.accum(ps[1], ng);
    });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    Tensor<T> out = broadcast_binary(g.val(a.id), g.val(b.id), [](T x, T y) { return x - y; });
    return g.push(std::move(out), {a.id, b.id}, [](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        const auto& ps = gg.parents(self);
        gg.accum(ps[0], ng);
        Tensor<T> neg = ng;
        for (auto& x : neg.data) x = -x;
        gg.accum(ps[1], neg);
    });
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    Tensor<T> out = broadcast_binary(g.val(a.id), g.val(b.id), [](T x, T y) { return x * y; });
    return g.push(std::move(out), {a.id, b.id}, [](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        const auto& ps = gg.parents(self);
        gg.accum(ps[0], broadcast_binary(ng, gg.val(ps[1]), [](T x, T y) { return x * y; }));
        gg.accum(ps[1], broadcast_binary(ng, gg.val(ps[0]), [](T x, T y) { return x * y; }));
    });
}

template <class T>
Var<T> div(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    Tensor<T> out = broadcast_binary(g.val(a.id), g.val(b.id), [](T x, T y) { return x / y; });
    return g.push(std::move(out), {a.id, b.id}, [](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        const auto& ps = gg.parents(self);
        gg.accum(ps[0], broadcast_binary(ng, gg.val(ps[1]), [](T x, T y) { return x / y; }));
        Tensor<T> t = broadcast_binary(gg.val(ps[0]), gg.val(ps[1]), [](T x, T y) { return -x / (y * y); });
        gg.accum(ps[1], broadcast_binary(ng, t, [](T x, T y) { return x * y; }));
    });
}

template <class T>
Var<T> add_scalar(Var<T> a, T c) {
    Graph<T>& g = *a.g;
    Tensor<T> out = g.val(a.id);
    for (auto& x : out.data) x += c;
    return g.push(std::move(out), {a.id}, [](Graph<T>& gg, int32_t self) {
        gg.accum(gg.parents(self)[0], gg.grad(self));
    });
}

template <class T>
Var<T> mul_scalar(Var<T> a, T c) {
    Graph<T>& g = *a.g;
    Tensor<T> out = g.val(a.id);
    for (auto& x : out.data) x *= c;
    return g.push(std::move(out), {a.id}, [c](Graph<T>& gg, int32_t self) {
        Tensor<T> t = gg.grad(self);
        for (auto& x : t.data) x *= c;
        gg.accum(gg.parents(self)[0], t);
    });
}

template <class T>
Var<T> neg(Var<T> a) {
    return mul_scalar(a, T(-1));
}

// ---------------- unary elementwise ----------------

template <class T, class FwdF, class GradF>
Var<T> unary_op(Var<T> a, FwdF&& fwd, GradF&& grad_from_xy) {
    Graph<T>& g = *a.g;
    Tensor<T> out = g.val(a.id);
    for (auto& x : out.data) x = fwd(x);
    return g.push(std::move(out), {a.id},
                  [grad_from_xy](Graph<T>& gg, int32_t self) {
                      const auto& ng = gg.grad(self);
                      const auto& x = gg.val(gg.parents(self)[0]);
                      const auto& y = gg.val(self);
                      Tensor<T> t(x.shape);
                      for (size_t i = 0; i < t.data.size(); ++i)
                          t.data[i] = ng.data[i] * grad_from_xy(x.data[i], y.data[i]);
                      gg.accum(gg.parents(self)[0], t);
                  });
}

template <class T>
Var<T> vsin(Var<T> a) {
    return unary_op(a, [](T x) { return std::sin(x); }, [](T x, T) { return std::cos(x); });
}
template <class T>
Var<T> vcos(Var<T> a) {
    return unary_op(a, [](T x) { return std::cos(x); }, [](T x, T) { return -std::sin(x); });
}
template <class T>
Var<T> vexp(Var<T> a) {
    return unary_op(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}
template <class T>
Var<T> vlog(Var<T> a) {
    return unary_op(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}
template <class T>
Var<T> vsqrt(Var<T> a) {
    return unary_op(a, [](T x) { return std::sqrt(x); }, [](T, T y) { return T(0.5) / y; });
}
template <class T>
Var<T> vtanh(Var<T> a) {
    return unary_op(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}
template <class T>
Var<T> sigmoid(Var<T> a) {
    return unary_op(a, [](T x) { return T(1) / (T(1) + std::exp(-x)); }, [](T, T y) { return y * (T(1) - y); });
}
template <class T>
Var<T> silu(Var<T> a) {
    return unary_op(
        a, [](T x) { return x / (T(1) + std::exp(-x)); },
        [](T x, T) {
            T s = T(1) / (T(1) + std::exp(-x));
            return s * (T(1) + x * (T(1) - s));
        });
}
template <class T>
Var<T> square(Var<T> a) {
    return unary_op(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

// ---------------- matmul / transpose / reshape ----------------

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    const auto& bv = g.val(b.id);
    if (av.rank() != 2 || bv.rank() != 2 || av.shape[1] != bv.shape[0])
        throw ContractViolation("matmul: incompatible shapes " + shape_str(av.shape) + " x " + shape_str(bv.shape));
    const int64_t m = av.shape[0], k = av.shape[1], n = bv.shape[1];
    Tensor<T> out(Shape{m, n});
    detail::matmul_kernel(av.data.data(), bv.data.data(), out.data.data(), m, k, n, false, false, false);
    return g.push(std::move(out), {a.id, b.id}, [m, k, n](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        const auto& ps = gg.parents(self);
        if (gg.requires_grad(ps[0])) {
            // gA += G * B^T
            detail::matmul_kernel(ng.data.data(), gg.val(ps[1]).data.data(), gg.grad_buf(ps[0]).data.data(), m, n, k,
                                  false, true, true);
        }
        if (gg.requires_grad(ps[1])) {
            // gB += A^T * G
            detail::matmul_kernel(gg.val(ps[0]).data.data(), ng.data.data(), gg.grad_buf(ps[1]).data.data(), k, m, n,
                                  true, false, true);
        }
    });
}

template <class T>
Var<T> transpose(Var<T> a) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    if (av.rank() != 2) throw ContractViolation("transpose: rank-2 required");
    const int64_t r = av.shape[0], c = av.shape[1];
    Tensor<T> out(Shape{c, r});
    for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < c; ++j) out.data[static_cast<size_t>(j * r + i)] = av.data[static_cast<size_t>(i * c + j)];
    return g.push(std::move(out), {a.id}, [r, c](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        Tensor<T> t(Shape{r, c});
        for (int64_t i = 0; i < c; ++i)
            for (int64_t j = 0; j < r; ++j) t.data[static_cast<size_t>(j * c + i)] = ng.data[static_cast<size_t>(i * r + j)];
        gg.accum(gg.parents(self)[0], t);
    });
}

template <class T>
Var<T> reshape(Var<T> a, Shape s) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    if (shape_numel(s) != av.numel())
        throw ContractViolation("reshape: numel mismatch " + shape_str(av.shape) + " -> " + shape_str(s));
    Tensor<T> out(s, av.data);
    Shape orig = av.shape;
    return g.push(std::move(out), {a.id}, [orig](Graph<T>& gg, int32_t self) {
        Tensor<T> t(orig, gg.grad(self).data);
        gg.accum(gg.parents(self)[0], t);
    });
}

// ---------------- row/col structure ----------------

template <class T>
Var<T> slice_rows(Var<T> a, int64_t r0, int64_t r1) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    if (av.rank() != 2 || r0 < 0 || r1 > av.shape[0] || r0 >= r1)
        throw ContractViolation("slice_rows: bad range");
    const int64_t c = av.shape[1];
    Tensor<T> out(Shape{r1 - r0, c});
    std::copy(av.data.begin() + r0 * c, av.data.begin() + r1 * c, out.data.begin());
    return g.push(std::move(out), {a.id}, [r0, c](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        int32_t p = gg.parents(self)[0];
        if (!gg.requires_grad(p)) return;
        Tensor<T>& gp = gg.grad_buf(p);
        for (size_t i = 0; i < ng.data.size(); ++i) gp.data[static_cast<size_t>(r0 * c) + i] += ng.data[i];
    });
}

template <class T>
Var<T> slice_cols(Var<T> a, int64_t c0, int64_t c1) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    if (av.rank() != 2 || c0 < 0 || c1 > av.shape[1] || c0 >= c1)
        throw ContractViolation("slice_cols: bad range");
    const int64_t r = av.shape[0], c = av.shape[1], w = c1 - c0;
    Tensor<T> out(Shape{r, w});
    for (int64_t i = 0; i < r; ++i)
        std::copy(av.data.begin() + i * c + c0, av.data.begin() + i * c + c1, out.data.begin() + i * w);
    return g.push(std::move(out), {a.id}, [c0, c, w, r](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        int32_t p = gg.parents(self)[0];
        if (!gg.requires_grad(p)) return;
        Tensor<T>& gp = gg.grad_buf(p);
        for (int64_t i = 0; i < r; ++i)
            for (int64_t j = 0; j < w; ++j) gp.data[static_cast<size_t>(i * c + c0 + j)] += ng.data[static_cast<size_t>(i * w + j)];
    });
}

template <class T>
Var<T> pad_rows(Var<T> a, int64_t new_rows) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    if (av.rank() != 2 || new_rows < av.shape[0]) throw ContractViolation("pad_rows: bad target");
    const int64_t r = av.shape[0], c = av.shape[1];
    Tensor<T> out(Shape{new_rows, c});
    std::copy(av.data.begin(), av.data.end(), out.data.begin());
    return g.push(std::move(out), {a.id}, [r, c](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        Tensor<T> t(Shape{r, c});
        std::copy(ng.data.begin(), ng.data.begin() + r * c, t.data.begin());
        gg.accum(gg.parents(self)[0], t);
    });
}

template <class T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
    if (parts.empty()) throw ContractViolation("concat_rows: empty");
    Graph<T>& g = *parts[0].g;
    int64_t rows = 0;
    const int64_t c = g.val(parts[0].id).shape[1];
    std::vector<int32_t> ids;
    for (const auto& p : parts) {
        const auto& v = g.val(p.id);
        if (v.rank() != 2 || v.shape[1] != c) throw ContractViolation("concat_rows: column mismatch");
        rows += v.shape[0];
        ids.push_back(p.id);
    }
    Tensor<T> out(Shape{rows, c});
    int64_t off = 0;
    for (const auto& p : parts) {
        const auto& v = g.val(p.id);
        std::copy(v.data.begin(), v.data.end(), out.data.begin() + off);
        off += v.numel();
    }
    return g.push(std::move(out), ids, [](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        int64_t off = 0;
        for (int32_t p : gg.parents(self)) {
            const auto& pv = gg.val(p);
            if (gg.requires_grad(p)) {
                Tensor<T> t(pv.shape);
                std::copy(ng.data.begin() + off, ng.data.begin() + off + pv.numel(), t.data.begin());
                gg.accum(p, t);
            }
            off += pv.numel();
        }
    });
}

template <class T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
    if (parts.empty()) throw ContractViolation("concat_cols: empty");
    Graph<T>& g = *parts[0].g;
    const int64_t r = g.val(parts[0].id).shape[0];
    int64_t cols = 0;
    std::vector<int32_t> ids;
    for (const auto& p : parts) {
        const auto& v = g.val(p.id);
        if (v.rank() != 2 || v.shape[0] != r) throw ContractViolation("concat_cols: row mismatch");
        cols += v.shape[1];
        ids.push_back(p.id);
    }
    Tensor<T> out(Shape{r, cols});
    int64_t coff = 0;
    for (const auto& p : parts) {
        const auto& v = g.val(p.id);
        const int64_t w = v.shape[1];
        for (int64_t i = 0; i < r; ++i)
            std::copy(v.data.begin() + i * w, v.data.begin() + (i + 1) * w, out.data.begin() + i * cols + coff);
        coff += w;
    }
    return g.push(std::move(out), ids, [r, cols](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        int64_t coff = 0;
        for (int32_t p : gg.parents(self)) {
            const auto& pv = gg.val(p);
            const int64_t w = pv.shape[1];
            if (gg.requires_grad(p)) {
                Tensor<T> t(pv.shape);
                for (int64_t i = 0; i < r; ++i)
                    std::copy(ng.data.begin() + i * cols + coff, ng.data.begin() + i * cols + coff + w,
                              t.data.begin() + i * w);
                gg.accum(p, t);
            }
            coff += w;
        }
    });
}

// ---------------- normalization / softmax ----------------

template <class T>
Var<T> softmax_rows(Var<T> a) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    if (av.rank() != 2) throw ContractViolation("softmax_rows: rank-2 required");
    const int64_t r = av.shape[0], c = av.shape[1];
    Tensor<T> out(av.shape);
    for (int64_t i = 0; i < r; ++i) {
        T mx = av.data[static_cast<size_t>(i * c)];
        for (int64_t j = 1; j < c; ++j) mx = std::max(mx, av.data[static_cast<size_t>(i * c + j)]);
        T sum = 0;
        for (int64_t j = 0; j < c; ++j) {
            T e = std::exp(av.data[static_cast<size_t>(i * c + j)] - mx);
            out.data[static_cast<size_t>(i * c + j)] = e;
            sum += e;
        }
        for (int64_t j = 0; j < c; ++j) out.data[static_cast<size_t>(i * c + j)] /= sum;
    }
    return g.push(std::move(out), {a.id}, [r, c](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        const auto& y = gg.val(self);
        Tensor<T> t(y.shape);
        for (int64_t i = 0; i < r; ++i) {
            T dot = 0;
            for (int64_t j = 0; j < c; ++j) dot += ng.data[static_cast<size_t>(i * c + j)] * y.data[static_cast<size_t>(i * c + j)];
            for (int64_t j = 0; j < c; ++j) {
                size_t k = static_cast<size_t>(i * c + j);
                t.data[k] = y.data[k] * (ng.data[k] - dot);
            }
        }
        gg.accum(gg.parents(self)[0], t);
    });
}

// Per-row layer normalization without affine terms (scale/shift come from
// AdaLN modulation).
template <class T>
Var<T> layer_norm_rows(Var<T> a, T eps = T(1e-5)) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    if (av.rank() != 2) throw ContractViolation("layer_norm_rows: rank-2 required");
    const int64_t r = av.shape[0], c = av.shape[1];
    Tensor<T> out(av.shape);
    std::vector<T> inv_std(static_cast<size_t>(r));
    for (int64_t i = 0; i < r; ++i) {
        T mean = 0;
        for (int64_t j = 0; j < c; ++j) mean += av.data[static_cast<size_t>(i * c + j)];
        mean /= static_cast<T>(c);
        T var = 0;
        for (int64_t j = 0; j < c; ++j) {
            T d = av.data[static_cast<size_t>(i * c + j)] - mean;
            var += d * d;
        }
        var /= static_cast<T>(c);
        T is = T(1) / std::sqrt(var + eps);
        inv_std[static_cast<size_t>(i)] = is;
        for (int64_t j = 0; j < c; ++j)
            out.data[static_cast<size_t>(i * c + j)] = (av.data[static_cast<size_t>(i * c + j)] - mean) * is;
    }
    return g.push(std::move(out), {a.id}, [r, c, inv_std](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        const auto& y = gg.val(self);
        Tensor<T> t(y.shape);
        for (int64_t i = 0; i < r; ++i) {
            T mg = 0, mgy = 0;
            for (int64_t j = 0; j < c; ++j) {
                size_t k = static_cast<size_t>(i * c + j);
                mg += ng.data[k];
                mgy += ng.data[k] * y.data[k];
            }
            mg /= static_cast<T>(c);
            mgy /= static_cast<T>(c);
            for (int64_t j = 0; j < c; ++j) {
                size_t k = static_cast<size_t>(i * c + j);
                t.data[k] = inv_std[static_cast<size_t>(i)] * (ng.data[k] - mg - y.data[k] * mgy);
            }
        }
        gg.accum(gg.parents(self)[0], t);
    });
}

// ---------------- reductions ----------------

template <class T>
Var<T> sum_all(Var<T> a) {
    Graph<T>& g = *a.g;
    const auto& av = g.val(a.id);
    T s = 0;
    for (T x : av.data) s += x;
    return g.push(Tensor<T>::scalar(s), {a.id}, [](Graph<T>& gg, int32_t self) {
        const T gr = gg.grad(self).data[0];
        int32_t p = gg.parents(self)[0];
        if (!gg.requires_grad(p)) return;
        Tensor<T>& gp = gg.grad_buf(p);
        for (auto& x : gp.data) x += gr;
    });
}

template <class T>
Var<T> mean_all(Var<T> a) {
    const T scale = T(1) / static_cast<T>(a.g->val(a.id).numel());
    return mul_scalar(sum_all(a), scale);
}

// ---------------- depthwise temporal convolution ----------------

// x: (L x C), kernel: (K x C) with K odd; zero padding, output (L x C).
template <class T>
Var<T> dwconv1d(Var<T> x, Var<T> kernel) {
    Graph<T>& g = *x.g;
    const auto& xv = g.val(x.id);
    const auto& kv = g.val(kernel.id);
    if (xv.rank() != 2 || kv.rank() != 2 || xv.shape[1] != kv.shape[1] || kv.shape[0] % 2 == 0)
        throw ContractViolation("dwconv1d: need (L,C) input and odd (K,C) kernel");
    const int64_t L = xv.shape[0], C = xv.shape[1], K = kv.shape[0], H = K / 2;
    Tensor<T> out(xv.shape);
    for (int64_t t = 0; t < L; ++t)
        for (int64_t d = 0; d < K; ++d) {
            const int64_t s = t + d - H;
            if (s < 0 || s >= L) continue;
            for (int64_t c = 0; c < C; ++c)
                out.data[static_cast<size_t>(t * C + c)] += kv.data[static_cast<size_t>(d * C + c)] * xv.data[static_cast<size_t>(s * C + c)];
        }
    return g.push(std::move(out), {x.id, kernel.id}, [L, C, K, H](Graph<T>& gg, int32_t self) {
        const auto& ng = gg.grad(self);
        const auto& ps = gg.parents(self);
        const auto& xvv = gg.val(ps[0]);
        const auto& kvv = gg.val(ps[1]);
        if (gg.requires_grad(ps[0])) {
            Tensor<T>& gx = gg.grad_buf(ps[0]);
            for (int64_t t = 0; t < L; ++t)
                for (int64_t d = 0; d < K; ++d) {
                    const int64_t s = t + d - H;
                    if (s < 0 || s >= L) continue;
                    for (int64_t c = 0; c < C; ++c)
                        gx.data[static_cast<size_t>(s * C + c)] += kvv.data[static_cast<size_t>(d * C + c)] * ng.data[static_cast<size_t>(t * C + c)];
                }
        }
        if (gg.requires_grad(ps[1])) {
            Tensor<T>& gk = gg.grad_buf(ps[1]);
            for (int64_t t = 0; t < L; ++t)
                for (int64_t d = 0; d < K; ++d) {
                    const int64_t s = t + d - H;
                    if (s < 0 || s >= L) continue;
                    for (int64_t c = 0; c < C; ++c)
                        gk.data[static_cast<size_t>(d * C + c)] += ng.data[static_cast<size_t>(t * C + c)] * xvv.data[static_cast<size_t>(s * C + c)];
                }
        }
    });
}

// operator sugar
template <class T>
Var<T> operator+(Var<T> a, Var<T> b) {
    return add(a, b);
}
template <class T>
Var<T> operator-(Var<T> a, Var<T> b) {
    return sub(a, b);
}
template <class T>
Var<T> operator*(Var<T> a, Var<T> b) {
    return mul(a, b);
}
template <class T>
Var<T> operator/(Var<T> a, Var<T> b) {
    return div(a, b);
}
template <class T>
Var<T> operator*(Var<T> a, T c) {
    return mul_scalar(a, c);
}
template <class T>
Var<T> operator-(Var<T> a) {
    return neg(a);
}

}  // namespace lcl
