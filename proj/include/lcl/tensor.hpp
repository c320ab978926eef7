#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lcl/errors.hpp"
#include "lcl/rng.hpp"

namespace lcl {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) {
        if (d < 0) throw ContractViolation("negative dimension in shape");
        n *= d;
    }
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

// Dense row-major tensor. Value semantics; the scalar type is float for
// training and double for gradient checks.
template <class T>
struct Tensor {
    Shape shape;
    std::vector<T> data;

    Tensor() = default;

    explicit Tensor(Shape s) : shape(std::move(s)), data(static_cast<size_t>(shape_numel(shape)), T(0)) {}

    Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (shape_numel(shape) != static_cast<int64_t>(data.size()))
            throw ContractViolation("tensor shape " + shape_str(shape) + " does not match data length " +
                                    std::to_string(data.size()));
    }

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }

    static Tensor full(Shape s, T v) {
        Tensor t(std::move(s));
        for (auto& x : t.data) x = v;
        return t;
    }

    static Tensor scalar(T v) { return Tensor(Shape{}, std::vector<T>{v}); }

    static Tensor randn(Shape s, Rng& rng, T stddev = T(1)) {
        Tensor t(std::move(s));
        for (auto& x : t.data) x = static_cast<T>(rng.normal()) * stddev;
        return t;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t rank() const { return static_cast<int64_t>(shape.size()); }

    int64_t rows() const { return shape.size() == 2 ? shape[0] : (shape.empty() ? 1 : shape[0]); }
    int64_t cols() const { return shape.size() == 2 ? shape[1] : 1; }

    T& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols() + c)]; }
    T at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols() + c)]; }

    T& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    T operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

    bool all_finite() const {
        for (T x : data)
            if (!std::isfinite(static_cast<double>(x))) return false;
        return true;
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

template <class T>
void require_finite(const Tensor<T>& t, const std::string& context) {
    if (!t.all_finite()) throw NumericalError("non-finite values in " + context);
}

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const std::string& context) {
    if (!a.same_shape(b))
        throw ContractViolation(context + ": shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
}

// ---- broadcasting (numpy rules over trailing dimensions) ----

inline Shape broadcast_shape(const Shape& a, const Shape& b) {
    Shape out(std::max(a.size(), b.size()), 1);
    for (size_t i = 0; i < out.size(); ++i) {
        int64_t da = i < out.size() - a.size() ? 1 : a[i - (out.size() - a.size())];
        int64_t db = i < out.size() - b.size() ? 1 : b[i - (out.size() - b.size())];
        if (da != db && da != 1 && db != 1)
            throw ContractViolation("shapes not broadcastable: " + shape_str(a) + " vs " + shape_str(b));
        out[i] = std::max(da, db);
    }
    return out;
}

// Row-major strides with 0 for broadcast (size-1 or missing) dims, aligned to out_rank.
inline std::vector<int64_t> broadcast_strides(const Shape& shape, size_t out_rank) {
    std::vector<int64_t> strides(out_rank, 0);
    int64_t stride = 1;
    for (size_t i = 0; i < shape.size(); ++i) {
        size_t src = shape.size() - 1 - i;
        size_t dst = out_rank - 1 - i;
        strides[dst] = (shape[src] == 1) ? 0 : stride;
        stride *= shape[src];
    }
    return strides;
}

template <class T, class F>
Tensor<T> broadcast_binary(const Tensor<T>& a, const Tensor<T>& b, F&& f) {
    if (a.shape == b.shape) {  // fast path
        Tensor<T> out(a.shape);
        for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = f(a.data[i], b.data[i]);
        return out;
    }
    Shape os = broadcast_shape(a.shape, b.shape);
    Tensor<T> out(os);
    auto sa = broadcast_strides(a.shape, os.size());
    auto sb = broadcast_strides(b.shape, os.size());
    std::vector<int64_t> idx(os.size(), 0);
    for (int64_t flat = 0; flat < out.numel(); ++flat) {
        int64_t oa = 0, ob = 0;
        for (size_t d = 0; d < os.size(); ++d) {
            oa += idx[d] * sa[d];
            ob += idx[d] * sb[d];
        }
        out.data[static_cast<size_t>(flat)] = f(a.data[static_cast<size_t>(oa)], b.data[static_cast<size_t>(ob)]);
        for (size_t d = os.size(); d-- > 0;) {
            if (++idx[d] < os[d]) break;
            idx[d] = 0;
        }
    }
    return out;
}

// Sum `t` down to `target` shape (adjoint of broadcasting).
template <class T>
Tensor<T> reduce_to_shape(const Tensor<T>& t, const Shape& target) {
    if (t.shape == target) return t;
    Tensor<T> out(target);
    auto st = broadcast_strides(target, t.shape.size());
    std::vector<int64_t> idx(t.shape.size(), 0);
    for (int64_t flat = 0; flat < t.numel(); ++flat) {
        int64_t ot = 0;
        for (size_t d = 0; d < t.shape.size(); ++d) ot += idx[d] * st[d];
        out.data[static_cast<size_t>(ot)] += t.data[static_cast<size_t>(flat)];
        for (size_t d = t.shape.size(); d-- > 0;) {
            if (++idx[d] < t.shape[d]) break;
            idx[d] = 0;
        }
    }
    return out;
}

}  // namespace lcl
