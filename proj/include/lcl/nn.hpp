#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcl/graph.hpp"
#include "lcl/rng.hpp"
#include "lcl/tensor.hpp"

namespace lcl {

// Name + shape only; lets callers count or lay out parameters without
// allocating storage.
struct ParamSpec {
    std::string name;
    Shape shape;
};

inline int64_t total_params(const std::vector<ParamSpec>& specs) {
    int64_t n = 0;
    for (const auto& s : specs) n += shape_numel(s.shape);
    return n;
}

// Ordered named parameter set. Insertion order is the serialization order.
template <class T>
struct ParamStore {
    std::vector<std::string> names;
    std::unordered_map<std::string, Tensor<T>> values;

    Tensor<T>& add(const std::string& name, Tensor<T> t) {
        if (values.count(name)) throw ContractViolation("duplicate parameter: " + name);
        names.push_back(name);
        return values.emplace(name, std::move(t)).first->second;
    }

    bool has(const std::string& name) const { return values.count(name) != 0; }

    Tensor<T>& at(const std::string& name) {
        auto it = values.find(name);
        if (it == values.end()) throw ContractViolation("unknown parameter: " + name);
        return it->second;
    }
    const Tensor<T>& at(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end()) throw ContractViolation("unknown parameter: " + name);
        return it->second;
    }

    int64_t total() const {
        int64_t n = 0;
        for (const auto& name : names) n += values.at(name).numel();
        return n;
    }

    template <class U>
    ParamStore<U> cast() const {
        ParamStore<U> out;
        for (const auto& name : names) out.add(name, values.at(name).template cast<U>());
        return out;
    }
};

// Allocate storage for a spec list. Weights get N(0, std) unless their name
// ends in ".bias" or contains "zero"-tagged roles handled by callers.
template <class T>
ParamStore<T> alloc_params(const std::vector<ParamSpec>& specs, Rng& rng, double init_std = 0.02) {
    ParamStore<T> store;
    for (const auto& s : specs) store.add(s.name, Tensor<T>::randn(s.shape, rng, init_std));
    return store;
}

// Parameters bound into a graph as leaves for one forward/backward pass.
template <class T>
struct BoundParams {
    Graph<T>* g = nullptr;
    std::unordered_map<std::string, Var<T>> vars;

    static BoundParams bind(Graph<T>& graph, const ParamStore<T>& store) {
        BoundParams b;
        b.g = &graph;
        for (const auto& name : store.names) b.vars.emplace(name, graph.leaf(store.values.at(name)));
        return b;
    }

    // Snapshot binding: weights enter as plain constants, so anything
    // computed from them is barred from receiving gradient.
    static BoundParams bind_frozen(Graph<T>& graph, const ParamStore<T>& store) {
        BoundParams b;
        b.g = &graph;
        for (const auto& name : store.names) b.vars.emplace(name, graph.constant(store.values.at(name)));
        return b;
    }

    Var<T> operator[](const std::string& name) const {
        auto it = vars.find(name);
        if (it == vars.end()) throw ContractViolation("unbound parameter: " + name);
        return it->second;
    }

    // Pull accumulated gradients back out of the graph, keyed by name.
    std::unordered_map<std::string, Tensor<T>> grads() {
        std::unordered_map<std::string, Tensor<T>> out;
        for (auto& [name, var] : vars) out.emplace(name, g->grad(var.id));
        return out;
    }
};

// y = x W + b with x (N x in), W (in x out), b (1 x out).
template <class T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
    return add(matmul(x, w), b);
}

template <class T>
Var<T> linear(Var<T> x, const BoundParams<T>& p, const std::string& prefix) {
    return linear(x, p[prefix + ".weight"], p[prefix + ".bias"]);
}

inline void push_linear_spec(std::vector<ParamSpec>& specs, const std::string& prefix, int64_t in, int64_t out) {
    specs.push_back({prefix + ".weight", Shape{in, out}});
    specs.push_back({prefix + ".bias", Shape{1, out}});
}

}  // namespace lcl
