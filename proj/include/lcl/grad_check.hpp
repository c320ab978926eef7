#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "lcl/graph.hpp"
#include "lcl/rng.hpp"
#include "lcl/tensor.hpp"

namespace lcl {

// Central-difference check of a scalar-valued builder. The builder receives a
// fresh graph plus leaves matching `inputs` and returns the scalar output.
// Returns the max over all checked coordinates of
//   |analytic - numeric| / max(|analytic|, |numeric|, floor).
// Double precision only; f32 FD noise would drown real adjoint bugs.
using ScalarBuilder = std::function<Var<double>(Graph<double>&, const std::vector<Var<double>>&)>;

inline double grad_check(std::vector<Tensor<double>> inputs, const ScalarBuilder& build, double h = 1e-5,
                         int64_t max_coords_per_input = -1, uint64_t sample_seed = 7) {
    auto eval = [&](const std::vector<Tensor<double>>& xs) {
        Graph<double> g;
        std::vector<Var<double>> leaves;
        leaves.reserve(xs.size());
        for (const auto& t : xs) leaves.push_back(g.leaf(t));
        return build(g, leaves).val().data[0];
    };

    // analytic pass
    Graph<double> g;
    std::vector<Var<double>> leaves;
    for (const auto& t : inputs) leaves.push_back(g.leaf(t));
    Var<double> out = build(g, leaves);
    g.backward(out);
    std::vector<Tensor<double>> analytic;
    analytic.reserve(leaves.size());
    for (auto v : leaves) analytic.push_back(v.grad());

    Rng rng(sample_seed);
    double worst = 0.0;
    for (size_t t = 0; t < inputs.size(); ++t) {
        const int64_t n = inputs[t].numel();
        std::vector<int64_t> coords;
        if (max_coords_per_input < 0 || n <= max_coords_per_input) {
            for (int64_t i = 0; i < n; ++i) coords.push_back(i);
        } else {
            for (int64_t i = 0; i < max_coords_per_input; ++i)
                coords.push_back(static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(n))));
        }
        for (int64_t i : coords) {
            const double orig = inputs[t].data[static_cast<size_t>(i)];
            inputs[t].data[static_cast<size_t>(i)] = orig + h;
            const double fp = eval(inputs);
            inputs[t].data[static_cast<size_t>(i)] = orig - h;
            const double fm = eval(inputs);
            inputs[t].data[static_cast<size_t>(i)] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[t].data[static_cast<size_t>(i)];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            worst = std::max(worst, std::fabs(a - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace lcl
