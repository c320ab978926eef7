#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <string>
#include <unordered_map>

#include "lcl/nn.hpp"
#include "lcl/tensor.hpp"

namespace lcl {

// Linear warmup from zero, then half-cosine decay to zero at total_steps.
struct TrainSchedule {
    double base_lr = 1e-4;
    int64_t warmup_steps = 1000;
    int64_t total_steps = 10000;
    mutable bool warned_past_end = false;
};

inline double lr_at(const TrainSchedule& s, int64_t step) {
    if (s.total_steps <= 0 || s.warmup_steps < 0 || s.warmup_steps > s.total_steps)
        throw ContractViolation("schedule: need 0 <= warmup <= total, total > 0");
    if (step < 0) throw ContractViolation("schedule: negative step");
    if (step > s.total_steps) {
        if (!s.warned_past_end) {
            std::cerr << "[schedule] step " << step << " past total " << s.total_steps << ", lr clamped to 0\n";
            s.warned_past_end = true;
        }
        return 0.0;
    }
    if (s.warmup_steps > 0 && step <= s.warmup_steps)
        return s.base_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
    if (s.total_steps == s.warmup_steps) return s.base_lr;
    const double t = static_cast<double>(step - s.warmup_steps) / static_cast<double>(s.total_steps - s.warmup_steps);
    return s.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

// AdamW with decoupled weight decay. Moment buffers are keyed by parameter
// name so they can round-trip through checkpoints.
template <class T>
struct AdamW {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-2;
    int64_t t = 0;
    std::unordered_map<std::string, Tensor<T>> m, v;

    void step(ParamStore<T>& params, const std::unordered_map<std::string, Tensor<T>>& grads, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (const auto& name : params.names) {
            auto git = grads.find(name);
            if (git == grads.end()) continue;
            Tensor<T>& p = params.at(name);
            const Tensor<T>& g = git->second;
            require_same_shape(p, g, "adamw grad for " + name);
            auto& mb = moment(m, name, p.shape);
            auto& vb = moment(v, name, p.shape);
            for (size_t i = 0; i < p.data.size(); ++i) {
                const double gi = static_cast<double>(g.data[i]);
                double mi = beta1 * static_cast<double>(mb.data[i]) + (1.0 - beta1) * gi;
                double vi = beta2 * static_cast<double>(vb.data[i]) + (1.0 - beta2) * gi * gi;
                mb.data[i] = static_cast<T>(mi);
                vb.data[i] = static_cast<T>(vi);
                const double mhat = mi / bc1;
                const double vhat = vi / bc2;
                double pi = static_cast<double>(p.data[i]);
                pi -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * pi);
                p.data[i] = static_cast<T>(pi);
            }
        }
    }

private:
    Tensor<T>& moment(std::unordered_map<std::string, Tensor<T>>& buf, const std::string& name, const Shape& shape) {
        auto it = buf.find(name);
        if (it == buf.end()) it = buf.emplace(name, Tensor<T>::zeros(shape)).first;
        return it->second;
    }
};

}  // namespace lcl
