#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <utility>

#include "lcl/edm.hpp"
#include "lcl/graph.hpp"
#include "lcl/rng.hpp"
#include "lcl/tensor.hpp"

namespace lcl {

// Exponentially shrinking log-sigma gap between the two training noise
// levels.
struct ConsistencySchedule {
    double gap_max = 2.0;
    double gap_min = 1e-4;
    int64_t total_steps = 10000;

    void validate() const {
        if (!(gap_min > 0 && gap_min < gap_max) || total_steps <= 0)
            throw ContractViolation("consistency schedule: need 0 < gap_min < gap_max, total_steps > 0");
    }
};

inline double gap_at(const ConsistencySchedule& s, int64_t k) {
    s.validate();
    if (k < 0 || k > s.total_steps) throw ContractViolation("gap_at: step outside schedule");
    const double t = static_cast<double>(k) / static_cast<double>(s.total_steps);
    return s.gap_max * std::pow(s.gap_min / s.gap_max, t);
}

// Boundary-shifted coefficients: c_skip(sigma_min) = 1 and
// c_out(sigma_min) = 0 hold exactly, so the map is the identity at the
// boundary for any network output. Input scaling is unchanged.
struct ConsistencyPrecond {
    double c_skip, c_out, c_in, c_noise;
};

inline ConsistencyPrecond consistency_precondition(double sigma, const EDMParams& p) {
    if (sigma < p.sigma_min) throw ContractViolation("consistency_precondition: sigma below sigma_min");
    const double sd2 = p.sigma_data * p.sigma_data;
    const double ds = sigma - p.sigma_min;
    const double root = std::sqrt(sigma * sigma + sd2);
    return ConsistencyPrecond{sd2 / (ds * ds + sd2), p.sigma_data * ds / root, 1.0 / root,
                              std::log(sigma) / 4.0};
}

template <class T, class ModelFn>
Var<T> consistency_fn_in_graph(Graph<T>& g, Var<T> noisy, double sigma, const EDMParams& p, ModelFn&& model) {
    const ConsistencyPrecond c = consistency_precondition(sigma, p);
    Var<T> f = model(g, mul_scalar(noisy, static_cast<T>(c.c_in)), c.c_noise);
    return add(mul_scalar(noisy, static_cast<T>(c.c_skip)), mul_scalar(f, static_cast<T>(c.c_out)));
}

inline double huber_c(int64_t numel) { return 0.00054 * std::sqrt(static_cast<double>(numel)); }

// d(a, b) = sqrt(|a - b|^2 + c^2) - c
template <class T>
Var<T> pseudo_huber(Var<T> a, Var<T> b, double c) {
    Var<T> ss = sum_all(square(sub(a, b)));
    return add_scalar(vsqrt(add_scalar(ss, static_cast<T>(c * c))), static_cast<T>(-c));
}

// Draw the higher noise level from the clamped log-normal proposal, then
// place the lower one a fixed log gap below it. The clamp floor keeps the
// lower level at or above sigma_min; the resample loop is defensive only.
inline std::pair<double, double> sample_sigma_pair(Rng& rng, const EDMParams& p, double gap) {
    const double floor = p.sigma_min * std::exp(gap);
    for (int attempt = 0; attempt < 100; ++attempt) {
        double hi = std::exp(p.p_mean + p.p_std * rng.normal());
        hi = std::clamp(hi, floor, p.sigma_max);
        const double lo = std::exp(std::log(hi) - gap);
        if (lo >= p.sigma_min) return {lo, hi};
        std::cerr << "[consistency] resampling sigma pair below boundary\n";
    }
    throw NumericalError("sample_sigma_pair: persistent boundary violation");
}

// One loss term: lambda * d(f_student(x_hi, hi), f_teacher(x_lo, lo)) with
// the same noise realization at both levels. The teacher closure must
// evaluate without touching graph leaves so no gradient can reach it.
template <class T, class StudentFn, class TeacherFn>
Var<T> consistency_loss_term(Graph<T>& g, const Tensor<T>& clean, double sigma_lo, double sigma_hi,
                             const Tensor<T>& noise, const EDMParams& p, StudentFn&& student, TeacherFn&& teacher) {
    require_same_shape(clean, noise, "consistency loss noise");
    if (!(sigma_hi > sigma_lo)) throw ContractViolation("consistency loss: need sigma_hi > sigma_lo");
    Tensor<T> x_hi = clean, x_lo = clean;
    for (size_t i = 0; i < clean.data.size(); ++i) {
        x_hi.data[i] += static_cast<T>(sigma_hi) * noise.data[i];
        x_lo.data[i] += static_cast<T>(sigma_lo) * noise.data[i];
    }
    Var<T> f_student = consistency_fn_in_graph(g, g.constant(std::move(x_hi)), sigma_hi, p, student);
    Var<T> f_teacher = consistency_fn_in_graph(g, g.constant(std::move(x_lo)), sigma_lo, p, teacher);
    if (g.requires_grad(f_teacher.id)) throw ContractViolation("consistency loss: teacher output carries gradient");
    const double lambda = 1.0 / (sigma_hi - sigma_lo);
    return mul_scalar(pseudo_huber(f_student, f_teacher, huber_c(clean.numel())), static_cast<T>(lambda));
}

// Consistency map for sampling: (x, sigma) -> f_theta(x, sigma) at the
// tensor level, any conditioning folded in by the caller.
template <class T>
using ConsistencyFn = std::function<Tensor<T>(const Tensor<T>&, double)>;

template <class T>
Tensor<T> one_step_sample(const ConsistencyFn<T>& f, const Shape& shape, Rng& rng, const EDMParams& p,
                          int64_t* evals = nullptr) {
    Tensor<T> z = Tensor<T>::randn(shape, rng, static_cast<T>(p.sigma_max));
    if (evals) *evals = 1;
    Tensor<T> out = f(z, p.sigma_max);
    require_finite(out, "one_step_sample");
    return out;
}

// Ladder of num_steps+1 rungs; one consistency application per rung except
// the last, with fresh re-noising up to the next rung in between. Exactly
// num_steps network evaluations.
template <class T>
Tensor<T> multistep_sample(const ConsistencyFn<T>& f, const Shape& shape, int num_steps, Rng& rng, const EDMParams& p,
                           int64_t* evals = nullptr) {
    if (num_steps < 1) throw ContractViolation("multistep_sample: num_steps must be >= 1");
    std::vector<double> sigmas = sigma_ladder(num_steps + 1, p);
    Tensor<T> x = Tensor<T>::randn(shape, rng, static_cast<T>(p.sigma_max));
    int64_t count = 0;
    for (int j = 0; j < num_steps; ++j) {
        x = f(x, sigmas[static_cast<size_t>(j)]);
        ++count;
        require_finite(x, "multistep_sample step " + std::to_string(j));
        if (j + 1 < num_steps) {
            const double s_next = sigmas[static_cast<size_t>(j + 1)];
            const double amp = std::sqrt(std::max(0.0, s_next * s_next - p.sigma_min * p.sigma_min));
            Tensor<T> n = Tensor<T>::randn(shape, rng);
            for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += static_cast<T>(amp) * n.data[i];
        }
    }
    if (evals) *evals = count;
    return x;
}

}  // namespace lcl
