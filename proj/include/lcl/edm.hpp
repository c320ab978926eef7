#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "lcl/graph.hpp"
#include "lcl/rng.hpp"
#include "lcl/tensor.hpp"

namespace lcl {

struct EDMParams {
    double sigma_min = 0.002;
    double sigma_max = 80.0;
    double sigma_data = 0.5;
    double rho = 7.0;
    double p_mean = -1.2;
    double p_std = 1.2;

    void validate() const {
        if (!(sigma_min > 0 && sigma_min < sigma_data && sigma_data < sigma_max) || rho <= 0 || p_std <= 0)
            throw ContractViolation("edm params: need 0 < sigma_min < sigma_data < sigma_max, rho > 0, p_std > 0");
    }
};

struct Precond {
    double c_skip, c_out, c_in, c_noise;
};

inline Precond precondition(double sigma, const EDMParams& p) {
    if (sigma <= 0) throw ContractViolation("precondition: sigma must be positive");
    const double sd2 = p.sigma_data * p.sigma_data;
    const double s2 = sigma * sigma;
    return Precond{sd2 / (s2 + sd2), sigma * p.sigma_data / std::sqrt(s2 + sd2), 1.0 / std::sqrt(s2 + sd2),
                   std::log(sigma) / 4.0};
}

inline double sample_training_sigma(Rng& rng, const EDMParams& p) {
    const double sigma = std::exp(p.p_mean + p.p_std * rng.normal());
    return std::clamp(sigma, p.sigma_min, p.sigma_max);
}

inline double loss_weight(double sigma, const EDMParams& p) {
    const double sd = p.sigma_data;
    return (sigma * sigma + sd * sd) / ((sigma * sd) * (sigma * sd));
}

inline std::vector<double> sigma_ladder(int num_steps, const EDMParams& p) {
    if (num_steps < 1) throw ContractViolation("sigma_ladder: num_steps must be >= 1");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(num_steps));
    if (num_steps == 1) {
        out.push_back(p.sigma_max);
        return out;
    }
    const double inv_rho = 1.0 / p.rho;
    const double hi = std::pow(p.sigma_max, inv_rho);
    const double lo = std::pow(p.sigma_min, inv_rho);
    for (int i = 0; i < num_steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(num_steps - 1);
        out.push_back(std::pow(hi + t * (lo - hi), p.rho));
    }
    out.front() = p.sigma_max;  // endpoint-exact despite pow round-trip
    out.back() = p.sigma_min;
    return out;
}

// x_hat = c_skip * noisy + c_out * F(c_in * noisy, c_noise). The model
// closure receives the scaled input and the noise-level code and returns the
// raw network output in-graph, so the loss can backpropagate through it.
template <class T, class ModelFn>
Var<T> denoise_in_graph(Graph<T>& g, Var<T> noisy, double sigma, const EDMParams& p, ModelFn&& model) {
    const Precond c = precondition(sigma, p);
    Var<T> scaled = mul_scalar(noisy, static_cast<T>(c.c_in));
    Var<T> f = model(g, scaled, c.c_noise);
    return add(mul_scalar(noisy, static_cast<T>(c.c_skip)), mul_scalar(f, static_cast<T>(c.c_out)));
}

// Single-sequence loss term: w(sigma) * mean((x_hat - clean)^2). Batch means
// are taken by the caller.
template <class T, class ModelFn>
Var<T> diffusion_loss_term(Graph<T>& g, const Tensor<T>& clean, double sigma, const Tensor<T>& noise,
                           const EDMParams& p, ModelFn&& model) {
    require_same_shape(clean, noise, "diffusion loss noise");
    Tensor<T> noisy = clean;
    for (size_t i = 0; i < noisy.data.size(); ++i) noisy.data[i] += static_cast<T>(sigma) * noise.data[i];
    Var<T> noisy_v = g.constant(std::move(noisy));
    Var<T> x_hat = denoise_in_graph(g, noisy_v, sigma, p, model);
    Var<T> resid = sub(x_hat, g.constant(clean));
    return mul_scalar(mean_all(square(resid)), static_cast<T>(loss_weight(sigma, p)));
}

// Denoiser for sampling: maps (noisy, sigma) to the denoised estimate x_hat,
// with any guidance already folded in by the caller.
template <class T>
using DenoiserFn = std::function<Tensor<T>(const Tensor<T>&, double)>;

// Deterministic probability-flow integration from z*sigma_max down the
// ladder with a final step to zero, Heun on interior steps and Euler on the
// last. Evaluation count is 2*num_steps - 1.
template <class T>
Tensor<T> ode_sample(const DenoiserFn<T>& denoiser, const Shape& shape, int num_steps, Rng& rng, const EDMParams& p,
                     int64_t* denoiser_evals = nullptr) {
    std::vector<double> sigmas = sigma_ladder(num_steps, p);
    sigmas.push_back(0.0);
    Tensor<T> x = Tensor<T>::randn(shape, rng, static_cast<T>(sigmas[0]));
    int64_t evals = 0;
    for (size_t i = 0; i + 1 < sigmas.size(); ++i) {
        const double s_cur = sigmas[i], s_next = sigmas[i + 1];
        Tensor<T> den = denoiser(x, s_cur);
        ++evals;
        require_finite(den, "ode step " + std::to_string(i));
        const double h = s_next - s_cur;
        Tensor<T> d(x.shape);
        for (size_t j = 0; j < x.data.size(); ++j)
            d.data[j] = (x.data[j] - den.data[j]) / static_cast<T>(s_cur);
        if (s_next == 0.0) {
            for (size_t j = 0; j < x.data.size(); ++j) x.data[j] += static_cast<T>(h) * d.data[j];
        } else {
            Tensor<T> xe(x.shape);
            for (size_t j = 0; j < x.data.size(); ++j) xe.data[j] = x.data[j] + static_cast<T>(h) * d.data[j];
            Tensor<T> den2 = denoiser(xe, s_next);
            ++evals;
            require_finite(den2, "ode correction " + std::to_string(i));
            for (size_t j = 0; j < x.data.size(); ++j) {
                const T d2 = (xe.data[j] - den2.data[j]) / static_cast<T>(s_next);
                x.data[j] += static_cast<T>(h) * T(0.5) * (d.data[j] + d2);
            }
        }
        require_finite(x, "ode state after step " + std::to_string(i));
    }
    if (denoiser_evals) *denoiser_evals = evals;
    return x;
}

}  // namespace lcl
