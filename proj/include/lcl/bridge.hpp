#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "lcl/dit.hpp"
#include "lcl/edm.hpp"
#include "lcl/graph.hpp"
#include "lcl/nn.hpp"
#include "lcl/rng.hpp"

namespace lcl {

// Diffusion MLP over audio-side embeddings, conditioned on the text-side
// embedding through AdaLN only.
struct BridgeConfig {
    int64_t embed_dim = 64;
    int64_t hidden_units = 1024;
    int64_t num_blocks = 8;
    double cond_dropout = 0.1;
    int64_t noise_embed_dim = 64;

    void validate() const {
        if (embed_dim <= 0 || hidden_units <= 0 || num_blocks <= 0 || noise_embed_dim <= 0 ||
            noise_embed_dim % 2 != 0 || cond_dropout < 0.0 || cond_dropout > 1.0)
            throw ContractViolation("bridge config: bad field");
    }
};

inline std::vector<ParamSpec> bridge_param_specs(const BridgeConfig& cfg) {
    cfg.validate();
    std::vector<ParamSpec> s;
    const int64_t h = cfg.hidden_units, ned = cfg.noise_embed_dim;
    push_linear_spec(s, "in_proj", cfg.embed_dim, h);
    push_linear_spec(s, "noise_mlp.fc1", ned, ned);
    push_linear_spec(s, "noise_mlp.fc2", ned, ned);
    push_linear_spec(s, "text_proj", cfg.embed_dim, ned);
    s.push_back({"null.text", Shape{1, cfg.embed_dim}});
    for (int64_t i = 0; i < cfg.num_blocks; ++i) {
        const std::string b = "block" + std::to_string(i);
        push_linear_spec(s, b + ".adaln", ned, 3 * h);
        push_linear_spec(s, b + ".fc1", h, h);
        push_linear_spec(s, b + ".fc2", h, h);
    }
    push_linear_spec(s, "out_proj", h, cfg.embed_dim);
    return s;
}

inline int64_t bridge_param_count(const BridgeConfig& cfg) { return total_params(bridge_param_specs(cfg)); }

template <class T>
ParamStore<T> bridge_init_params(const BridgeConfig& cfg, Rng& rng) {
    ParamStore<T> store;
    for (const auto& spec : bridge_param_specs(cfg)) {
        const std::string& n = spec.name;
        const bool zero = n.ends_with(".bias") || n.starts_with("out_proj.") || n.find(".adaln.") != std::string::npos;
        store.add(n, zero ? Tensor<T>::zeros(spec.shape) : Tensor<T>::randn(spec.shape, rng, T(0.02)));
    }
    return store;
}

// Raw denoising output. Rows of noisy_scaled share one noise level and one
// conditioning; text == nullptr selects the learned null embedding.
template <class T>
Var<T> bridge_forward(Graph<T>& g, const BoundParams<T>& p, const BridgeConfig& cfg, Var<T> noisy_scaled,
                      double c_noise, const Tensor<std::type_identity_t<T>>* text_emb) {
    cfg.validate();
    const auto& xv = g.val(noisy_scaled.id);
    if (xv.rank() != 2 || xv.shape[1] != cfg.embed_dim)
        throw ContractViolation("bridge_forward: input must be (N x embed_dim)");

    Var<T> e = g.constant(sinusoidal_embed<T>(c_noise, cfg.noise_embed_dim));
    e = linear(silu(linear(e, p, "noise_mlp.fc1")), p, "noise_mlp.fc2");
    Var<T> text{&g, -1};
    if (text_emb != nullptr) {
        if (text_emb->rank() != 2 || text_emb->shape[0] != 1 || text_emb->shape[1] != cfg.embed_dim)
            throw ContractViolation("bridge_forward: text embedding must be (1 x embed_dim)");
        text = g.constant(*text_emb);
    } else {
        text = p["null.text"];
    }
    e = add(e, linear(text, p, "text_proj"));

    Var<T> h = linear(noisy_scaled, p, "in_proj");
    const int64_t hu = cfg.hidden_units;
    for (int64_t i = 0; i < cfg.num_blocks; ++i) {
        const std::string b = "block" + std::to_string(i);
        Var<T> m = linear(e, p, b + ".adaln");
        Var<T> shift = slice_cols(m, 0, hu);
        Var<T> scale = slice_cols(m, hu, 2 * hu);
        Var<T> gate = slice_cols(m, 2 * hu, 3 * hu);
        Var<T> branch = modulate(layer_norm_rows(h), scale, shift);
        branch = linear(silu(linear(branch, p, b + ".fc1")), p, b + ".fc2");
        h = add(h, mul(gate, branch));
    }
    return linear(h, p, "out_proj");
}

// EDM denoise + Heun integration over embedding vectors, then projection
// back to the unit sphere.
template <class T>
Tensor<T> bridge_sample(const ParamStore<T>& params, const BridgeConfig& cfg,
                        const Tensor<std::type_identity_t<T>>* text_emb, int num_steps, Rng& rng,
                        const EDMParams& edm, int64_t* evals = nullptr) {
    DenoiserFn<T> den = [&](const Tensor<T>& x, double sigma) {
        Graph<T> g;
        auto bound = BoundParams<T>::bind(g, params);
        auto x_hat = denoise_in_graph(g, g.constant(x), sigma, edm,
                                      [&](Graph<T>& gg, Var<T> xs, double cn) {
                                          return bridge_forward(gg, bound, cfg, xs, cn, text_emb);
                                      });
        return g.val(x_hat.id);
    };
    Tensor<T> out = ode_sample(den, Shape{1, cfg.embed_dim}, num_steps, rng, edm, evals);
    double norm = 0;
    for (T v : out.data) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw NumericalError("bridge_sample: zero-norm sample");
    for (T& v : out.data) v = static_cast<T>(v / norm);
    return out;
}

struct GapStats {
    double centroid_distance = 0.0;
    double mean_pairwise_cosine = 0.0;
};

// centroid_distance = |mean(text) - mean(audio)|; cosine averaged over
// row-matched pairs.
GapStats modality_gap_stats(const Tensor<float>& text_rows, const Tensor<float>& audio_rows);

}  // namespace lcl
