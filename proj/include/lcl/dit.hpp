#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lcl/graph.hpp"
#include "lcl/nn.hpp"
#include "lcl/rng.hpp"
#include "lcl/tensor.hpp"

namespace lcl {

struct DiTConfig {
    int64_t model_dim = 64;
    int64_t mlp_multiplier = 4;
    int64_t num_heads = 2;
    int64_t num_layers = 4;
    int64_t patch_size = 2;
    int64_t noise_embed_dim = 64;
    int64_t latent_channels = 8;
    int64_t context_channels = 0;   // 0 disables context tokens
    int64_t style_embed_dim = 0;    // 0 disables style conditioning
    int64_t max_target_tokens = 64;
    int64_t max_context_tokens = 64;

    void validate() const {
        if (model_dim <= 0 || mlp_multiplier <= 0 || num_heads <= 0 || num_layers <= 0 || patch_size <= 0 ||
            noise_embed_dim <= 0 || latent_channels <= 0 || context_channels < 0 || style_embed_dim < 0)
            throw ContractViolation("dit config: non-positive field");
        if (model_dim % num_heads != 0) throw ContractViolation("dit config: model_dim must divide by num_heads");
        if (noise_embed_dim % 2 != 0) throw ContractViolation("dit config: noise_embed_dim must be even");
    }
};

// Conditioning inputs for one forward pass. Missing or dropped fields fall
// back to the learned null tokens; supplying a field the config does not
// enable is a contract violation.
template <class T>
struct DiTCond {
    const Tensor<T>* context = nullptr;  // (ctx_len x context_channels)
    const Tensor<T>* style = nullptr;    // (1 x style_embed_dim)
    bool drop_context = false;
    bool drop_style = false;
};

// Interleaved sin/cos at geometrically spaced frequencies. Accepts any real
// value; the noise-level code log(sigma)/4 is negative for sigma < 1.
template <class T>
Tensor<T> sinusoidal_embed(double value, int64_t dim) {
    if (dim <= 0 || dim % 2 != 0) throw ContractViolation("sinusoidal_embed: dim must be even and positive");
    Tensor<T> out(Shape{1, dim});
    const int64_t half = dim / 2;
    for (int64_t i = 0; i < half; ++i) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(half));
        out.data[static_cast<size_t>(2 * i)] = static_cast<T>(std::sin(value * freq));
        out.data[static_cast<size_t>(2 * i + 1)] = static_cast<T>(std::cos(value * freq));
    }
    return out;
}

// Pad to a multiple of patch_size with zero frames, then fold each patch of
// frames into one token. Pure reshape; exact inverse via unpatchify.
template <class T>
Var<T> patchify(Graph<T>& g, Var<T> seq, int64_t patch_size) {
    const auto& v = g.val(seq.id);
    if (v.rank() != 2 || v.shape[0] < 1) throw ContractViolation("patchify: need (len x channels), len >= 1");
    const int64_t len = v.shape[0], ch = v.shape[1];
    const int64_t padded = ((len + patch_size - 1) / patch_size) * patch_size;
    Var<T> x = (padded == len) ? seq : pad_rows(seq, padded);
    return reshape(x, Shape{padded / patch_size, patch_size * ch});
}

template <class T>
Var<T> unpatchify(Graph<T>& g, Var<T> tokens, int64_t patch_size, int64_t orig_len, int64_t channels) {
    const auto& v = g.val(tokens.id);
    if (v.rank() != 2 || v.shape[1] != patch_size * channels)
        throw ContractViolation("unpatchify: token width mismatch");
    const int64_t padded = v.shape[0] * patch_size;
    if (padded < orig_len || padded - orig_len >= patch_size)
        throw IoError("unpatchify: token count inconsistent with recorded length");
    Var<T> x = reshape(tokens, Shape{padded, channels});
    return (padded == orig_len) ? x : slice_rows(x, 0, orig_len);
}

inline int64_t token_count(int64_t len, int64_t patch_size) { return (len + patch_size - 1) / patch_size; }

// h * (1 + scale) + shift with row-vector scale/shift broadcast over tokens.
template <class T>
Var<T> modulate(Var<T> h, Var<T> scale, Var<T> shift) {
    return add(mul(h, add_scalar(scale, T(1))), shift);
}

template <class T>
struct AdaLNChunks {
    Var<T> shift_attn, scale_attn, gate_attn, shift_mlp, scale_mlp, gate_mlp;
};

// Project the summed noise+conditioning embedding to the six per-branch
// modulation rows. Zero-initialized weights make every gate zero.
template <class T>
AdaLNChunks<T> adaln_modulate(Var<T> cond_embed, Var<T> w, Var<T> b, int64_t model_dim) {
    Var<T> m = linear(cond_embed, w, b);  // (1 x 6*model_dim)
    AdaLNChunks<T> c;
    c.shift_attn = slice_cols(m, 0, model_dim);
    c.scale_attn = slice_cols(m, model_dim, 2 * model_dim);
    c.gate_attn = slice_cols(m, 2 * model_dim, 3 * model_dim);
    c.shift_mlp = slice_cols(m, 3 * model_dim, 4 * model_dim);
    c.scale_mlp = slice_cols(m, 4 * model_dim, 5 * model_dim);
    c.gate_mlp = slice_cols(m, 5 * model_dim, 6 * model_dim);
    return c;
}

// Full self-attention with a width-3 depthwise temporal convolution applied
// to each of Q, K, V after its linear projection.
template <class T>
Var<T> attention_with_dw_conv(Var<T> x, const BoundParams<T>& p, const std::string& prefix, int64_t num_heads) {
    Graph<T>& g = *x.g;
    const auto& xv = g.val(x.id);
    if (xv.rank() != 2 || xv.shape[0] < 1) throw ContractViolation("attention: need at least one token");
    const int64_t d = xv.shape[1];
    const int64_t dh = d / num_heads;
    Var<T> q = dwconv1d(linear(x, p, prefix + ".q"), p[prefix + ".q.dw"]);
    Var<T> k = dwconv1d(linear(x, p, prefix + ".k"), p[prefix + ".k.dw"]);
    Var<T> v = dwconv1d(linear(x, p, prefix + ".v"), p[prefix + ".v.dw"]);
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
    std::vector<Var<T>> heads;
    heads.reserve(static_cast<size_t>(num_heads));
    for (int64_t h = 0; h < num_heads; ++h) {
        Var<T> qh = slice_cols(q, h * dh, (h + 1) * dh);
        Var<T> kh = slice_cols(k, h * dh, (h + 1) * dh);
        Var<T> vh = slice_cols(v, h * dh, (h + 1) * dh);
        Var<T> att = softmax_rows(mul_scalar(matmul(qh, transpose(kh)), scale));
        heads.push_back(matmul(att, vh));
    }
    return linear(concat_cols(heads), p, prefix + ".out");
}

namespace detail {
inline std::string blk(int64_t i) { return "block" + std::to_string(i); }
}  // namespace detail

inline std::vector<ParamSpec> dit_param_specs(const DiTConfig& cfg) {
    cfg.validate();
    std::vector<ParamSpec> s;
    const int64_t d = cfg.model_dim, ned = cfg.noise_embed_dim;
    push_linear_spec(s, "patch_embed", cfg.patch_size * cfg.latent_channels, d);
    s.push_back({"pos.target", Shape{cfg.max_target_tokens, d}});
    if (cfg.context_channels > 0) {
        push_linear_spec(s, "ctx_embed", cfg.patch_size * cfg.context_channels, d);
        s.push_back({"pos.ctx", Shape{cfg.max_context_tokens, d}});
        s.push_back({"null.ctx", Shape{1, d}});
    }
    push_linear_spec(s, "noise_mlp.fc1", ned, ned);
    push_linear_spec(s, "noise_mlp.fc2", ned, ned);
    if (cfg.style_embed_dim > 0) {
        push_linear_spec(s, "style_proj", cfg.style_embed_dim, ned);
        s.push_back({"null.style", Shape{1, cfg.style_embed_dim}});
    }
    for (int64_t i = 0; i < cfg.num_layers; ++i) {
        const std::string b = detail::blk(i);
        push_linear_spec(s, b + ".adaln", ned, 6 * d);
        for (const char* proj : {".attn.q", ".attn.k", ".attn.v"}) {
            push_linear_spec(s, b + proj, d, d);
            s.push_back({b + proj + std::string(".dw"), Shape{3, d}});
        }
        push_linear_spec(s, b + ".attn.out", d, d);
        push_linear_spec(s, b + ".mlp.fc1", d, cfg.mlp_multiplier * d);
        push_linear_spec(s, b + ".mlp.fc2", cfg.mlp_multiplier * d, d);
    }
    push_linear_spec(s, "head", d, cfg.patch_size * cfg.latent_channels);
    return s;
}

inline int64_t dit_param_count(const DiTConfig& cfg) { return total_params(dit_param_specs(cfg)); }

// Initialization: N(0, 0.02) weights, zero biases, delta depthwise kernels
// (attention starts exactly standard), zero AdaLN projections and zero head
// so the whole network starts as the zero function.
template <class T>
ParamStore<T> dit_init_params(const DiTConfig& cfg, Rng& rng) {
    ParamStore<T> store;
    for (const auto& spec : dit_param_specs(cfg)) {
        const std::string& n = spec.name;
        const bool zero = n.ends_with(".bias") || n.starts_with("head.") ||
                          n.find(".adaln.") != std::string::npos;
        if (zero) {
            store.add(n, Tensor<T>::zeros(spec.shape));
        } else if (n.ends_with(".dw")) {
            Tensor<T> k = Tensor<T>::zeros(spec.shape);
            for (int64_t c = 0; c < spec.shape[1]; ++c) k.at(1, c) = T(1);
            store.add(n, std::move(k));
        } else {
            store.add(n, Tensor<T>::randn(spec.shape, rng, T(0.02)));
        }
    }
    return store;
}

// Raw network output F_theta. Input is the preconditioned (already scaled)
// noisy sequence; c_noise is the noise-level code. Output matches the input
// shape. Throws on non-finite activations with the block index.
template <class T>
Var<T> dit_forward(Graph<T>& g, const BoundParams<T>& p, const DiTConfig& cfg, Var<T> noisy_scaled, double c_noise,
                   const DiTCond<T>& cond = {}) {
    cfg.validate();
    const auto& xv = g.val(noisy_scaled.id);
    if (xv.rank() != 2 || xv.shape[1] != cfg.latent_channels)
        throw ContractViolation("dit_forward: input must be (len x latent_channels)");
    const int64_t len = xv.shape[0];
    const int64_t n_tok = token_count(len, cfg.patch_size);
    if (n_tok > cfg.max_target_tokens) throw ContractViolation("dit_forward: sequence exceeds positional table");

    // target tokens
    Var<T> tok = linear(patchify(g, noisy_scaled, cfg.patch_size), p, "patch_embed");
    tok = add(tok, slice_rows(p["pos.target"], 0, n_tok));

    // context tokens (prepended)
    int64_t n_ctx = 0;
    if (cfg.context_channels > 0) {
        Var<T> ctx_tok{&g, -1};
        if (cond.context != nullptr && !cond.drop_context) {
            if (cond.context->rank() != 2 || cond.context->shape[1] != cfg.context_channels)
                throw ContractViolation("dit_forward: context must be (len x context_channels)");
            n_ctx = token_count(cond.context->shape[0], cfg.patch_size);
            if (n_ctx > cfg.max_context_tokens) throw ContractViolation("dit_forward: context exceeds positional table");
            ctx_tok = linear(patchify(g, g.constant(*cond.context), cfg.patch_size), p, "ctx_embed");
        } else {
            n_ctx = 1;
            ctx_tok = p["null.ctx"];
        }
        ctx_tok = add(ctx_tok, slice_rows(p["pos.ctx"], 0, n_ctx));
        tok = concat_rows<T>({ctx_tok, tok});
    } else if (cond.context != nullptr) {
        throw ContractViolation("dit_forward: variant does not accept context conditioning");
    }

    // noise-level embedding, with style added in the same space
    Var<T> e = g.constant(sinusoidal_embed<T>(c_noise, cfg.noise_embed_dim));
    e = linear(silu(linear(e, p, "noise_mlp.fc1")), p, "noise_mlp.fc2");
    if (cfg.style_embed_dim > 0) {
        Var<T> sty{&g, -1};
        if (cond.style != nullptr && !cond.drop_style) {
            if (cond.style->rank() != 2 || cond.style->shape[0] != 1 || cond.style->shape[1] != cfg.style_embed_dim)
                throw ContractViolation("dit_forward: style must be (1 x style_embed_dim)");
            sty = g.constant(*cond.style);
        } else {
            sty = p["null.style"];
        }
        e = add(e, linear(sty, p, "style_proj"));
    } else if (cond.style != nullptr) {
        throw ContractViolation("dit_forward: variant does not accept style conditioning");
    }

    for (int64_t i = 0; i < cfg.num_layers; ++i) {
        const std::string b = detail::blk(i);
        auto m = adaln_modulate(e, p[b + ".adaln.weight"], p[b + ".adaln.bias"], cfg.model_dim);
        Var<T> h = modulate(layer_norm_rows(tok), m.scale_attn, m.shift_attn);
        tok = add(tok, mul(m.gate_attn, attention_with_dw_conv(h, p, b + ".attn", cfg.num_heads)));
        h = modulate(layer_norm_rows(tok), m.scale_mlp, m.shift_mlp);
        Var<T> mid = silu(linear(h, p, b + ".mlp.fc1"));
        tok = add(tok, mul(m.gate_mlp, linear(mid, p, b + ".mlp.fc2")));
        if (!g.val(tok.id).all_finite())
            throw NumericalError("dit_forward: non-finite activations after block " + std::to_string(i));
    }

    Var<T> out_tok = (n_ctx > 0) ? slice_rows(tok, n_ctx, n_ctx + n_tok) : tok;
    Var<T> out = linear(layer_norm_rows(out_tok), p, "head");
    return unpatchify(g, out, cfg.patch_size, len, cfg.latent_channels);
}

template <class T>
Tensor<T> cfg_combine(const Tensor<T>& cond_out, const Tensor<T>& uncond_out, double weight) {
    require_same_shape(cond_out, uncond_out, "cfg_combine");
    Tensor<T> out(cond_out.shape);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = uncond_out.data[i] + static_cast<T>(weight) * (cond_out.data[i] - uncond_out.data[i]);
    return out;
}

}  // namespace lcl
