// Release gate. Each criterion prints exactly one PASS/FAIL line with its
// thresholds inline; the process exits nonzero if any line fails. Budgets are
// sized for a laptop-class machine with no accelerator.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lcl/bridge.hpp"
#include "lcl/config.hpp"
#include "lcl/consistency.hpp"
#include "lcl/dit.hpp"
#include "lcl/edm.hpp"
#include "lcl/grad_check.hpp"
#include "lcl/harness.hpp"
#include "lcl/io.hpp"
#include "lcl/metrics.hpp"
#include "lcl/optimizer.hpp"
#include "lcl/pipeline.hpp"
#include "lcl/report.hpp"

using namespace lcl;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

double secs(clk::time_point a, clk::time_point b) { return std::chrono::duration<double>(b - a).count(); }

double median3(double a, double b, double c) {
    std::vector<double> v{a, b, c};
    std::sort(v.begin(), v.end());
    return v[1];
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, ap);
    va_end(ap);
    return buf;
}

// The CLI chatters on stdout/stderr; the gate output stays one line per
// criterion, so CLI calls run with both streams parked.
struct Muted {
    std::ostringstream sink;
    std::streambuf* out;
    std::streambuf* err;
    Muted() : out(std::cout.rdbuf(sink.rdbuf())), err(std::cerr.rdbuf(sink.rdbuf())) {}
    ~Muted() {
        std::cout.rdbuf(out);
        std::cerr.rdbuf(err);
    }
};

int cli(std::initializer_list<std::string> args) {
    std::vector<std::string> argv_s = {"lcl"};
    argv_s.insert(argv_s.end(), args);
    std::vector<char*> argv;
    for (auto& s : argv_s) argv.push_back(s.data());
    Muted m;
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---- 1: finite-difference gradients ---------------------------------------

Outcome check_gradients() {
    const auto t0 = clk::now();
    const double tol = 1e-4;
    const double budget_s = 300.0;
    double worst = 0.0;

    {  // full desk-size window model; random weights so every path carries gradient
        auto cfg = resolved_dit(default_desk_config());
        Rng rng(11);
        auto params = alloc_params<double>(dit_param_specs(cfg), rng, 0.2);
        Tensor<double> x = Tensor<double>::randn(Shape{6, cfg.latent_channels}, rng);
        Tensor<double> ctx = Tensor<double>::randn(Shape{4, cfg.context_channels}, rng);
        Tensor<double> sty = Tensor<double>::randn(Shape{1, cfg.style_embed_dim}, rng);
        Tensor<double> tgt = Tensor<double>::randn(Shape{6, cfg.latent_channels}, rng);
        std::vector<Tensor<double>> inputs;
        inputs.push_back(x);
        for (const auto& name : params.names) inputs.push_back(params.at(name));
        const auto names = params.names;
        worst = std::max(worst, grad_check(
                                    inputs,
                                    [&](Graph<double>& g, const std::vector<Var<double>>& v) {
                                        BoundParams<double> bound;
                                        bound.g = &g;
                                        for (size_t i = 0; i < names.size(); ++i)
                                            bound.vars.emplace(names[i], v[i + 1]);
                                        DiTCond<double> cond;
                                        cond.context = &ctx;
                                        cond.style = &sty;
                                        auto out = dit_forward(g, bound, cfg, v[0], -0.35, cond);
                                        return mean_all(square(sub(out, g.constant(tgt))));
                                    },
                                    1e-5, 3));
    }

    {  // embedding translator, both the conditioned and the null-token paths
        auto cfg = resolved_bridge(default_desk_config());
        Rng rng(13);
        auto params = alloc_params<double>(bridge_param_specs(cfg), rng, 0.2);
        Tensor<double> x = Tensor<double>::randn(Shape{2, cfg.embed_dim}, rng);
        Tensor<double> text = Tensor<double>::randn(Shape{1, cfg.embed_dim}, rng);
        Tensor<double> tgt = Tensor<double>::randn(Shape{2, cfg.embed_dim}, rng);
        std::vector<Tensor<double>> inputs;
        inputs.push_back(x);
        for (const auto& name : params.names) inputs.push_back(params.at(name));
        const auto names = params.names;
        worst = std::max(worst, grad_check(
                                    inputs,
                                    [&](Graph<double>& g, const std::vector<Var<double>>& v) {
                                        BoundParams<double> bound;
                                        bound.g = &g;
                                        for (size_t i = 0; i < names.size(); ++i)
                                            bound.vars.emplace(names[i], v[i + 1]);
                                        auto a = bridge_forward(g, bound, cfg, v[0], 0.2, &text);
                                        auto b = bridge_forward(g, bound, cfg, v[0], -0.4, nullptr);
                                        return add(mean_all(square(sub(a, g.constant(tgt)))),
                                                   mean_all(square(b)));
                                    },
                                    1e-5, 3));
    }

    {  // both training losses through a linear model
        EDMParams p;
        Rng rng(17);
        auto clean = Tensor<double>::randn(Shape{3, 2}, rng);
        auto noise = Tensor<double>::randn(Shape{3, 2}, rng);
        auto w = Tensor<double>::randn(Shape{2, 2}, rng, 0.4);
        auto b = Tensor<double>::randn(Shape{1, 2}, rng, 0.1);
        worst = std::max(worst, grad_check({w, b}, [&](Graph<double>& g, const std::vector<Var<double>>& v) {
                             return diffusion_loss_term(
                                 g, clean, 0.7, noise, p,
                                 [&](Graph<double>&, Var<double> x, double) { return linear(x, v[0], v[1]); });
                         }));
        const Tensor<double> w_frozen = w;  // teacher snapshot stays fixed
        worst = std::max(worst, grad_check({w, b}, [&](Graph<double>& g, const std::vector<Var<double>>& v) {
                             auto fw = g.constant(w_frozen);
                             auto zb = g.constant(Tensor<double>::zeros(Shape{1, 2}));
                             return consistency_loss_term(
                                 g, clean, 0.15, 1.1, noise, p,
                                 [&](Graph<double>&, Var<double> x, double) { return linear(x, v[0], v[1]); },
                                 [&](Graph<double>&, Var<double> x, double) { return linear(x, fw, zb); });
                         }));
    }

    const double elapsed = secs(t0, clk::now());
    Outcome o;
    o.pass = worst < tol && elapsed < budget_s;
    o.detail = fmt("max rel err %.2e (tol %.0e), %.0fs of %.0fs budget", worst, tol, elapsed, budget_s);
    return o;
}

// ---- 2: identity at the lowest noise level --------------------------------

Outcome check_boundary_identity() {
    const double tol = 1e-6;
    DiTConfig cfg;
    cfg.model_dim = 16;
    cfg.mlp_multiplier = 2;
    cfg.num_heads = 2;
    cfg.num_layers = 2;
    cfg.patch_size = 2;
    cfg.noise_embed_dim = 8;
    cfg.latent_channels = 3;
    cfg.context_channels = 2;
    cfg.style_embed_dim = 4;
    cfg.max_target_tokens = 16;
    cfg.max_context_tokens = 8;
    EDMParams p;

    double worst = 0.0;
    int64_t count = 0;
    // 40 arbitrary weight draws at spread-out scales, 25 inputs each
    for (int draw = 0; draw < 40; ++draw) {
        Rng rng(500 + static_cast<uint64_t>(draw));
        const double init_std = 0.02 + 0.48 * draw / 39.0;
        auto params = alloc_params<float>(dit_param_specs(cfg), rng, init_std);
        for (int i = 0; i < 25; ++i, ++count) {
            const int64_t rows = 2 * (1 + static_cast<int64_t>(rng.uniform_int(4)));
            Tensor<float> x = Tensor<float>::randn(Shape{rows, cfg.latent_channels}, rng);
            Tensor<float> ctx = Tensor<float>::randn(Shape{4, cfg.context_channels}, rng);
            Tensor<float> sty = Tensor<float>::randn(Shape{1, cfg.style_embed_dim}, rng);
            Graph<float> g;
            auto bound = BoundParams<float>::bind_frozen(g, params);
            DiTCond<float> cond;
            if (draw % 2 == 0) {
                cond.context = &ctx;
                cond.style = &sty;
            }
            auto out = consistency_fn_in_graph(g, g.constant(x), p.sigma_min, p,
                                               [&](Graph<float>& gg, Var<float> xs, double cn) {
                                                   return dit_forward(gg, bound, cfg, xs, cn, cond);
                                               });
            const auto& y = g.val(out.id);
            double num = 0, den = 0;
            for (size_t j = 0; j < y.data.size(); ++j) {
                const double d = static_cast<double>(y.data[j]) - static_cast<double>(x.data[j]);
                num += d * d;
                den += static_cast<double>(x.data[j]) * x.data[j];
            }
            worst = std::max(worst, std::sqrt(num / den));
        }
    }
    Outcome o;
    o.pass = worst <= tol && count == 1000;
    o.detail = fmt("max rel deviation %.2e (tol %.0e) over %lld inputs", worst, tol, (long long)count);
    return o;
}

// ---- 3: metric implementations vs brute-force oracles ---------------------

double oracle_kernel(const Tensor<float>& x, int64_t i, const Tensor<float>& y, int64_t j) {
    const int64_t d = x.shape[1];
    double dot = 0;
    for (int64_t c = 0; c < d; ++c) dot += static_cast<double>(x.at(i, c)) * static_cast<double>(y.at(j, c));
    return std::pow(dot / static_cast<double>(d) + 1.0, 3.0);
}

double oracle_kd(const Tensor<float>& x, const Tensor<float>& y) {
    const int64_t m = x.shape[0], n = y.shape[0];
    double xx = 0, yy = 0, xy = 0;
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < m; ++j)
            if (i != j) xx += oracle_kernel(x, i, x, j);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < n; ++j)
            if (i != j) yy += oracle_kernel(y, i, y, j);
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) xy += oracle_kernel(x, i, y, j);
    return xx / (static_cast<double>(m) * (m - 1)) + yy / (static_cast<double>(n) * (n - 1)) -
           2.0 * xy / (static_cast<double>(m) * n);
}

double oracle_dist(const Tensor<float>& a, int64_t i, const Tensor<float>& b, int64_t j) {
    double s = 0;
    for (int64_t c = 0; c < a.shape[1]; ++c) {
        const double d = static_cast<double>(a.at(i, c)) - static_cast<double>(b.at(j, c));
        s += d * d;
    }
    return std::sqrt(s);
}

std::pair<double, double> oracle_density_coverage(const Tensor<float>& real, const Tensor<float>& gen, int k) {
    const int64_t nr = real.shape[0], ng = gen.shape[0];
    std::vector<double> radius(static_cast<size_t>(nr));
    for (int64_t i = 0; i < nr; ++i) {
        std::vector<double> ds;
        for (int64_t j = 0; j < nr; ++j)
            if (j != i) ds.push_back(oracle_dist(real, i, real, j));
        std::sort(ds.begin(), ds.end());
        radius[static_cast<size_t>(i)] = ds[static_cast<size_t>(k - 1)];
    }
    int64_t hits = 0, covered = 0;
    for (int64_t i = 0; i < nr; ++i) {
        bool any = false;
        for (int64_t j = 0; j < ng; ++j) {
            if (oracle_dist(gen, j, real, i) <= radius[static_cast<size_t>(i)]) {
                ++hits;
                any = true;
            }
        }
        covered += any ? 1 : 0;
    }
    return {static_cast<double>(hits) / (static_cast<double>(k) * ng), static_cast<double>(covered) / nr};
}

Outcome check_metric_oracles() {
    const double kd_tol = 1e-10;
    const double fd_tol = 0.03;
    Rng rng(211);
    auto draw = [&](int64_t n, int64_t d, double mean) {
        Tensor<float> t(Shape{n, d});
        for (auto& v : t.data) v = static_cast<float>(mean + rng.normal());
        return t;
    };

    double kd_worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int64_t m = 2 + static_cast<int64_t>(rng.uniform_int(48));
        const int64_t n = 2 + static_cast<int64_t>(rng.uniform_int(48));
        const int64_t d = 1 + static_cast<int64_t>(rng.uniform_int(6));
        auto a = draw(m, d, 0.0);
        auto b = draw(n, d, 0.3);
        const double got = kernel_distance(a, b);
        const double want = oracle_kd(a, b);
        kd_worst = std::max(kd_worst, std::fabs(got - want) / std::max(std::fabs(want), 1e-12));
    }

    int dc_exact = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + static_cast<int>(rng.uniform_int(5));
        const int64_t nr = k + 2 + static_cast<int64_t>(rng.uniform_int(40));
        const int64_t ng = 1 + static_cast<int64_t>(rng.uniform_int(40));
        const int64_t d = 1 + static_cast<int64_t>(rng.uniform_int(4));
        auto real = draw(nr, d, 0.0);
        auto gen = draw(ng, d, 0.25);
        const auto got = density_coverage(real, gen, k);
        const auto want = oracle_density_coverage(real, gen, k);
        if (got.first == want.first && got.second == want.second) ++dc_exact;
    }

    // closed form for two isotropic unit-variance clouds: dim * shift^2
    const int64_t N = 100000, D = 8;
    const double shift = 0.5;
    auto x = draw(N, D, 0.0);
    auto y = draw(N, D, shift);
    const double want_fd = static_cast<double>(D) * shift * shift;
    const double fd_dev = std::fabs(frechet_distance(x, y) - want_fd) / want_fd;

    Outcome o;
    o.pass = kd_worst <= kd_tol && dc_exact == 100 && fd_dev <= fd_tol;
    o.detail = fmt("kd rel %.1e (tol %.0e); density/coverage exact %d/100; closed-form fd dev %.2f%% (tol %.0f%%)",
                   kd_worst, kd_tol, dc_exact, 100.0 * fd_dev, 100.0 * fd_tol);
    return o;
}

// ---- 4: white-noise floor in the ablation table ---------------------------

Outcome check_noise_floor() {
    const std::string dir = "/tmp/lcl_acceptance/noise_floor";
    fs::remove_all(dir);
    if (cli({"gen-data", "--out", dir, "--seed", "1"}) != 0) return {false, "gen-data failed"};
    if (cli({"ablate", "--out", dir, "--seed", "1"}) != 0) return {false, "ablate failed"};
    Report r = parse_report_csv(read_text_file(dir + "/report.csv"));
    for (const auto& row : r.rows) {
        if (row.variant != "noise") continue;
        const double cov = row.cell.at("cov").mean;
        const double den = row.cell.at("den").mean;
        Outcome o;
        o.pass = cov == 0.0 && den == 0.0;
        o.detail = fmt("noise row coverage %g, density %g (both must be exactly 0)", cov, den);
        fs::remove_all(dir);
        return o;
    }
    return {false, "report has no noise row"};
}

// ---- 5: gaussian end-to-end -----------------------------------------------

Outcome check_gaussian_end_to_end() {
    const double rel_tol = 0.05, fd_tol = 0.05, budget_s = 600.0;
    const auto t0 = clk::now();
    const double s = 0.8;
    const int64_t W = 8, C = 2;

    DiTConfig dcfg;
    dcfg.model_dim = 32;
    dcfg.mlp_multiplier = 2;
    dcfg.num_heads = 2;
    dcfg.num_layers = 2;
    dcfg.patch_size = 2;
    dcfg.noise_embed_dim = 16;
    dcfg.latent_channels = C;
    dcfg.context_channels = 0;
    dcfg.style_embed_dim = 0;
    dcfg.max_target_tokens = W / dcfg.patch_size;

    EDMParams edm;
    edm.sigma_data = s;

    Rng rng(2024);
    auto params = dit_init_params<float>(dcfg, rng);
    AdamW<float> opt;
    TrainSchedule sched;
    sched.base_lr = 3e-4;
    sched.warmup_steps = 50;
    sched.total_steps = 800;

    const int64_t batch = 16;
    DiTCond<float> cond;
    for (int64_t step = 0; step < sched.total_steps; ++step) {
        Graph<float> g;
        auto bound = BoundParams<float>::bind(g, params);
        Var<float> total = g.constant(Tensor<float>::scalar(0.0f));
        for (int64_t b = 0; b < batch; ++b) {
            auto x0 = Tensor<float>::randn({W, C}, rng);
            for (auto& v : x0.data) v *= static_cast<float>(s);
            const double sigma = sample_training_sigma(rng, edm);
            auto noise = Tensor<float>::randn({W, C}, rng);
            total = add(total, diffusion_loss_term(g, x0, sigma, noise, edm,
                                                   [&](Graph<float>& gg, Var<float> x, double cn) {
                                                       return dit_forward(gg, bound, dcfg, x, cn, cond);
                                                   }));
        }
        auto loss = mul_scalar(total, 1.0f / static_cast<float>(batch));
        g.backward(loss);
        auto grads = bound.grads();
        opt.step(params, grads, lr_at(sched, step));
    }

    // for centered gaussian data the exact denoiser is x * s^2/(s^2+sigma^2)
    double rel_sum = 0.0;
    const int64_t trials = 64;
    for (int64_t t = 0; t < trials; ++t) {
        const double sigma = sample_training_sigma(rng, edm);
        auto x = Tensor<float>::randn({W, C}, rng);
        for (auto& v : x.data) v *= static_cast<float>(std::sqrt(s * s + sigma * sigma));
        Graph<float> g;
        auto bound = BoundParams<float>::bind_frozen(g, params);
        auto xh = denoise_in_graph(g, g.constant(x), sigma, edm, [&](Graph<float>& gg, Var<float> xs, double cn) {
            return dit_forward(gg, bound, dcfg, xs, cn, cond);
        });
        const auto& out = g.val(xh.id);
        const double coef = s * s / (s * s + sigma * sigma);
        double num = 0, den = 0;
        for (size_t i = 0; i < out.data.size(); ++i) {
            const double p = coef * x.data[i];
            num += (out.data[i] - p) * (out.data[i] - p);
            den += p * p;
        }
        rel_sum += std::sqrt(num / den);
    }
    const double rel_mean = rel_sum / static_cast<double>(trials);

    DenoiserFn<float> den_fn = [&](const Tensor<float>& x, double sigma) {
        Graph<float> g;
        auto bound = BoundParams<float>::bind_frozen(g, params);
        auto xh = denoise_in_graph(g, g.constant(x), sigma, edm, [&](Graph<float>& gg, Var<float> xs, double cn) {
            return dit_forward(gg, bound, dcfg, xs, cn, cond);
        });
        return g.val(xh.id);
    };
    const int64_t n_fd = 4000;
    Tensor<float> gen = Tensor<float>::zeros({n_fd, W * C});
    for (int64_t i = 0; i < n_fd; ++i) {
        auto w = ode_sample(den_fn, Shape{W, C}, 50, rng, edm, nullptr);
        std::copy(w.data.begin(), w.data.end(), gen.data.begin() + i * W * C);
    }
    Tensor<float> fresh = Tensor<float>::zeros({n_fd, W * C});
    for (auto& v : fresh.data) v = static_cast<float>(s * rng.normal());
    const double fd = frechet_distance(gen, fresh);

    const double elapsed = secs(t0, clk::now());
    Outcome o;
    o.pass = rel_mean < rel_tol && fd < fd_tol && elapsed < budget_s;
    o.detail = fmt("posterior rel err %.3f (tol %.2f); 50-step fd %.3f (tol %.2f); %.0fs of %.0fs budget", rel_mean,
                   rel_tol, fd, fd_tol, elapsed, budget_s);
    return o;
}

// ---- 6: few-step quality ordering -----------------------------------------

Outcome check_few_step_ordering() {
    auto cfg = default_desk_config();
    cfg.training.steps = 1500;
    Dataset data(cfg);
    const auto dcfg = resolved_dit(cfg);
    const Shape wshape{cfg.data.synth.window, cfg.data.synth.channels};
    const int64_t ref_n = 160, gen_n = 80;
    auto ref = data.reference_embeddings(ref_n);

    std::vector<double> fad_d50, fad_c5, fad_c1;
    bool evals_ok = true;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        auto dt = init_trainer(cfg, "dit-diffusion", seed);
        std::vector<TrainLogRow> log;
        train_steps(dt, cfg, data, seed, cfg.training.steps, log);
        auto ct = init_trainer(cfg, "c-dit", seed, &dt.params);
        std::vector<TrainLogRow> log2;
        train_steps(ct, cfg, data, seed, cfg.training.steps, log2);

        auto fad_for = [&](const char* kind, int nsteps, int64_t want_evals) {
            Tensor<float> gen = Tensor<float>::zeros({gen_n, cfg.gap.embed_dim});
            for (int64_t i = 0; i < gen_n; ++i) {
                const auto& item = data.eval_item(ref_n + i);
                Rng r(derive_seed(seed, std::string("calib-") + kind, static_cast<uint64_t>(i)));
                int64_t ev = 0;
                Tensor<float> w;
                if (kind[0] == 'd')
                    w = sample_window_diffusion(dt.params, dcfg, cfg.diffusion, nsteps, 1.0, &item.context,
                                                &item.style_audio, wshape, r, &ev);
                else
                    w = sample_window_consistency(ct.params, dcfg, cfg.diffusion, nsteps, &item.context,
                                                  &item.style_audio, wshape, r, &ev);
                if (ev != want_evals) evals_ok = false;
                auto e = audio_style_embedding(w, cfg.gap);
                std::copy(e.data.begin(), e.data.end(), gen.data.begin() + i * cfg.gap.embed_dim);
            }
            return frechet_distance(gen, ref);
        };
        fad_d50.push_back(fad_for("d50", 50, 99));  // Heun over 50 rungs: 2*50-1 forwards
        fad_c5.push_back(fad_for("c5", 5, 5));
        fad_c1.push_back(fad_for("c1", 1, 1));
    }

    const double m50 = median3(fad_d50[0], fad_d50[1], fad_d50[2]);
    const double m5 = median3(fad_c5[0], fad_c5[1], fad_c5[2]);
    const double m1 = median3(fad_c1[0], fad_c1[1], fad_c1[2]);
    Outcome o;
    o.pass = m5 < m1 && m5 <= 3.0 * m50 && evals_ok && 10 * 5 <= 99;
    o.detail = fmt("median fad: 5-step %.3f < 1-step %.3f and <= 3x 50-step(%.3f); forwards per sample 5 vs 99%s", m5,
                   m1, m50, evals_ok ? "" : " (COUNT MISMATCH)");
    return o;
}

// ---- 7: text-side embeddings translated into the audio-side cloud ---------

Outcome check_embedding_translation() {
    auto cfg = default_desk_config();
    cfg.training.steps = 12000;
    cfg.training.base_lr = 1e-3;
    cfg.bridge.hidden_units = 256;
    const int sample_steps = 16;
    const int64_t ref_n = 160, gen_n = 100;
    const int k = 5;

    Dataset data(cfg);
    const auto bcfg = resolved_bridge(cfg);
    const auto bedm = resolved_bridge_edm(cfg);
    auto ref = data.reference_embeddings(ref_n);

    // untranslated baseline: the raw text-side rows of the same items
    Tensor<float> raw = Tensor<float>::zeros({gen_n, cfg.gap.embed_dim});
    double cos_raw = 0.0;
    for (int64_t i = 0; i < gen_n; ++i) {
        const auto& item = data.eval_item(ref_n + i);
        std::copy(item.style_text.data.begin(), item.style_text.data.end(),
                  raw.data.begin() + i * cfg.gap.embed_dim);
        cos_raw += cosine_score(item.style_text.data, item.target_embedding.data);
    }
    cos_raw /= static_cast<double>(gen_n);
    const double fd_raw = frechet_distance(raw, ref);
    const double cov_raw = density_coverage(ref, raw, k).second;

    bool fd_ok = true, cov_ok = true;
    double cos_sum = 0.0;
    std::string per_seed;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        auto st = init_trainer(cfg, "bridge", seed);
        std::vector<TrainLogRow> log;
        train_steps(st, cfg, data, seed, cfg.training.steps, log);

        Tensor<float> gen = Tensor<float>::zeros({gen_n, cfg.gap.embed_dim});
        double cos_b = 0.0;
        for (int64_t i = 0; i < gen_n; ++i) {
            const auto& item = data.eval_item(ref_n + i);
            Rng r(derive_seed(seed, "calib-bridge", static_cast<uint64_t>(i)));
            auto e = bridge_sample<float>(st.params, bcfg, &item.style_text, sample_steps, r, bedm);
            std::copy(e.data.begin(), e.data.end(), gen.data.begin() + i * cfg.gap.embed_dim);
            cos_b += cosine_score(e.data, item.target_embedding.data);
        }
        cos_b /= static_cast<double>(gen_n);
        const double fd_b = frechet_distance(gen, ref);
        const double cov_b = density_coverage(ref, gen, k).second;
        fd_ok = fd_ok && fd_b < fd_raw;
        cov_ok = cov_ok && cov_b > cov_raw;
        cos_sum += cos_b;
        per_seed += fmt(" s%llu[fd %.3f cov %.2f cos %.3f]", (unsigned long long)seed, fd_b, cov_b, cos_b);
    }
    const double cos_mean = cos_sum / 3.0;

    Outcome o;
    o.pass = fd_ok && cov_ok && cos_mean >= cos_raw + 0.05;
    o.detail = fmt("raw text: fd %.3f cov %.2f cos %.3f; translated:%s; mean cos gain %.3f (need >= 0.05)", fd_raw,
                   cov_raw, cos_raw, per_seed.c_str(), cos_mean - cos_raw);
    return o;
}

// ---- 8: style window never equals the training window ---------------------

Outcome check_style_window_separation() {
    auto cfg = default_desk_config();
    Dataset data(cfg);
    Rng rng(777);
    const int64_t n = 10000;
    int64_t violations = 0;
    for (int64_t i = 0; i < n; ++i) {
        auto pair = data.sample_train_pair(rng);
        if (pair.style_offset == pair.train_offset) ++violations;
    }
    Outcome o;
    o.pass = violations == 0;
    o.detail = fmt("%lld of %lld sampled pairs reused the training window (must be 0)", (long long)violations,
                   (long long)n);
    return o;
}

// ---- 9: reference-scale model size ----------------------------------------

Outcome check_reference_param_count() {
    DiTConfig cfg;
    cfg.model_dim = 1024;
    cfg.mlp_multiplier = 4;
    cfg.num_heads = 4;
    cfg.num_layers = 18;
    cfg.patch_size = 2;
    cfg.noise_embed_dim = 512;
    cfg.latent_channels = 64;
    cfg.context_channels = 64;
    cfg.style_embed_dim = 512;
    const int64_t n = dit_param_count(cfg);  // spec arithmetic only, no storage
    Outcome o;
    o.pass = n >= 220'000'000 && n <= 340'000'000;
    o.detail = fmt("%lld parameters (window [2.2e8, 3.4e8])", (long long)n);
    return o;
}

// ---- 10: end-to-end determinism -------------------------------------------

std::string write_run_cfg(const std::string& dir) {
    auto cfg = default_desk_config();
    cfg.output_dir = dir;
    cfg.seeds = {1};
    cfg.conditioning = {"style+ctx", "uncond"};
    cfg.data.synth.num_track_sets = 96;
    cfg.data.eval_track_sets = 60;
    cfg.gap.embed_dim = 16;
    cfg.gap.feature_rows = 16;
    cfg.training.steps = 500;
    cfg.training.batch_size = 2;
    cfg.sampling.count = 3;
    cfg.sampling.diffusion_steps = 3;
    cfg.evaluation.batches = 2;
    cfg.evaluation.batch_size = 18;
    fs::create_directories(dir);
    const std::string path = dir + "/cfg.json";
    write_text_file(path, experiment_config_json(cfg));
    return path;
}

Outcome check_determinism() {
    auto run = [&](const std::string& dir) -> bool {
        fs::remove_all(dir);
        const std::string cfg = write_run_cfg(dir);
        return cli({"gen-data", "--config", cfg}) == 0 &&
               cli({"train", "--config", cfg, "--variant", "dit-diffusion"}) == 0 &&
               cli({"sample", "--config", cfg, "--variant", "dit-diffusion", "--conditioning", "style+ctx"}) == 0 &&
               cli({"ablate", "--config", cfg}) == 0;
    };
    const std::string a = "/tmp/lcl_acceptance/det_a", b = "/tmp/lcl_acceptance/det_b";
    if (!run(a) || !run(b)) return {false, "pipeline run failed"};
    const std::string ra = read_text_file(a + "/report.csv");
    const std::string rb = read_text_file(b + "/report.csv");
    const std::string sa = read_text_file(a + "/samples_dit-diffusion_style+ctx_seed1.emb1");
    const std::string sb = read_text_file(b + "/samples_dit-diffusion_style+ctx_seed1.emb1");
    Outcome o;
    o.pass = !ra.empty() && ra == rb && sa == sb;
    o.detail = fmt("two 500-step runs: reports %s, sample files %s", ra == rb ? "byte-identical" : "DIFFER",
                   sa == sb ? "byte-identical" : "DIFFER");
    fs::remove_all(a);
    fs::remove_all(b);
    return o;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> entries = {
        {"gradient correctness", check_gradients},
        {"lowest-noise-level identity", check_boundary_identity},
        {"metric oracles", check_metric_oracles},
        {"white-noise floor", check_noise_floor},
        {"gaussian end-to-end", check_gaussian_end_to_end},
        {"few-step quality ordering", check_few_step_ordering},
        {"embedding translation", check_embedding_translation},
        {"style/train window separation", check_style_window_separation},
        {"reference model size", check_reference_param_count},
        {"end-to-end determinism", check_determinism},
    };

    int failed = 0;
    for (size_t i = 0; i < entries.size(); ++i) {
        Outcome o;
        const auto t0 = clk::now();
        try {
            o = entries[i].fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failed;
        std::printf("[%2zu] %s  %s: %s  (%.0fs)\n", i + 1, o.pass ? "PASS" : "FAIL", entries[i].name,
                    o.detail.c_str(), secs(t0, clk::now()));
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", entries.size() - failed, entries.size());
    return failed == 0 ? 0 : 1;
}
