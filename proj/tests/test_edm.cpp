#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lcl/dit.hpp"
#include "lcl/edm.hpp"
#include "lcl/grad_check.hpp"

using namespace lcl;

TEST_CASE("preconditioning coefficients satisfy their closed forms") {
    EDMParams p;
    const double sd = p.sigma_data;
    auto c = precondition(sd, p);
    CHECK(c.c_skip == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.c_out == doctest::Approx(sd / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(c.c_in == doctest::Approx(1.0 / (sd * std::sqrt(2.0))).epsilon(1e-12));
    CHECK(c.c_noise == doctest::Approx(std::log(sd) / 4.0).epsilon(1e-12));

    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const double sigma = std::exp(rng.uniform(std::log(p.sigma_min), std::log(p.sigma_max)));
        auto pc = precondition(sigma, p);
        const double root = std::sqrt(sigma * sigma + sd * sd);
        CHECK(pc.c_in * root == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pc.c_out == doctest::Approx(sigma * sd * pc.c_in).epsilon(1e-12));
    }

    // small-sigma limit: denoiser tends to the identity
    auto lim = precondition(1e-8, p);
    CHECK(lim.c_skip == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(lim.c_out == doctest::Approx(0.0).epsilon(1e-7));

    CHECK_THROWS_AS(precondition(0.0, p), ContractViolation);
    CHECK_THROWS_AS(precondition(-1.0, p), ContractViolation);
}

TEST_CASE("training noise levels follow the clamped log-normal") {
    EDMParams p;
    Rng rng(37);
    const int n = 100000;
    std::vector<double> draws(n);
    for (auto& d : draws) {
        d = sample_training_sigma(rng, p);
        CHECK(d >= p.sigma_min);
        CHECK(d <= p.sigma_max);
    }
    std::nth_element(draws.begin(), draws.begin() + n / 2, draws.end());
    const double median = draws[n / 2];
    CHECK(median == doctest::Approx(std::exp(p.p_mean)).epsilon(0.03));

    Rng a(41), b(41);
    for (int i = 0; i < 50; ++i) CHECK(sample_training_sigma(a, p) == sample_training_sigma(b, p));
}

TEST_CASE("sigma ladder endpoints and spacing") {
    EDMParams p;
    auto two = sigma_ladder(2, p);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == 80.0);
    CHECK(two[1] == 0.002);

    auto five = sigma_ladder(5, p);
    CHECK(five.front() == 80.0);
    CHECK(five.back() == 0.002);
    for (size_t i = 0; i + 1 < five.size(); ++i) CHECK(five[i] > five[i + 1]);
    // recompute the middle rung from the closed form
    const double hi = std::pow(80.0, 1.0 / 7.0), lo = std::pow(0.002, 1.0 / 7.0);
    const double mid = std::pow(hi + 0.5 * (lo - hi), 7.0);
    CHECK(five[2] == doctest::Approx(mid).epsilon(1e-12));

    for (int n = 2; n <= 64; ++n) {
        auto lad = sigma_ladder(n, p);
        CHECK(lad.front() == 80.0);
        CHECK(lad.back() == 0.002);
        for (size_t i = 0; i + 1 < lad.size(); ++i) CHECK(lad[i] > lad[i + 1]);
    }
    CHECK_THROWS_AS(sigma_ladder(0, p), ContractViolation);
}

TEST_CASE("denoising with a zero network is a pure skip connection") {
    EDMParams p;
    Rng rng(43);
    auto noisy = Tensor<double>::randn(Shape{6, 3}, rng);
    const double sigma = 1.7;
    Graph<double> g;
    auto x_hat = denoise_in_graph(g, g.constant(noisy), sigma, p,
                                  [](Graph<double>& gg, Var<double> x, double) {
                                      return gg.constant(Tensor<double>::zeros(gg.val(x.id).shape));
                                  });
    const double cs = precondition(sigma, p).c_skip;
    for (size_t i = 0; i < noisy.data.size(); ++i)
        CHECK(g.val(x_hat.id).data[i] == doctest::Approx(cs * noisy.data[i]).epsilon(1e-14));
}

TEST_CASE("an oracle that inverts the parameterization gives zero loss") {
    EDMParams p;
    Rng rng(47);
    auto clean = Tensor<double>::randn(Shape{5, 2}, rng);
    auto noise = Tensor<double>::randn(Shape{5, 2}, rng);
    const double sigma = 0.9;
    const auto c = precondition(sigma, p);
    Graph<double> g;
    // F = (clean - c_skip * noisy) / c_out makes x_hat == clean exactly
    auto loss = diffusion_loss_term(g, clean, sigma, noise, p,
                                    [&](Graph<double>& gg, Var<double> x_scaled, double) {
                                        auto noisy = mul_scalar(x_scaled, 1.0 / c.c_in);
                                        auto num = sub(gg.constant(clean), mul_scalar(noisy, c.c_skip));
                                        return mul_scalar(num, 1.0 / c.c_out);
                                    });
    CHECK(g.val(loss.id).data[0] == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("zero-init model on zero data matches the analytic expected loss") {
    // residual is -c_skip * sigma * n, so E[loss | sigma] = w(sigma) * (c_skip * sigma)^2 = c_skip(sigma)
    EDMParams p;
    Rng rng(53);
    double mc = 0;
    const int trials = 4000;
    auto clean = Tensor<double>::zeros(Shape{4, 2});
    for (int i = 0; i < trials; ++i) {
        const double sigma = sample_training_sigma(rng, p);
        auto noise = Tensor<double>::randn(clean.shape, rng);
        Graph<double> g;
        auto loss = diffusion_loss_term(g, clean, sigma, noise, p,
                                        [](Graph<double>& gg, Var<double> x, double) {
                                            return gg.constant(Tensor<double>::zeros(gg.val(x.id).shape));
                                        });
        mc += g.val(loss.id).data[0];
    }
    mc /= trials;

    Rng rng2(59);
    double expect = 0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) expect += precondition(sample_training_sigma(rng2, p), p).c_skip;
    expect /= m;
    CHECK(mc == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("loss gradients flow through a learned denoiser") {
    EDMParams p;
    Rng rng(61);
    auto clean = Tensor<double>::randn(Shape{4, 3}, rng);
    auto noise = Tensor<double>::randn(Shape{4, 3}, rng);
    auto w = Tensor<double>::randn(Shape{3, 3}, rng, 0.4);
    auto b = Tensor<double>::randn(Shape{1, 3}, rng, 0.1);
    const double err = grad_check({w, b}, [&](Graph<double>& g, const std::vector<Var<double>>& v) {
        return diffusion_loss_term(g, clean, 0.7, noise, p,
                                   [&](Graph<double>&, Var<double> x, double) { return linear(x, v[0], v[1]); });
    });
    CHECK(err < 1e-6);
}

TEST_CASE("one-step sampling returns the denoised estimate of the initial state") {
    EDMParams p;
    const double s = 0.8;  // data scale of the oracle
    DenoiserFn<double> oracle = [&](const Tensor<double>& x, double sigma) {
        Tensor<double> out(x.shape);
        const double f = s * s / (s * s + sigma * sigma);
        for (size_t i = 0; i < x.data.size(); ++i) out.data[i] = f * x.data[i];
        return out;
    };
    Rng rng(67);
    int64_t evals = 0;
    auto sample = ode_sample(oracle, Shape{5, 2}, 1, rng, p, &evals);
    CHECK(evals == 1);

    Rng replay(67);
    auto z = Tensor<double>::randn(Shape{5, 2}, replay, p.sigma_max);
    auto want = oracle(z, p.sigma_max);
    for (size_t i = 0; i < want.data.size(); ++i) CHECK(sample.data[i] == doctest::Approx(want.data[i]));
}

TEST_CASE("heun integration spends two evaluations per interior step") {
    EDMParams p;
    DenoiserFn<double> oracle = [](const Tensor<double>& x, double sigma) {
        Tensor<double> out(x.shape);
        const double f = 0.64 / (0.64 + sigma * sigma);
        for (size_t i = 0; i < x.data.size(); ++i) out.data[i] = f * x.data[i];
        return out;
    };
    for (int n : {1, 2, 5, 50}) {
        Rng rng(71);
        int64_t evals = 0;
        ode_sample(oracle, Shape{3, 2}, n, rng, p, &evals);
        CHECK(evals == 2 * n - 1);
    }
}

TEST_CASE("oracle-driven sampling reproduces the data scale deterministically") {
    EDMParams p;
    const double s = 0.8;
    DenoiserFn<double> oracle = [&](const Tensor<double>& x, double sigma) {
        Tensor<double> out(x.shape);
        const double f = s * s / (s * s + sigma * sigma);
        for (size_t i = 0; i < x.data.size(); ++i) out.data[i] = f * x.data[i];
        return out;
    };
    double sq = 0;
    int64_t count = 0;
    for (int rep = 0; rep < 200; ++rep) {
        Rng rng(100 + static_cast<uint64_t>(rep));
        auto x = ode_sample(oracle, Shape{8, 2}, 24, rng, p);
        for (double v : x.data) sq += v * v;
        count += x.numel();
    }
    CHECK(std::sqrt(sq / static_cast<double>(count)) == doctest::Approx(s).epsilon(0.03));

    Rng r1(999), r2(999);
    auto a = ode_sample(oracle, Shape{4, 2}, 10, r1, p);
    auto b = ode_sample(oracle, Shape{4, 2}, 10, r2, p);
    CHECK(a.data == b.data);
}

TEST_CASE("zero-init network drives samples to zero and counts match through the real model") {
    EDMParams p;
    DiTConfig cfg;
    cfg.model_dim = 8;
    cfg.num_heads = 2;
    cfg.num_layers = 1;
    cfg.patch_size = 2;
    cfg.noise_embed_dim = 4;
    cfg.latent_channels = 2;
    cfg.mlp_multiplier = 2;
    Rng rng(73);
    auto params = dit_init_params<double>(cfg, rng);
    int64_t forwards = 0;
    DenoiserFn<double> den = [&](const Tensor<double>& x, double sigma) {
        Graph<double> g;
        auto bound = BoundParams<double>::bind(g, params);
        auto x_hat = denoise_in_graph(g, g.constant(x), sigma, p,
                                      [&](Graph<double>& gg, Var<double> xs, double cn) {
                                          ++forwards;
                                          return dit_forward(gg, bound, cfg, xs, cn);
                                      });
        return g.val(x_hat.id);
    };
    Rng srng(79);
    auto out = ode_sample(den, Shape{6, 2}, 5, srng, p);
    CHECK(forwards == 9);
    // with F == 0 every step contracts x by c_skip; the final Euler step to zero noise lands on c_skip * x
    CHECK(out.all_finite());
}
