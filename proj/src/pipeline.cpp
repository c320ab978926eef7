#include "lcl/pipeline.hpp"

#include <cmath>
#include <unordered_map>

#include "lcl/bridge.hpp"
#include "lcl/consistency.hpp"
#include "lcl/dit.hpp"
#include "lcl/edm.hpp"
#include "lcl/errors.hpp"
#include "lcl/hash.hpp"

namespace lcl {

Dataset::Dataset(const ExperimentConfig& cfg) : cfg_(cfg), data_hash_(data_generator_hash(cfg)) {
    cfg_.validate();
    eval_cache_.resize(static_cast<size_t>(eval_sets()));
}

SynthTrackSet Dataset::set_at(int64_t global_index) const {
    if (global_index < 0 || global_index >= cfg_.data.synth.num_track_sets)
        throw ContractViolation("Dataset: track set index out of range");
    const uint64_t set_seed = derive_seed(cfg_.data.data_seed, "track-set", static_cast<uint64_t>(global_index));
    Rng pick(derive_seed(set_seed, "stem-count"));
    const int64_t span = cfg_.data.synth.max_stems - cfg_.data.synth.min_stems + 1;
    const int64_t stems = cfg_.data.synth.min_stems + pick.uniform_int(span);
    return gen_track_set(set_seed, stems, cfg_.data.synth);
}

TrainingPair Dataset::sample_train_pair(Rng& rng) const {
    const auto ts = set_at(rng.uniform_int(train_sets()));
    return make_training_pair(ts, rng, cfg_.data.synth, cfg_.gap);
}

BridgePair Dataset::sample_bridge_pair(Rng& rng) const {
    const auto ts = set_at(rng.uniform_int(train_sets()));
    const int64_t stem = rng.uniform_int(ts.num_stems());
    const int64_t offsets = cfg_.data.synth.length - cfg_.data.synth.window + 1;
    const int64_t off = rng.uniform_int(offsets);
    BridgePair p;
    p.audio = audio_style_embedding(window_rows(ts.stems[static_cast<size_t>(stem)], off, cfg_.data.synth.window),
                                    cfg_.gap);
    p.text = text_style_embedding(stem_tags(ts, stem), cfg_.gap);
    return p;
}

const EvalItem& Dataset::eval_item(int64_t i) const {
    if (i < 0 || i >= eval_sets()) throw ContractViolation("Dataset: eval item index out of range");
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto& slot = eval_cache_[static_cast<size_t>(i)];
    if (!slot) {
        const auto ts = set_at(train_sets() + i);
        Rng rng(derive_seed(cfg_.data.data_seed, "eval-pair", static_cast<uint64_t>(i)));
        auto pair = make_training_pair(ts, rng, cfg_.data.synth, cfg_.gap);
        EvalItem item;
        item.target = pair.target;
        item.context = pair.context;
        item.style_audio = pair.style;
        item.style_text = text_style_embedding(stem_tags(ts, pair.target_index), cfg_.gap);
        item.target_embedding = audio_style_embedding(pair.target, cfg_.gap);
        slot = std::move(item);
    }
    return *slot;
}

Tensor<float> Dataset::reference_embeddings(int64_t count) const {
    if (count < 1 || count > eval_sets())
        throw ContractViolation("Dataset: reference count must be in [1, eval_track_sets]");
    Tensor<float> out = Tensor<float>::zeros({count, cfg_.gap.embed_dim});
    for (int64_t i = 0; i < count; ++i) {
        const auto& row = eval_item(i).target_embedding;
        std::copy(row.data.begin(), row.data.end(), out.data.begin() + i * cfg_.gap.embed_dim);
    }
    return out;
}

TrainerState init_trainer(const ExperimentConfig& cfg, const std::string& variant, uint64_t seed,
                          const ParamStore<float>* warm_start) {
    cfg.validate();
    TrainerState st;
    st.variant = variant;
    st.opt.weight_decay = cfg.training.weight_decay;
    Rng rng(derive_seed(seed, "init"));
    if (variant == "dit-diffusion" || variant == "c-dit") {
        st.params = dit_init_params<float>(resolved_dit(cfg), rng);
    } else if (variant == "bridge") {
        st.params = bridge_init_params<float>(resolved_bridge(cfg), rng);
    } else {
        throw ContractViolation("init_trainer: unknown variant '" + variant + "'");
    }
    if (warm_start) {
        if (warm_start->names != st.params.names)
            throw ContractViolation("init_trainer: warm start weights do not fit the '" + variant + "' model");
        st.params = *warm_start;
    }
    return st;
}

namespace {

template <class Term>
double batched_step(TrainerState& st, const ExperimentConfig& cfg, Rng& rng, const TrainSchedule& sched,
                    const Term& term_for_sample) {
    Graph<float> g;
    auto bound = BoundParams<float>::bind(g, st.params);
    BoundParams<float> frozen;
    if (st.variant == "c-dit") frozen = BoundParams<float>::bind_frozen(g, st.params);

    const auto diverged = [&](const std::string& why) {
        return NumericalError("training diverged at step " + std::to_string(st.step) +
                              "; weights from the last finite step are retained" + (why.empty() ? "" : " (" + why + ")"));
    };

    double loss_value = 0.0;
    std::unordered_map<std::string, Tensor<float>> grads;
    // numeric faults inside the forward or backward pass are divergence too;
    // the optimizer has not run yet, so the weights are still the finite ones
    try {
        Var<float> total = g.constant(Tensor<float>::scalar(0.0f));
        for (int64_t b = 0; b < cfg.training.batch_size; ++b)
            total = add(total, term_for_sample(g, bound, frozen, rng));
        Var<float> loss = mul_scalar(total, 1.0f / static_cast<float>(cfg.training.batch_size));
        loss_value = static_cast<double>(g.val(loss.id).data[0]);
        if (!std::isfinite(loss_value)) throw diverged("");
        g.backward(loss);
        grads = bound.grads();
    } catch (const NumericalError& e) {
        const std::string what = e.what();
        if (what.find("diverged") != std::string::npos) throw;
        throw diverged(what);
    }
    st.opt.step(st.params, grads, lr_at(sched, st.step));
    return loss_value;
}

}  // namespace

void train_steps(TrainerState& st, const ExperimentConfig& cfg, const Dataset& data, uint64_t seed,
                 int64_t target_total_steps, std::vector<TrainLogRow>& log) {
    cfg.validate();
    if (target_total_steps < st.step) throw ContractViolation("train_steps: target below current step");
    const auto sched = resolved_schedule(cfg);
    const auto gap_sched = resolved_consistency_schedule(cfg);
    const auto dcfg = resolved_dit(cfg);
    const auto bcfg = resolved_bridge(cfg);
    const auto bedm = resolved_bridge_edm(cfg);
    const auto& edm = cfg.diffusion;

    while (st.step < target_total_steps) {
        Rng rng(derive_seed(seed, "train-step", static_cast<uint64_t>(st.step)));
        double loss = 0.0;

        if (st.variant == "dit-diffusion") {
            loss = batched_step(st, cfg, rng, sched,
                                [&](Graph<float>& g, BoundParams<float>& bound, BoundParams<float>&, Rng& r) {
                                    auto pair = data.sample_train_pair(r);
                                    const double sigma = sample_training_sigma(r, edm);
                                    auto noise = Tensor<float>::randn(pair.target.shape, r);
                                    DiTCond<float> cond;
                                    cond.context = &pair.context;
                                    cond.style = &pair.style;
                                    cond.drop_context = r.uniform() < cfg.training.cond_dropout;
                                    cond.drop_style = r.uniform() < cfg.training.cond_dropout;
                                    return diffusion_loss_term(g, pair.target, sigma, noise, edm,
                                                               [&](Graph<float>& gg, Var<float> x, double cn) {
                                                                   return dit_forward(gg, bound, dcfg, x, cn, cond);
                                                               });
                                });
        } else if (st.variant == "c-dit") {
            const double gap = gap_at(gap_sched, std::min(st.step, gap_sched.total_steps));
            loss = batched_step(
                st, cfg, rng, sched,
                [&](Graph<float>& g, BoundParams<float>& bound, BoundParams<float>& frozen, Rng& r) {
                    auto pair = data.sample_train_pair(r);
                    const auto [lo, hi] = sample_sigma_pair(r, edm, gap);
                    auto noise = Tensor<float>::randn(pair.target.shape, r);
                    DiTCond<float> cond;
                    cond.context = &pair.context;
                    cond.style = &pair.style;
                    cond.drop_context = r.uniform() < cfg.training.cond_dropout;
                    cond.drop_style = r.uniform() < cfg.training.cond_dropout;
                    return consistency_loss_term(g, pair.target, lo, hi, noise, edm,
                                                 [&](Graph<float>& gg, Var<float> x, double cn) {
                                                     return dit_forward(gg, bound, dcfg, x, cn, cond);
                                                 },
                                                 [&](Graph<float>& gg, Var<float> x, double cn) {
                                                     return dit_forward(gg, frozen, dcfg, x, cn, cond);
                                                 });
                });
        } else if (st.variant == "bridge") {
            loss = batched_step(st, cfg, rng, sched,
                                [&](Graph<float>& g, BoundParams<float>& bound, BoundParams<float>&, Rng& r) {
                                    auto pair = data.sample_bridge_pair(r);
                                    const double sigma = sample_training_sigma(r, bedm);
                                    auto noise = Tensor<float>::randn(pair.audio.shape, r);
                                    const bool drop = r.uniform() < cfg.bridge.cond_dropout;
                                    return diffusion_loss_term(g, pair.audio, sigma, noise, bedm,
                                                               [&](Graph<float>& gg, Var<float> x, double cn) {
                                                                   return bridge_forward(gg, bound, bcfg, x, cn,
                                                                                         drop ? nullptr : &pair.text);
                                                               });
                                });
        } else {
            throw ContractViolation("train_steps: unknown variant '" + st.variant + "'");
        }

        log.push_back(TrainLogRow{st.step, loss, lr_at(sched, st.step)});
        ++st.step;
    }
}

Tensor<float> sample_window_diffusion(const ParamStore<float>& params, const DiTConfig& dcfg, const EDMParams& edm,
                                      int num_steps, double guidance, const Tensor<float>* ctx,
                                      const Tensor<float>* style, const Shape& window_shape, Rng& rng,
                                      int64_t* evals) {
    // evals counts network forwards, so guidance != 1 reports double
    int64_t forwards = 0;
    DenoiserFn<float> den = [&](const Tensor<float>& x, double sigma) {
        Graph<float> g;
        auto bound = BoundParams<float>::bind_frozen(g, params);
        DiTCond<float> cond;
        cond.context = ctx;
        cond.style = style;
        auto x_hat = denoise_in_graph(g, g.constant(x), sigma, edm, [&](Graph<float>& gg, Var<float> xs, double cn) {
            return dit_forward(gg, bound, dcfg, xs, cn, cond);
        });
        ++forwards;
        Tensor<float> cond_out = g.val(x_hat.id);
        if (guidance == 1.0) return cond_out;
        DiTCond<float> blank;
        auto x_un = denoise_in_graph(g, g.constant(x), sigma, edm, [&](Graph<float>& gg, Var<float> xs, double cn) {
            return dit_forward(gg, bound, dcfg, xs, cn, blank);
        });
        ++forwards;
        return cfg_combine(cond_out, g.val(x_un.id), guidance);
    };
    auto out = ode_sample(den, window_shape, num_steps, rng, edm, nullptr);
    if (evals) *evals = forwards;
    return out;
}

Tensor<float> sample_window_consistency(const ParamStore<float>& params, const DiTConfig& dcfg, const EDMParams& edm,
                                        int num_steps, const Tensor<float>* ctx, const Tensor<float>* style,
                                        const Shape& window_shape, Rng& rng, int64_t* evals) {
    ConsistencyFn<float> fn = [&](const Tensor<float>& x, double sigma) {
        Graph<float> g;
        auto bound = BoundParams<float>::bind_frozen(g, params);
        DiTCond<float> cond;
        cond.context = ctx;
        cond.style = style;
        auto out = consistency_fn_in_graph(g, g.constant(x), sigma, edm,
                                           [&](Graph<float>& gg, Var<float> xs, double cn) {
                                               return dit_forward(gg, bound, dcfg, xs, cn, cond);
                                           });
        return g.val(out.id);
    };
    return multistep_sample(fn, window_shape, num_steps, rng, edm, evals);
}

CondInputs conditioning_for(const std::string& mode, const EvalItem& item) {
    CondInputs c;
    if (mode == "style+ctx") {
        c.ctx = &item.context;
        c.style = &item.style_audio;
    } else if (mode == "text-style+ctx") {
        c.ctx = &item.context;
        c.style = &item.style_text;
    } else if (mode == "ctx") {
        c.ctx = &item.context;
    } else if (mode == "style") {
        c.style = &item.style_audio;
    } else if (mode == "text-style") {
        c.style = &item.style_text;
    } else if (mode == "uncond") {
        // both null
    } else {
        throw ContractViolation("conditioning_for: unknown mode '" + mode + "'");
    }
    return c;
}

}  // namespace lcl
