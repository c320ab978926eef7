#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lcl/config.hpp"
#include "lcl/optimizer.hpp"
#include "lcl/synth.hpp"

namespace lcl {

// One held-out item: the real target window, its conditioning inputs from
// both modalities, and the embedding the metrics compare against.
struct EvalItem {
    Tensor<float> target;
    Tensor<float> context;
    Tensor<float> style_audio;
    Tensor<float> style_text;
    Tensor<float> target_embedding;
};

struct BridgePair {
    Tensor<float> audio;
    Tensor<float> text;
};

// Deterministic view over the generated corpus: track set i is a pure
// function of (data_seed, i), so no corpus files need to exist on disk.
class Dataset {
public:
    explicit Dataset(const ExperimentConfig& cfg);

    int64_t train_sets() const { return cfg_.data.synth.num_track_sets - cfg_.data.eval_track_sets; }
    int64_t eval_sets() const { return cfg_.data.eval_track_sets; }
    uint64_t data_hash() const { return data_hash_; }

    SynthTrackSet set_at(int64_t global_index) const;
    TrainingPair sample_train_pair(Rng& rng) const;
    BridgePair sample_bridge_pair(Rng& rng) const;
    const EvalItem& eval_item(int64_t i) const;

    // (count x embed_dim) rows of real target-window embeddings
    Tensor<float> reference_embeddings(int64_t count) const;

private:
    ExperimentConfig cfg_;
    uint64_t data_hash_;
    mutable std::mutex cache_mu_;
    mutable std::vector<std::optional<EvalItem>> eval_cache_;
};

struct TrainLogRow {
    int64_t step = 0;
    double loss = 0.0;
    double lr = 0.0;
};

struct TrainerState {
    std::string variant;
    ParamStore<float> params;
    AdamW<float> opt;
    int64_t step = 0;
};

TrainerState init_trainer(const ExperimentConfig& cfg, const std::string& variant, uint64_t seed,
                          const ParamStore<float>* warm_start = nullptr);

// Runs until state.step == target_total_steps. Each step derives its own
// random stream from (seed, step), so an interrupted run resumed from a
// checkpoint retraces the uninterrupted one exactly. Non-finite loss throws
// NumericalError naming the step; state keeps the last finite weights.
void train_steps(TrainerState& state, const ExperimentConfig& cfg, const Dataset& data, uint64_t seed,
                 int64_t target_total_steps, std::vector<TrainLogRow>& log);

// Heun solver over windows with classifier-free guidance; weight 1 runs the
// conditional branch only. evals counts network forwards, so guided sampling
// reports both branches.
Tensor<float> sample_window_diffusion(const ParamStore<float>& params, const DiTConfig& dcfg, const EDMParams& edm,
                                      int num_steps, double guidance, const Tensor<float>* ctx,
                                      const Tensor<float>* style, const Shape& window_shape, Rng& rng,
                                      int64_t* evals = nullptr);

// Few-step consistency sampling; never guided.
Tensor<float> sample_window_consistency(const ParamStore<float>& params, const DiTConfig& dcfg, const EDMParams& edm,
                                        int num_steps, const Tensor<float>* ctx, const Tensor<float>* style,
                                        const Shape& window_shape, Rng& rng, int64_t* evals = nullptr);

struct CondInputs {
    const Tensor<float>* ctx = nullptr;
    const Tensor<float>* style = nullptr;
};

CondInputs conditioning_for(const std::string& mode, const EvalItem& item);

}  // namespace lcl
