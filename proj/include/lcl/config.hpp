#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcl/bridge.hpp"
#include "lcl/consistency.hpp"
#include "lcl/dit.hpp"
#include "lcl/edm.hpp"
#include "lcl/optimizer.hpp"
#include "lcl/synth.hpp"

namespace lcl {

inline constexpr int kConfigSchemaVersion = 1;

inline const std::vector<std::string> kModelVariants = {"dit-diffusion", "c-dit", "bridge"};
inline const std::vector<std::string> kConditioningModes = {"style+ctx", "text-style+ctx", "ctx",
                                                            "style",     "text-style",     "uncond"};

struct DataConfig {
    SynthConfig synth;
    uint64_t data_seed = 1234;
    int64_t eval_track_sets = 320;
};

struct ConsistencyTrainConfig {
    double gap_max = 2.0;
    double gap_min = 1e-4;
    // warm start reuses the diffusion checkpoint from the same output dir
    bool warm_start = true;
};

struct TrainingConfig {
    int64_t steps = 5000;
    int64_t batch_size = 8;
    double base_lr = 1e-4;
    int64_t warmup_steps = 100;
    double weight_decay = 0.01;
    double cond_dropout = 0.1;
};

struct SamplingConfig {
    int diffusion_steps = 50;
    int consistency_steps = 5;
    double guidance_weight = 1.0;
    int64_t count = 128;
};

// Per-cell generation budget is batches * batch_size; the real-data row
// additionally consumes that many held-out items beyond the reference split,
// and each batch must exceed the embedding dimension for covariance fits.
struct EvalConfig {
    int batches = 2;
    int batch_size = 80;
    int density_k = 5;
};

// Desk-scale defaults; reference-scale values (~280M-parameter backbone,
// 1M-step runs) are accepted through the same fields.
struct ExperimentConfig {
    std::string output_dir = "out";
    std::vector<uint64_t> seeds = {1};
    std::string model_variant = "dit-diffusion";
    std::vector<std::string> conditioning = {"style+ctx"};

    DataConfig data;
    GapSpaceConfig gap;
    DiTConfig dit;
    BridgeConfig bridge;
    EDMParams diffusion;
    ConsistencyTrainConfig consistency;
    TrainingConfig training;
    SamplingConfig sampling;
    EvalConfig evaluation;

    void validate() const;
};

ExperimentConfig default_desk_config();

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_json(const ExperimentConfig& cfg);

// Hash over every reproducibility-relevant field; output_dir is excluded
// because it cannot change produced bytes.
uint64_t config_hash(const ExperimentConfig& cfg);
// Hash over the data and embedding-space fields only; artifacts built from
// different data streams must never be compared.
uint64_t data_generator_hash(const ExperimentConfig& cfg);

// DiT channel widths follow the data and embedding-space settings.
DiTConfig resolved_dit(const ExperimentConfig& cfg);
BridgeConfig resolved_bridge(const ExperimentConfig& cfg);
// Embedding rows are unit vectors, so their per-dimension scale is
// 1/sqrt(embed_dim) rather than sigma_data; the bridge noise schedule is the
// configured one rescaled into that unit so relative noise levels match.
EDMParams resolved_bridge_edm(const ExperimentConfig& cfg);
TrainSchedule resolved_schedule(const ExperimentConfig& cfg);
ConsistencySchedule resolved_consistency_schedule(const ExperimentConfig& cfg);

bool variant_supports(const std::string& variant, const std::string& conditioning);

}  // namespace lcl
