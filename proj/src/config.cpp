#include "lcl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "lcl/errors.hpp"
#include "lcl/hash.hpp"
#include "lcl/io.hpp"

namespace lcl {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ContractViolation("config: '" + path + "' must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
            throw ContractViolation("config: unknown key '" + path + it.key() + "'");
    }
}

template <class T>
void read_field(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ContractViolation("config: wrong type for '" + path + key + "'");
    }
}

void parse_data(const json& j, DataConfig& d) {
    expect_keys(j, "data.", {"num_track_sets", "min_stems", "max_stems", "length", "window", "channels", "amplitude",
                             "data_seed", "eval_track_sets"});
    read_field(j, "data.", "num_track_sets", d.synth.num_track_sets);
    read_field(j, "data.", "min_stems", d.synth.min_stems);
    read_field(j, "data.", "max_stems", d.synth.max_stems);
    read_field(j, "data.", "length", d.synth.length);
    read_field(j, "data.", "window", d.synth.window);
    read_field(j, "data.", "channels", d.synth.channels);
    read_field(j, "data.", "amplitude", d.synth.amplitude);
    read_field(j, "data.", "data_seed", d.data_seed);
    read_field(j, "data.", "eval_track_sets", d.eval_track_sets);
}

json dump_config(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["output_dir"] = c.output_dir;
    j["seeds"] = c.seeds;
    j["model_variant"] = c.model_variant;
    j["conditioning"] = c.conditioning;
    j["data"] = {{"num_track_sets", c.data.synth.num_track_sets}, {"min_stems", c.data.synth.min_stems},
                 {"max_stems", c.data.synth.max_stems},           {"length", c.data.synth.length},
                 {"window", c.data.synth.window},                 {"channels", c.data.synth.channels},
                 {"amplitude", c.data.synth.amplitude},           {"data_seed", c.data.data_seed},
                 {"eval_track_sets", c.data.eval_track_sets}};
    j["gap_space"] = {{"embed_dim", c.gap.embed_dim},     {"feature_rows", c.gap.feature_rows},
                      {"offset_norm", c.gap.offset_norm}, {"cone_angle", c.gap.cone_angle},
                      {"noise_scale", c.gap.noise_scale}, {"quality_gate", c.gap.quality_gate},
                      {"quality_scale", c.gap.quality_scale}};
    j["dit"] = {{"model_dim", c.dit.model_dim},   {"mlp_multiplier", c.dit.mlp_multiplier},
                {"num_heads", c.dit.num_heads},   {"num_layers", c.dit.num_layers},
                {"patch_size", c.dit.patch_size}, {"noise_embed_dim", c.dit.noise_embed_dim}};
    j["bridge"] = {{"hidden_units", c.bridge.hidden_units},
                   {"num_blocks", c.bridge.num_blocks},
                   {"cond_dropout", c.bridge.cond_dropout},
                   {"noise_embed_dim", c.bridge.noise_embed_dim}};
    j["diffusion"] = {{"sigma_min", c.diffusion.sigma_min}, {"sigma_max", c.diffusion.sigma_max},
                      {"sigma_data", c.diffusion.sigma_data}, {"rho", c.diffusion.rho},
                      {"p_mean", c.diffusion.p_mean},       {"p_std", c.diffusion.p_std}};
    j["consistency"] = {{"gap_max", c.consistency.gap_max},
                        {"gap_min", c.consistency.gap_min},
                        {"warm_start", c.consistency.warm_start}};
    j["training"] = {{"steps", c.training.steps},
                     {"batch_size", c.training.batch_size},
                     {"base_lr", c.training.base_lr},
                     {"warmup_steps", c.training.warmup_steps},
                     {"weight_decay", c.training.weight_decay},
                     {"cond_dropout", c.training.cond_dropout}};
    j["sampling"] = {{"diffusion_steps", c.sampling.diffusion_steps},
                     {"consistency_steps", c.sampling.consistency_steps},
                     {"guidance_weight", c.sampling.guidance_weight},
                     {"count", c.sampling.count}};
    j["evaluation"] = {{"batches", c.evaluation.batches},
                       {"batch_size", c.evaluation.batch_size},
                       {"density_k", c.evaluation.density_k}};
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (std::find(kModelVariants.begin(), kModelVariants.end(), model_variant) == kModelVariants.end())
        throw ContractViolation("config: unknown model_variant '" + model_variant + "'");
    if (conditioning.empty()) throw ContractViolation("config: conditioning list must not be empty");
    for (const auto& c : conditioning)
        if (std::find(kConditioningModes.begin(), kConditioningModes.end(), c) == kConditioningModes.end())
            throw ContractViolation("config: unknown conditioning '" + c + "'");
    if (seeds.empty()) throw ContractViolation("config: seeds list must not be empty");
    if (output_dir.empty()) throw ContractViolation("config: output_dir must not be empty");
    if (data.eval_track_sets < 1 || data.eval_track_sets >= data.synth.num_track_sets)
        throw ContractViolation("config: eval_track_sets must leave a training split");
    if (training.steps < 1 || training.batch_size < 1 || training.base_lr <= 0 || training.warmup_steps < 0 ||
        training.weight_decay < 0 || training.cond_dropout < 0 || training.cond_dropout > 1)
        throw ContractViolation("config: bad training field");
    if (sampling.diffusion_steps < 1 || sampling.consistency_steps < 1 || sampling.count < 0)
        throw ContractViolation("config: bad sampling field");
    if (evaluation.batches < 1 || evaluation.batch_size < 1 || evaluation.density_k < 1)
        throw ContractViolation("config: bad evaluation field");
    if (consistency.gap_max <= 0 || consistency.gap_min <= 0 || consistency.gap_min > consistency.gap_max)
        throw ContractViolation("config: bad consistency gap range");
    data.synth.validate();
    gap.validate();
    diffusion.validate();
    resolved_dit(*this).validate();
    resolved_bridge(*this).validate();
}

ExperimentConfig default_desk_config() {
    ExperimentConfig c;
    c.dit.model_dim = 64;
    c.dit.mlp_multiplier = 2;
    c.dit.num_heads = 2;
    c.dit.num_layers = 3;
    c.dit.patch_size = 2;
    c.dit.noise_embed_dim = 32;
    c.bridge.hidden_units = 64;
    c.bridge.num_blocks = 4;
    c.bridge.noise_embed_dim = 32;
    return c;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("config: JSON parse error: ") + e.what());
    }
    expect_keys(j, "", {"schema_version", "output_dir", "seeds", "model_variant", "conditioning", "data", "gap_space",
                        "dit", "bridge", "diffusion", "consistency", "training", "sampling", "evaluation"});
    if (!j.contains("schema_version")) throw ContractViolation("config: missing schema_version");
    int version = -1;
    read_field(j, "", "schema_version", version);
    if (version != kConfigSchemaVersion)
        throw ContractViolation("config: unsupported schema_version " + std::to_string(version));

    ExperimentConfig c = default_desk_config();
    read_field(j, "", "output_dir", c.output_dir);
    read_field(j, "", "seeds", c.seeds);
    read_field(j, "", "model_variant", c.model_variant);
    read_field(j, "", "conditioning", c.conditioning);
    if (j.contains("data")) parse_data(j.at("data"), c.data);
    if (j.contains("gap_space")) {
        const auto& g = j.at("gap_space");
        expect_keys(g, "gap_space.",
                    {"embed_dim", "feature_rows", "offset_norm", "cone_angle", "noise_scale", "quality_gate",
                     "quality_scale"});
        read_field(g, "gap_space.", "embed_dim", c.gap.embed_dim);
        read_field(g, "gap_space.", "feature_rows", c.gap.feature_rows);
        read_field(g, "gap_space.", "offset_norm", c.gap.offset_norm);
        read_field(g, "gap_space.", "cone_angle", c.gap.cone_angle);
        read_field(g, "gap_space.", "noise_scale", c.gap.noise_scale);
        read_field(g, "gap_space.", "quality_gate", c.gap.quality_gate);
        read_field(g, "gap_space.", "quality_scale", c.gap.quality_scale);
    }
    if (j.contains("dit")) {
        const auto& d = j.at("dit");
        expect_keys(d, "dit.", {"model_dim", "mlp_multiplier", "num_heads", "num_layers", "patch_size",
                                "noise_embed_dim"});
        read_field(d, "dit.", "model_dim", c.dit.model_dim);
        read_field(d, "dit.", "mlp_multiplier", c.dit.mlp_multiplier);
        read_field(d, "dit.", "num_heads", c.dit.num_heads);
        read_field(d, "dit.", "num_layers", c.dit.num_layers);
        read_field(d, "dit.", "patch_size", c.dit.patch_size);
        read_field(d, "dit.", "noise_embed_dim", c.dit.noise_embed_dim);
    }
    if (j.contains("bridge")) {
        const auto& b = j.at("bridge");
        expect_keys(b, "bridge.", {"hidden_units", "num_blocks", "cond_dropout", "noise_embed_dim"});
        read_field(b, "bridge.", "hidden_units", c.bridge.hidden_units);
        read_field(b, "bridge.", "num_blocks", c.bridge.num_blocks);
        read_field(b, "bridge.", "cond_dropout", c.bridge.cond_dropout);
        read_field(b, "bridge.", "noise_embed_dim", c.bridge.noise_embed_dim);
    }
    if (j.contains("diffusion")) {
        const auto& d = j.at("diffusion");
        expect_keys(d, "diffusion.", {"sigma_min", "sigma_max", "sigma_data", "rho", "p_mean", "p_std"});
        read_field(d, "diffusion.", "sigma_min", c.diffusion.sigma_min);
        read_field(d, "diffusion.", "sigma_max", c.diffusion.sigma_max);
        read_field(d, "diffusion.", "sigma_data", c.diffusion.sigma_data);
        read_field(d, "diffusion.", "rho", c.diffusion.rho);
        read_field(d, "diffusion.", "p_mean", c.diffusion.p_mean);
        read_field(d, "diffusion.", "p_std", c.diffusion.p_std);
    }
    if (j.contains("consistency")) {
        const auto& k = j.at("consistency");
        expect_keys(k, "consistency.", {"gap_max", "gap_min", "warm_start"});
        read_field(k, "consistency.", "gap_max", c.consistency.gap_max);
        read_field(k, "consistency.", "gap_min", c.consistency.gap_min);
        read_field(k, "consistency.", "warm_start", c.consistency.warm_start);
    }
    if (j.contains("training")) {
        const auto& t = j.at("training");
        expect_keys(t, "training.",
                    {"steps", "batch_size", "base_lr", "warmup_steps", "weight_decay", "cond_dropout"});
        read_field(t, "training.", "steps", c.training.steps);
        read_field(t, "training.", "batch_size", c.training.batch_size);
        read_field(t, "training.", "base_lr", c.training.base_lr);
        read_field(t, "training.", "warmup_steps", c.training.warmup_steps);
        read_field(t, "training.", "weight_decay", c.training.weight_decay);
        read_field(t, "training.", "cond_dropout", c.training.cond_dropout);
    }
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        expect_keys(s, "sampling.", {"diffusion_steps", "consistency_steps", "guidance_weight", "count"});
        read_field(s, "sampling.", "diffusion_steps", c.sampling.diffusion_steps);
        read_field(s, "sampling.", "consistency_steps", c.sampling.consistency_steps);
        read_field(s, "sampling.", "guidance_weight", c.sampling.guidance_weight);
        read_field(s, "sampling.", "count", c.sampling.count);
    }
    if (j.contains("evaluation")) {
        const auto& e = j.at("evaluation");
        expect_keys(e, "evaluation.", {"batches", "batch_size", "density_k"});
        read_field(e, "evaluation.", "batches", c.evaluation.batches);
        read_field(e, "evaluation.", "batch_size", c.evaluation.batch_size);
        read_field(e, "evaluation.", "density_k", c.evaluation.density_k);
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(read_text_file(path));
}

std::string experiment_config_json(const ExperimentConfig& cfg) { return dump_config(cfg).dump(2) + "\n"; }

uint64_t config_hash(const ExperimentConfig& cfg) {
    json j = dump_config(cfg);
    j.erase("output_dir");
    return fnv1a64(j.dump());
}

uint64_t data_generator_hash(const ExperimentConfig& cfg) {
    json j = dump_config(cfg);
    json d;
    d["data"] = j.at("data");
    d["gap_space"] = j.at("gap_space");
    return fnv1a64(d.dump());
}

DiTConfig resolved_dit(const ExperimentConfig& cfg) {
    DiTConfig d = cfg.dit;
    d.latent_channels = cfg.data.synth.channels;
    d.context_channels = cfg.data.synth.channels;
    d.style_embed_dim = cfg.gap.embed_dim;
    d.max_target_tokens = token_count(cfg.data.synth.window, d.patch_size);
    d.max_context_tokens = d.max_target_tokens;
    return d;
}

BridgeConfig resolved_bridge(const ExperimentConfig& cfg) {
    BridgeConfig b = cfg.bridge;
    b.embed_dim = cfg.gap.embed_dim;
    return b;
}

EDMParams resolved_bridge_edm(const ExperimentConfig& cfg) {
    EDMParams e = cfg.diffusion;
    const double f = 1.0 / (std::sqrt(static_cast<double>(cfg.gap.embed_dim)) * cfg.diffusion.sigma_data);
    e.sigma_min *= f;
    e.sigma_max *= f;
    e.sigma_data *= f;  // exactly 1/sqrt(embed_dim)
    e.p_mean += std::log(f);
    return e;
}

TrainSchedule resolved_schedule(const ExperimentConfig& cfg) {
    TrainSchedule s;
    s.base_lr = cfg.training.base_lr;
    s.warmup_steps = std::min(cfg.training.warmup_steps, cfg.training.steps);
    s.total_steps = cfg.training.steps;
    return s;
}

ConsistencySchedule resolved_consistency_schedule(const ExperimentConfig& cfg) {
    ConsistencySchedule s;
    s.gap_max = cfg.consistency.gap_max;
    s.gap_min = cfg.consistency.gap_min;
    s.total_steps = cfg.training.steps;
    return s;
}

bool variant_supports(const std::string& variant, const std::string& conditioning) {
    if (variant == "bridge") return conditioning == "text-style" || conditioning == "uncond";
    return std::find(kConditioningModes.begin(), kConditioningModes.end(), conditioning) != kConditioningModes.end();
}

}  // namespace lcl
