#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "lcl/config.hpp"
#include "lcl/errors.hpp"

using namespace lcl;

TEST_CASE("serialized configs round-trip through the parser unchanged") {
    auto cfg = default_desk_config();
    cfg.seeds = {3, 9};
    cfg.conditioning = {"uncond", "style"};
    cfg.training.steps = 77;
    cfg.gap.quality_scale = 1.5;

    const std::string text = experiment_config_json(cfg);
    auto back = parse_experiment_config(text);
    CHECK(experiment_config_json(back) == text);
    CHECK(back.seeds == cfg.seeds);
    CHECK(back.training.steps == 77);
    CHECK(back.gap.quality_scale == 1.5);
    CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("partial configs inherit defaults for absent sections") {
    auto cfg = parse_experiment_config(R"({"schema_version": 1, "training": {"steps": 12}})");
    CHECK(cfg.training.steps == 12);
    CHECK(cfg.training.batch_size == ExperimentConfig{}.training.batch_size);
    CHECK(cfg.data.synth.window == ExperimentConfig{}.data.synth.window);
}

TEST_CASE("unknown keys are rejected with their full path") {
    CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"schema_version": 1, "blorp": 3})"),
                         doctest::Contains("unknown key 'blorp'"), ContractViolation);
    CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"schema_version": 1, "training": {"stepz": 3}})"),
                         doctest::Contains("unknown key 'training.stepz'"), ContractViolation);
    CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"schema_version": 1, "gap_space": {"embed_dims": 8}})"),
                         doctest::Contains("gap_space.embed_dims"), ContractViolation);
}

TEST_CASE("schema version is mandatory and pinned") {
    CHECK_THROWS_AS(parse_experiment_config(R"({"training": {"steps": 5}})"), ContractViolation);
    CHECK_THROWS_AS(parse_experiment_config(R"({"schema_version": 2})"), ContractViolation);
    CHECK_THROWS_AS(parse_experiment_config(R"({"schema_version": "1"})"), ContractViolation);
}

TEST_CASE("type mismatches and malformed json raise distinct errors") {
    CHECK_THROWS_AS(parse_experiment_config(R"({"schema_version": 1, "training": {"steps": "many"}})"),
                    ContractViolation);
    CHECK_THROWS_AS(parse_experiment_config("{not json"), IoError);
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/cfg.json"), IoError);
}

TEST_CASE("config file loading round-trips") {
    auto cfg = default_desk_config();
    cfg.training.steps = 41;
    const std::string path = "/tmp/lcl_test_cfg_roundtrip.json";
    {
        std::ofstream f(path);
        f << experiment_config_json(cfg);
    }
    auto back = load_experiment_config(path);
    CHECK(back.training.steps == 41);
    CHECK(config_hash(back) == config_hash(cfg));
    std::remove(path.c_str());
}

TEST_CASE("config hash tracks reproducibility-relevant fields only") {
    auto a = default_desk_config();
    auto b = a;
    b.output_dir = "/somewhere/else";
    CHECK(config_hash(a) == config_hash(b));

    b = a;
    b.training.steps += 1;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.sampling.guidance_weight = 2.0;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("data generator hash ignores model and training settings") {
    auto a = default_desk_config();
    auto b = a;
    b.training.steps = 999;
    b.dit.model_dim = 128;
    b.sampling.count = 3;
    CHECK(data_generator_hash(a) == data_generator_hash(b));

    b = a;
    b.data.data_seed = 77;
    CHECK(data_generator_hash(a) != data_generator_hash(b));
    b = a;
    b.gap.quality_scale = 0.0;
    CHECK(data_generator_hash(a) != data_generator_hash(b));
    b = a;
    b.data.synth.window = 32;
    CHECK(data_generator_hash(a) != data_generator_hash(b));
}

TEST_CASE("resolved model shapes follow the data settings") {
    auto cfg = default_desk_config();
    auto d = resolved_dit(cfg);
    CHECK(d.latent_channels == cfg.data.synth.channels);
    CHECK(d.context_channels == cfg.data.synth.channels);
    CHECK(d.style_embed_dim == cfg.gap.embed_dim);
    CHECK(d.max_target_tokens == cfg.data.synth.window / cfg.dit.patch_size);

    auto b = resolved_bridge(cfg);
    CHECK(b.embed_dim == cfg.gap.embed_dim);

    auto sched = resolved_consistency_schedule(cfg);
    CHECK(sched.total_steps == cfg.training.steps);
    CHECK(sched.gap_max == cfg.consistency.gap_max);
}

TEST_CASE("bridge noise schedule is rescaled to the unit-sphere row scale") {
    auto cfg = default_desk_config();
    cfg.gap.embed_dim = 64;
    cfg.diffusion.sigma_data = 0.5;
    auto e = resolved_bridge_edm(cfg);
    // unit rows in 64 dims have per-dimension std 1/8, so the factor is 1/4
    const double f = 0.25;
    CHECK(e.sigma_data == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
    CHECK(e.sigma_min == doctest::Approx(cfg.diffusion.sigma_min * f).epsilon(1e-12));
    CHECK(e.sigma_max == doctest::Approx(cfg.diffusion.sigma_max * f).epsilon(1e-12));
    CHECK(e.p_mean == doctest::Approx(cfg.diffusion.p_mean + std::log(f)).epsilon(1e-12));
    CHECK(e.p_std == cfg.diffusion.p_std);
    CHECK(e.rho == cfg.diffusion.rho);
    // relative ladder geometry is untouched
    CHECK(e.sigma_max / e.sigma_min == doctest::Approx(cfg.diffusion.sigma_max / cfg.diffusion.sigma_min));

    cfg.gap.embed_dim = 16;
    CHECK(resolved_bridge_edm(cfg).sigma_data == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("variant capabilities gate conditioning modes") {
    for (const auto& mode : kConditioningModes) {
        CHECK(variant_supports("dit-diffusion", mode));
        CHECK(variant_supports("c-dit", mode));
    }
    CHECK(variant_supports("bridge", "text-style"));
    CHECK(variant_supports("bridge", "uncond"));
    CHECK_FALSE(variant_supports("bridge", "style+ctx"));
    CHECK_FALSE(variant_supports("bridge", "ctx"));
    CHECK_FALSE(variant_supports("bridge", "style"));
    CHECK_FALSE(variant_supports("bridge", "text-style+ctx"));
}

TEST_CASE("validation rejects inconsistent experiment settings") {
    auto cfg = default_desk_config();
    CHECK_NOTHROW(cfg.validate());

    auto bad = cfg;
    bad.model_variant = "gan";
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = cfg;
    bad.conditioning = {"vibes"};
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = cfg;
    bad.conditioning.clear();
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = cfg;
    bad.seeds.clear();
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = cfg;
    bad.data.eval_track_sets = bad.data.synth.num_track_sets;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = cfg;
    bad.training.base_lr = 0.0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = cfg;
    bad.sampling.count = -1;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = cfg;
    bad.consistency.gap_min = 3.0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
}
