#include "lcl/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lcl/bridge.hpp"
#include "lcl/config.hpp"
#include "lcl/consistency.hpp"
#include "lcl/hash.hpp"
#include "lcl/io.hpp"
#include "lcl/metrics.hpp"
#include "lcl/pipeline.hpp"
#include "lcl/plot.hpp"
#include "lcl/report.hpp"

namespace fs = std::filesystem;

namespace lcl {

namespace {

struct Args {
    std::string config_path;
    std::string out_override;
    int64_t seed_override = -1;
    int64_t steps_override = -1;
    std::string variant_override;
    std::string cond_override;
};

ExperimentConfig load_cfg(const Args& a) {
    ExperimentConfig cfg = a.config_path.empty() ? default_desk_config() : load_experiment_config(a.config_path);
    if (!a.out_override.empty()) cfg.output_dir = a.out_override;
    if (a.seed_override >= 0) cfg.seeds = {static_cast<uint64_t>(a.seed_override)};
    if (!a.variant_override.empty()) cfg.model_variant = a.variant_override;
    if (!a.cond_override.empty()) cfg.conditioning = {a.cond_override};
    cfg.validate();
    return cfg;
}

void ensure_outdir(const ExperimentConfig& cfg) { fs::create_directories(cfg.output_dir); }

std::string artifact_base(const ExperimentConfig& cfg, const std::string& variant, uint64_t seed) {
    return cfg.output_dir + "/" + variant + "_seed" + std::to_string(seed);
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

Tensor<float> unit_noise_row(uint64_t seed, int64_t dim) {
    Rng r(seed);
    Tensor<float> v = Tensor<float>::randn(Shape{1, dim}, r);
    double n2 = 0;
    for (float x : v.data) n2 += static_cast<double>(x) * x;
    const double n = std::sqrt(n2);
    for (float& x : v.data) x = static_cast<float>(x / n);
    return v;
}

// ---- gen-data -------------------------------------------------------------

int cmd_gen_data(const ExperimentConfig& cfg) {
    ensure_outdir(cfg);
    Dataset data(cfg);
    const int64_t n = data.eval_sets();
    const int64_t dim = cfg.gap.embed_dim;

    Tensor<float> audio = Tensor<float>::zeros({n, dim});
    Tensor<float> text = Tensor<float>::zeros({n, dim});
    for (int64_t i = 0; i < n; ++i) {
        const auto& item = data.eval_item(i);
        std::copy(item.target_embedding.data.begin(), item.target_embedding.data.end(),
                  audio.data.begin() + i * dim);
        std::copy(item.style_text.data.begin(), item.style_text.data.end(), text.data.begin() + i * dim);
    }
    save_embeddings(cfg.output_dir + "/ref_audio.emb1", EmbeddingSet{0, 0, std::move(audio)});
    save_embeddings(cfg.output_dir + "/ref_text.emb1", EmbeddingSet{1, 0, std::move(text)});

    nlohmann::json m;
    m["schema_version"] = kConfigSchemaVersion;
    m["config_hash"] = hash_hex(config_hash(cfg));
    m["data_hash"] = hash_hex(data.data_hash());
    m["data_seed"] = cfg.data.data_seed;
    m["num_track_sets"] = cfg.data.synth.num_track_sets;
    m["train_sets"] = data.train_sets();
    m["eval_sets"] = data.eval_sets();
    m["window"] = cfg.data.synth.window;
    m["channels"] = cfg.data.synth.channels;
    m["embed_dim"] = dim;
    m["files"] = {"ref_audio.emb1", "ref_text.emb1"};
    write_text_file(cfg.output_dir + "/manifest.json", m.dump(2) + "\n");

    std::cout << "generated corpus manifest: " << cfg.output_dir << "/manifest.json (" << data.train_sets()
              << " train sets, " << n << " eval sets, data hash " << hash_hex(data.data_hash()) << ")\n";
    return 0;
}

// ---- train ----------------------------------------------------------------

void check_checkpoint_provenance(const Checkpoint& ck, const Dataset& data, const std::string& what) {
    auto it = ck.meta.find("data_hash");
    if (it == ck.meta.end()) throw ContractViolation(what + ": checkpoint lacks data provenance");
    if (it->second != hash_hex(data.data_hash()))
        throw ContractViolation(what + ": checkpoint was trained against a different data stream (" + it->second +
                                " vs " + hash_hex(data.data_hash()) + ")");
}

std::map<std::string, std::string> checkpoint_meta(const ExperimentConfig& cfg, const Dataset& data,
                                                   const std::string& variant, uint64_t seed, int64_t step) {
    return {{"config_hash", hash_hex(config_hash(cfg))},
            {"data_hash", hash_hex(data.data_hash())},
            {"variant", variant},
            {"seed", std::to_string(seed)},
            {"step", std::to_string(step)}};
}

int cmd_train(const ExperimentConfig& cfg, const std::string& variant, int64_t steps_override) {
    ensure_outdir(cfg);
    Dataset data(cfg);
    const uint64_t seed = cfg.seeds.front();
    const int64_t target = steps_override >= 0 ? steps_override : cfg.training.steps;
    const std::string base = artifact_base(cfg, variant, seed);
    const std::string ckpt_path = base + ".lcl1";
    const std::string opt_path = base + ".opt.lcl1";
    const std::string csv_path = base + "_loss.csv";

    TrainerState st;
    bool resumed = false;
    if (fs::exists(ckpt_path)) {
        Checkpoint ck = load_checkpoint(ckpt_path);
        check_checkpoint_provenance(ck, data, "train");
        if (ck.meta.count("variant") && ck.meta.at("variant") != variant)
            throw ContractViolation("train: checkpoint at " + ckpt_path + " holds variant '" +
                                    ck.meta.at("variant") + "'");
        st = init_trainer(cfg, variant, seed);
        auto loaded = params_from_checkpoint(ck);
        if (loaded.names != st.params.names)
            throw ContractViolation("train: checkpoint weights do not fit the configured model");
        st.params = std::move(loaded);
        optimizer_from_checkpoint(load_checkpoint(opt_path), st.opt);
        st.step = std::stoll(ck.meta.at("step"));
        resumed = true;
        std::cout << "resuming " << variant << " from step " << st.step << "\n";
    } else {
        const ParamStore<float>* warm = nullptr;
        ParamStore<float> warm_store;
        if (variant == "c-dit" && cfg.consistency.warm_start) {
            const std::string diff_path = artifact_base(cfg, "dit-diffusion", seed) + ".lcl1";
            if (fs::exists(diff_path)) {
                Checkpoint ck = load_checkpoint(diff_path);
                check_checkpoint_provenance(ck, data, "train (warm start)");
                warm_store = params_from_checkpoint(ck);
                warm = &warm_store;
                std::cout << "warm starting c-dit from " << diff_path << "\n";
            }
        }
        st = init_trainer(cfg, variant, seed, warm);
    }

    if (st.step > target) throw ContractViolation("train: checkpoint already beyond requested step count");

    std::vector<TrainLogRow> log;
    auto flush_csv = [&]() {
        std::ostringstream rows;
        if (!resumed || !fs::exists(csv_path))
            rows << "# config_hash=" << hash_hex(config_hash(cfg)) << "\nstep,loss,lr\n";
        else
            rows << read_text_file(csv_path);
        for (const auto& r : log) rows << r.step << "," << fmt_g(r.loss) << "," << fmt_g(r.lr) << "\n";
        write_text_file(csv_path, rows.str());
    };

    try {
        train_steps(st, cfg, data, seed, target, log);
    } catch (const NumericalError& e) {
        const std::string diverged = base + ".diverged.lcl1";
        save_checkpoint(diverged, checkpoint_from_params(st.params, checkpoint_meta(cfg, data, variant, seed, st.step)));
        flush_csv();
        throw NumericalError(std::string(e.what()) + "; last checkpoint: " + diverged);
    }

    save_checkpoint(ckpt_path, checkpoint_from_params(st.params, checkpoint_meta(cfg, data, variant, seed, st.step)));
    Checkpoint opt_ck = checkpoint_from_optimizer(st.opt, st.params);
    opt_ck.meta["config_hash"] = hash_hex(config_hash(cfg));
    save_checkpoint(opt_path, opt_ck);
    flush_csv();

    double tail = 0;
    const size_t tail_n = std::min<size_t>(100, log.size());
    for (size_t i = log.size() - tail_n; i < log.size(); ++i) tail += log[i].loss;
    std::cout << "trained " << variant << " to step " << st.step << " (last-" << tail_n
              << " mean loss " << (tail_n ? fmt_g(tail / static_cast<double>(tail_n)) : "n/a") << "); checkpoint "
              << ckpt_path << "\n";
    return 0;
}

// ---- sample ---------------------------------------------------------------

ParamStore<float> load_variant_params(const ExperimentConfig& cfg, const Dataset& data, const std::string& variant,
                                      uint64_t seed) {
    const std::string path = artifact_base(cfg, variant, seed) + ".lcl1";
    Checkpoint ck = load_checkpoint(path);
    check_checkpoint_provenance(ck, data, variant);
    return params_from_checkpoint(ck);
}

Tensor<float> generate_one(const ExperimentConfig& cfg, const Dataset& data, const std::string& variant,
                           const std::string& mode, const ParamStore<float>& params, int64_t item_index,
                           uint64_t sample_seed, int steps_override, int64_t* evals) {
    const auto& item = data.eval_item(item_index);
    Rng rng(sample_seed);
    if (variant == "bridge") {
        const Tensor<float>* text = mode == "text-style" ? &item.style_text : nullptr;
        const int steps = steps_override >= 0 ? steps_override : cfg.sampling.diffusion_steps;
        return bridge_sample<float>(params, resolved_bridge(cfg), text, steps, rng, resolved_bridge_edm(cfg), evals);
    }
    const CondInputs ci = conditioning_for(mode, item);
    const Shape wshape{cfg.data.synth.window, cfg.data.synth.channels};
    if (variant == "dit-diffusion") {
        const int steps = steps_override >= 0 ? steps_override : cfg.sampling.diffusion_steps;
        return sample_window_diffusion(params, resolved_dit(cfg), cfg.diffusion, steps, cfg.sampling.guidance_weight,
                                       ci.ctx, ci.style, wshape, rng, evals);
    }
    if (variant == "c-dit") {
        const int steps = steps_override >= 0 ? steps_override : cfg.sampling.consistency_steps;
        return sample_window_consistency(params, resolved_dit(cfg), cfg.diffusion, steps, ci.ctx, ci.style, wshape,
                                         rng, evals);
    }
    throw ContractViolation("sample: unknown variant '" + variant + "'");
}

int cmd_sample(const ExperimentConfig& cfg, const std::string& variant, const std::string& mode,
               int steps_override) {
    if (!variant_supports(variant, mode))
        throw ContractViolation("sample: variant '" + variant + "' does not support conditioning '" + mode + "'");
    ensure_outdir(cfg);
    Dataset data(cfg);
    const uint64_t seed = cfg.seeds.front();
    auto params = load_variant_params(cfg, data, variant, seed);

    const int64_t count = cfg.sampling.count;
    const int64_t dim = cfg.gap.embed_dim;
    Tensor<float> rows = Tensor<float>::zeros({count, dim});
    Checkpoint latents;
    latents.meta = {{"config_hash", hash_hex(config_hash(cfg))},
                    {"variant", variant},
                    {"conditioning", mode},
                    {"seed", std::to_string(seed)},
                    {"count", std::to_string(count)}};
    int64_t evals = 0, evals_first = 0;
    for (int64_t i = 0; i < count; ++i) {
        int64_t this_evals = 0;
        const uint64_t s = derive_seed(seed, "sample-" + variant + "-" + mode, static_cast<uint64_t>(i));
        Tensor<float> out = generate_one(cfg, data, variant, mode, params, i % data.eval_sets(), s, steps_override,
                                         &this_evals);
        if (i == 0) evals_first = this_evals;
        evals += this_evals;
        Tensor<float> emb = variant == "bridge" ? out : audio_style_embedding(out, cfg.gap);
        std::copy(emb.data.begin(), emb.data.end(), rows.data.begin() + i * dim);
        char name[32];
        std::snprintf(name, sizeof(name), "sample%05lld", static_cast<long long>(i));
        latents.add(name, std::move(out));
    }

    const std::string stem = cfg.output_dir + "/samples_" + variant + "_" + mode + "_seed" + std::to_string(seed);
    save_checkpoint(stem + ".lcl1", latents);
    save_embeddings(stem + ".emb1", EmbeddingSet{0, 1, std::move(rows)});
    nlohmann::json side;
    side["config_hash"] = hash_hex(config_hash(cfg));
    side["data_hash"] = hash_hex(data.data_hash());
    side["variant"] = variant;
    side["conditioning"] = mode;
    side["seed"] = seed;
    side["count"] = count;
    side["network_evals_per_sample"] = count > 0 ? evals_first : 0;
    write_text_file(stem + ".json", side.dump(2) + "\n");

    std::cout << "wrote " << count << " samples to " << stem << ".emb1";
    if (count > 0) std::cout << " (" << evals_first << " network evaluations per sample)";
    std::cout << "\n";
    return 0;
}

// ---- ablate ---------------------------------------------------------------

struct CellJob {
    std::string variant;
    std::string mode;
};

MetricCell evaluate_variant_cell(const ExperimentConfig& cfg, const Dataset& data, const Tensor<float>& reference,
                                 const ParamStore<float>& params, const std::string& variant, const std::string& mode,
                                 const Tensor<float>& ctx_centroid) {
    const uint64_t seed = cfg.seeds.front();
    const int64_t dim = cfg.gap.embed_dim;
    const int bs = cfg.evaluation.batch_size;
    const uint64_t cell_seed = derive_seed(seed, "ablate-" + variant + "-" + mode);

    BatchGenerator gen = [&, cell_seed](int b, int batch_size) {
        Tensor<float> out = Tensor<float>::zeros({batch_size, dim});
        for (int j = 0; j < batch_size; ++j) {
            const int64_t idx = static_cast<int64_t>(b) * batch_size + j;
            const uint64_t s = derive_seed(cell_seed, "sample", static_cast<uint64_t>(idx));
            Tensor<float> win = generate_one(cfg, data, variant, mode, params, idx % data.eval_sets(), s, -1, nullptr);
            Tensor<float> emb = variant == "bridge" ? win : audio_style_embedding(win, cfg.gap);
            std::copy(emb.data.begin(), emb.data.end(), out.data.begin() + static_cast<int64_t>(j) * dim);
        }
        return out;
    };

    auto gt_rows = [&](int b, int batch_size, bool text_side) {
        Tensor<float> gt = Tensor<float>::zeros({batch_size, dim});
        for (int j = 0; j < batch_size; ++j) {
            const int64_t idx = (static_cast<int64_t>(b) * batch_size + j) % data.eval_sets();
            const auto& row = text_side ? data.eval_item(idx).style_text : data.eval_item(idx).style_audio;
            std::copy(row.data.begin(), row.data.end(), gt.data.begin() + static_cast<int64_t>(j) * dim);
        }
        return gt;
    };
    std::vector<ExtraMetric> extras = {
        {"cs_aa", [&](int b, const Tensor<float>& batch) { return mean_row_cosine(batch, gt_rows(b, bs, false)); }},
        {"cs_ta", [&](int b, const Tensor<float>& batch) { return mean_row_cosine(batch, gt_rows(b, bs, true)); }}};

    const bool has_ctx = mode.find("ctx") != std::string::npos;
    MetricRegistry reg;
    if (has_ctx) {
        reg.add("apa", [&](const Tensor<float>&, const Tensor<float>& accomp) {
            Tensor<float> centroids = Tensor<float>::zeros(accomp.shape);
            for (int64_t r = 0; r < accomp.shape[0]; ++r)
                std::copy(ctx_centroid.data.begin(), ctx_centroid.data.end(),
                          centroids.data.begin() + r * accomp.shape[1]);
            return mean_row_cosine(accomp, centroids);
        });
    }
    return evaluation_protocol(gen, reference, cfg.evaluation.batches, bs, cfg.evaluation.density_k,
                               has_ctx ? &reg : nullptr, extras);
}

int cmd_ablate(const ExperimentConfig& cfg) {
    ensure_outdir(cfg);
    Dataset data(cfg);
    const uint64_t seed = cfg.seeds.front();

    // the manifest pins which data stream every artifact in this directory
    // came from; refusing to run without one prevents silent cross-corpus
    // comparisons
    const std::string manifest_path = cfg.output_dir + "/manifest.json";
    auto m = nlohmann::json::parse(read_text_file(manifest_path));
    if (!m.contains("data_hash") || m.at("data_hash").get<std::string>() != hash_hex(data.data_hash()))
        throw ContractViolation("ablate: manifest data hash " +
                                (m.contains("data_hash") ? m.at("data_hash").get<std::string>() : "<missing>") +
                                " does not match the configured data stream " + hash_hex(data.data_hash()));

    const int64_t gen_count = static_cast<int64_t>(cfg.evaluation.batches) * cfg.evaluation.batch_size;
    const int64_t ref_n = data.eval_sets() - gen_count;
    if (ref_n < cfg.gap.embed_dim + 2 || ref_n <= cfg.evaluation.density_k)
        throw ContractViolation("ablate: evaluation split too small for the reference set");
    if (cfg.evaluation.batch_size <= cfg.gap.embed_dim)
        throw ContractViolation("ablate: evaluation batch_size must exceed embed_dim for covariance fits");
    const Tensor<float> reference = data.reference_embeddings(ref_n);

    // shared context anchor for the adherence plugin
    Tensor<float> ctx_centroid = Tensor<float>::zeros({1, cfg.gap.embed_dim});
    for (int64_t i = 0; i < ref_n; ++i) {
        auto e = audio_style_embedding(data.eval_item(i).context, cfg.gap);
        for (int64_t j = 0; j < cfg.gap.embed_dim; ++j) ctx_centroid.data[j] += e.data[j] / static_cast<float>(ref_n);
    }

    Report report;
    report.config_hash = config_hash(cfg);
    report.columns = {"kd", "fad", "cov", "den", "apa", "cs_aa", "cs_ta"};

    // real upper bound: held-out items beyond the reference split
    {
        ReportRow row{"real", "-", {}, false};
        BatchGenerator gen = [&](int b, int bs) {
            Tensor<float> out = Tensor<float>::zeros({bs, cfg.gap.embed_dim});
            for (int j = 0; j < bs; ++j) {
                const int64_t idx = ref_n + static_cast<int64_t>(b) * bs + j;
                const auto& emb = data.eval_item(idx).target_embedding;
                std::copy(emb.data.begin(), emb.data.end(),
                          out.data.begin() + static_cast<int64_t>(j) * cfg.gap.embed_dim);
            }
            return out;
        };
        row.cell = evaluation_protocol(gen, reference, cfg.evaluation.batches, cfg.evaluation.batch_size,
                                       cfg.evaluation.density_k);
        report.rows.push_back(std::move(row));
    }

    std::vector<CellJob> jobs;
    for (const auto& variant : kModelVariants)
        for (const auto& mode : cfg.conditioning)
            if (variant_supports(variant, mode)) jobs.push_back({variant, mode});

    // model weights load up front so provenance failures abort before work
    std::map<std::string, std::optional<ParamStore<float>>> weights;
    for (const auto& job : jobs) {
        if (weights.count(job.variant)) continue;
        const std::string path = artifact_base(cfg, job.variant, seed) + ".lcl1";
        if (!fs::exists(path)) {
            weights[job.variant] = std::nullopt;
            std::cerr << "[ablate] missing checkpoint " << path << ", cells marked absent\n";
            continue;
        }
        weights[job.variant] = load_variant_params(cfg, data, job.variant, seed);
    }

    std::vector<std::future<ReportRow>> futures;
    for (const auto& job : jobs) {
        futures.push_back(std::async(std::launch::async, [&, job]() {
            ReportRow row{job.variant, job.mode, {}, false};
            const auto& w = weights.at(job.variant);
            if (!w) {
                row.absent = true;
                return row;
            }
            row.cell = evaluate_variant_cell(cfg, data, reference, *w, job.variant, job.mode, ctx_centroid);
            return row;
        }));
    }
    for (auto& f : futures) report.rows.push_back(f.get());

    // noise lower bound: direction-uniform vectors unrelated to the corpus
    {
        ReportRow row{"noise", "-", {}, false};
        const uint64_t noise_seed = derive_seed(seed, "ablate-noise");
        BatchGenerator gen = [&](int b, int bs) {
            Tensor<float> out = Tensor<float>::zeros({bs, cfg.gap.embed_dim});
            for (int j = 0; j < bs; ++j) {
                auto v = unit_noise_row(derive_seed(noise_seed, "row", static_cast<uint64_t>(b) * bs + j),
                                        cfg.gap.embed_dim);
                std::copy(v.data.begin(), v.data.end(),
                          out.data.begin() + static_cast<int64_t>(j) * cfg.gap.embed_dim);
            }
            return out;
        };
        row.cell = evaluation_protocol(gen, reference, cfg.evaluation.batches, cfg.evaluation.batch_size,
                                       cfg.evaluation.density_k);
        report.rows.push_back(std::move(row));
    }

    write_text_file(cfg.output_dir + "/report.csv", report_to_csv(report));
    const std::string table = report_to_table(report);
    write_text_file(cfg.output_dir + "/report.txt", table);
    std::cout << table;
    return 0;
}

// ---- plot -----------------------------------------------------------------

int cmd_plot(const ExperimentConfig& cfg) {
    const std::string csv_path = cfg.output_dir + "/report.csv";
    Report r = parse_report_csv(read_text_file(csv_path));
    auto written = write_metric_charts(r, cfg.output_dir);
    for (const auto& p : written) std::cout << "wrote " << p << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"latent accompaniment lab: data generation, training, sampling, ablation"};
    app.require_subcommand(1);

    Args a;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", a.config_path, "experiment config JSON path");
        sub->add_option("--seed", a.seed_override, "override the seed list with one seed");
        sub->add_option("--out", a.out_override, "override the output directory");
        sub->add_option("--steps", a.steps_override, "override the step count");
        sub->add_option("--variant", a.variant_override, "model variant")->check(CLI::IsMember(kModelVariants));
        sub->add_option("--conditioning", a.cond_override, "conditioning mode")
            ->check(CLI::IsMember(kConditioningModes));
        return sub;
    };

    auto* gen = add_common(app.add_subcommand("gen-data", "materialize the corpus manifest and reference sets"));
    auto* train = add_common(app.add_subcommand("train", "train the configured variant"));
    auto* sample = add_common(app.add_subcommand("sample", "generate samples from a trained checkpoint"));
    auto* ablate = add_common(app.add_subcommand("ablate", "evaluate every variant x conditioning cell"));
    auto* plot = add_common(app.add_subcommand("plot", "render per-metric charts from a report"));
    auto* btrain = add_common(app.add_subcommand("bridge-train", "train the embedding translation model"));
    auto* bsample = add_common(app.add_subcommand("bridge-sample", "sample audio-side embeddings from text"));

    try {
        app.parse(argc, argv);

        if (gen->parsed()) return cmd_gen_data(load_cfg(a));
        if (train->parsed()) {
            auto cfg = load_cfg(a);
            return cmd_train(cfg, cfg.model_variant, a.steps_override);
        }
        if (sample->parsed()) {
            auto cfg = load_cfg(a);
            const std::string mode = a.cond_override.empty() ? cfg.conditioning.front() : a.cond_override;
            return cmd_sample(cfg, cfg.model_variant, mode, static_cast<int>(a.steps_override));
        }
        if (ablate->parsed()) return cmd_ablate(load_cfg(a));
        if (plot->parsed()) return cmd_plot(load_cfg(a));
        if (btrain->parsed()) {
            a.variant_override = "bridge";
            auto cfg = load_cfg(a);
            return cmd_train(cfg, "bridge", a.steps_override);
        }
        if (bsample->parsed()) {
            a.variant_override = "bridge";
            if (a.cond_override.empty()) a.cond_override = "text-style";
            auto cfg = load_cfg(a);
            return cmd_sample(cfg, "bridge", a.cond_override, static_cast<int>(a.steps_override));
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ContractViolation& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace lcl
