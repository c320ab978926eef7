#include "lcl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>

#include "lcl/errors.hpp"
#include "lcl/hash.hpp"

namespace lcl {

void SynthConfig::validate() const {
    if (num_track_sets <= 0 || channels <= 0 || amplitude <= 0.0)
        throw ContractViolation("synth config: bad field");
    if (min_stems < 2 || max_stems < min_stems)
        throw ContractViolation("synth config: need at least two stems per set");
    // three distinct nonzero bins below Nyquist must exist
    if (window < 8 || window % 2 != 0) throw ContractViolation("synth config: window must be even and >= 8");
    if (length < window) throw ContractViolation("synth config: length must cover one window");
}

void GapSpaceConfig::validate() const {
    if (embed_dim <= 0 || feature_rows <= 0 || offset_norm < 0.0 || cone_angle < 0.0 || noise_scale < 0.0)
        throw ContractViolation("gap space config: bad field");
    if (quality_gate < 0.0 || quality_gate > 1.0 || quality_scale < 0.0)
        throw ContractViolation("gap space config: bad quality field");
}

namespace {

int pick_distinct_bin(Rng& rng, int num_bins, int avoid_a, int avoid_b) {
    for (;;) {
        const int b = 1 + static_cast<int>(rng.uniform_int(num_bins));
        if (b != avoid_a && b != avoid_b) return b;
    }
}

std::vector<float> unit_randn(uint64_t seed, int64_t dim) {
    Rng r(seed);
    std::vector<float> v(static_cast<size_t>(dim));
    double norm2 = 0.0;
    for (auto& x : v) {
        x = static_cast<float>(r.normal());
        norm2 += static_cast<double>(x) * x;
    }
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) throw NumericalError("unit_randn: degenerate draw");
    for (auto& x : v) x = static_cast<float>(x / norm);
    return v;
}

uint64_t bytes_hash(const std::vector<float>& data, uint64_t seed) {
    const char* p = reinterpret_cast<const char*>(data.data());
    return fnv1a64(std::string_view(p, data.size() * sizeof(float)), seed);
}

Tensor<float> finish_embedding(const std::string& anchor_label, const std::string& item_label, uint64_t noise_seed,
                               double offset_sign, double quality, uint64_t quality_seed, const GapSpaceConfig& gap) {
    const int64_t row = static_cast<int64_t>(fnv1a64(anchor_label, gap.space_seed) % static_cast<uint64_t>(gap.feature_rows));
    const auto anchor = unit_randn(fnv1a64("row:" + std::to_string(row), gap.space_seed), gap.embed_dim);
    const auto cone = unit_randn(fnv1a64("cone:" + item_label, gap.space_seed), gap.embed_dim);
    const auto noise = unit_randn(noise_seed, gap.embed_dim);
    const auto offset = unit_randn(fnv1a64("offset-axis", gap.space_seed), gap.embed_dim);
    // the deflection direction depends on the content hash, so off-manifold
    // windows scatter instead of clustering at a second anchor
    const auto stray = quality > 0.0 ? unit_randn(quality_seed, gap.embed_dim) : std::vector<float>();

    Tensor<float> out = Tensor<float>::zeros({1, gap.embed_dim});
    double norm2 = 0.0;
    for (int64_t j = 0; j < gap.embed_dim; ++j) {
        double v = anchor[j] + gap.cone_angle * cone[j] + gap.noise_scale * noise[j] +
                   offset_sign * 0.5 * gap.offset_norm * offset[j];
        if (quality > 0.0) v += gap.quality_scale * quality * stray[static_cast<size_t>(j)];
        out.data[j] = static_cast<float>(v);
        norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) throw NumericalError("style embedding collapsed to zero");
    for (auto& v : out.data) v = static_cast<float>(v / norm);
    return out;
}

}  // namespace

SynthTrackSet gen_track_set(uint64_t seed, int64_t num_stems, const SynthConfig& cfg) {
    cfg.validate();
    if (num_stems < cfg.min_stems || num_stems > cfg.max_stems)
        throw ContractViolation("gen_track_set: num_stems outside [" + std::to_string(cfg.min_stems) + ", " +
                                std::to_string(cfg.max_stems) + "]");

    Rng root(seed);
    SynthTrackSet ts;
    ts.seed = seed;
    ts.genre_id = static_cast<int>(root.uniform_int(4));
    const int num_bins = static_cast<int>(cfg.window / 2 - 1);
    const double two_pi = 2.0 * std::numbers::pi;

    for (int64_t i = 0; i < num_stems; ++i) {
        Rng rng = root.derive("stem" + std::to_string(i));
        const int dom = pick_distinct_bin(rng, num_bins, 0, 0);
        const int sub = pick_distinct_bin(rng, num_bins, dom, 0);
        const int third = pick_distinct_bin(rng, num_bins, dom, sub);
        const double a_dom = rng.uniform(0.8, 1.0);
        const double a_sub = a_dom * rng.uniform(0.30, 0.38);
        const double a_third = a_sub * rng.uniform(0.25, 0.40);
        const double ph_dom = rng.uniform(0.0, two_pi);
        const double ph_sub = rng.uniform(0.0, two_pi);
        const double ph_third = rng.uniform(0.0, two_pi);
        std::vector<double> gain(static_cast<size_t>(cfg.channels));
        for (auto& g : gain) g = rng.uniform(0.5, 1.0);
        // peak-normalized so every sample stays within the amplitude bound
        const double scale = cfg.amplitude / (a_dom + a_sub + a_third);

        Tensor<float> stem = Tensor<float>::zeros({cfg.length, cfg.channels});
        for (int64_t t = 0; t < cfg.length; ++t) {
            const double w = two_pi * static_cast<double>(t) / static_cast<double>(cfg.window);
            const double s = a_dom * std::sin(dom * w + ph_dom) + a_sub * std::sin(sub * w + ph_sub) +
                             a_third * std::sin(third * w + ph_third);
            const double env = 0.75 + 0.25 * std::sin(std::numbers::pi * static_cast<double>(t) /
                                                      static_cast<double>(cfg.length - 1));
            for (int64_t c = 0; c < cfg.channels; ++c)
                stem.at(t, c) = static_cast<float>(scale * env * gain[static_cast<size_t>(c)] * s);
        }
        ts.stems.push_back(std::move(stem));
        ts.instrument_id.push_back(dom);
        ts.secondary_id.push_back(sub);
        ts.excluded.push_back(false);
    }
    return ts;
}

std::vector<double> spectral_power(const Tensor<float>& window_rows) {
    if (window_rows.rank() != 2 || window_rows.shape[0] < 8)
        throw ContractViolation("spectral_power: need a (window x channels) slice, window >= 8");
    const int64_t w = window_rows.shape[0], c = window_rows.shape[1];
    std::vector<double> m(static_cast<size_t>(w), 0.0);
    for (int64_t t = 0; t < w; ++t) {
        double acc = 0.0;
        for (int64_t j = 0; j < c; ++j) acc += window_rows.at(t, j);
        m[static_cast<size_t>(t)] = acc / static_cast<double>(c);
    }
    std::vector<double> power(static_cast<size_t>(w / 2));
    for (int k = 1; k <= static_cast<int>(w) / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (int64_t t = 0; t < w; ++t) {
            const double ang = 2.0 * std::numbers::pi * k * static_cast<double>(t) / static_cast<double>(w);
            re += m[static_cast<size_t>(t)] * std::cos(ang);
            im -= m[static_cast<size_t>(t)] * std::sin(ang);
        }
        power[static_cast<size_t>(k - 1)] = re * re + im * im;
    }
    return power;
}

std::pair<int, int> spectral_peaks(const Tensor<float>& window_rows) {
    const auto power = spectral_power(window_rows);
    // the Nyquist bin never carries a stem tone, so it is not a candidate
    const size_t bins = power.size() - 1;
    int best = 1, second = 2;
    double best_mag = -1.0, second_mag = -1.0;
    for (size_t i = 0; i < bins; ++i) {
        const int k = static_cast<int>(i) + 1;
        if (power[i] > best_mag) {
            second = best;
            second_mag = best_mag;
            best = k;
            best_mag = power[i];
        } else if (power[i] > second_mag) {
            second = k;
            second_mag = power[i];
        }
    }
    return {best, second};
}

double concentration_deficit(const Tensor<float>& window_rows) {
    auto power = spectral_power(window_rows);
    double total = 0.0;
    for (double p : power) total += p;
    if (total <= 0.0) return 1.0;
    std::partial_sort(power.begin(), power.begin() + 3, power.end(), std::greater<double>());
    const double top3 = power[0] + power[1] + power[2];
    return std::clamp(1.0 - top3 / total, 0.0, 1.0);
}

Tensor<float> audio_style_embedding(const Tensor<float>& window_rows, const GapSpaceConfig& gap) {
    gap.validate();
    const auto [dom, sub] = spectral_peaks(window_rows);
    const std::string anchor_label = "pitch:" + std::to_string(dom);
    const std::string item_label = anchor_label + "|sub:" + std::to_string(sub);
    const uint64_t noise_seed = bytes_hash(window_rows.data, fnv1a64("noise:audio", gap.space_seed));
    const double deficit = concentration_deficit(window_rows);
    const double quality = deficit < gap.quality_gate ? 0.0 : deficit;
    const uint64_t quality_seed = bytes_hash(window_rows.data, fnv1a64("stray:audio", gap.space_seed));
    return finish_embedding(anchor_label, item_label, noise_seed, +1.0, quality, quality_seed, gap);
}

Tensor<float> text_style_embedding(const std::vector<std::string>& tags, const GapSpaceConfig& gap) {
    gap.validate();
    std::string pitch, sub;
    std::string joined;
    for (const auto& t : tags) {
        if (t.starts_with("pitch:")) pitch = t;
        if (t.starts_with("sub:")) sub = t.substr(4);
        if (!joined.empty()) joined += "|";
        joined += t;
    }
    if (pitch.empty()) throw ContractViolation("text_style_embedding: tags must include a pitch:<bin> entry");
    const std::string item_label = pitch + "|sub:" + (sub.empty() ? "-" : sub);
    const uint64_t noise_seed = fnv1a64(joined, fnv1a64("noise:text", gap.space_seed));
    // tags describe ideal content, so the text view carries no deflection
    return finish_embedding(pitch, item_label, noise_seed, -1.0, 0.0, 0, gap);
}

std::vector<std::string> stem_tags(const SynthTrackSet& ts, int64_t stem_index) {
    if (stem_index < 0 || stem_index >= ts.num_stems())
        throw ContractViolation("stem_tags: index out of range");
    return {"pitch:" + std::to_string(ts.instrument_id[static_cast<size_t>(stem_index)]),
            "sub:" + std::to_string(ts.secondary_id[static_cast<size_t>(stem_index)]),
            "genre:" + std::to_string(ts.genre_id)};
}

Tensor<float> window_rows(const Tensor<float>& seq, int64_t offset, int64_t window) {
    if (seq.rank() != 2) throw ContractViolation("window_rows: rank-2 sequence required");
    if (offset < 0 || window <= 0 || offset + window > seq.shape[0])
        throw ContractViolation("window_rows: slice outside sequence");
    const int64_t c = seq.shape[1];
    Tensor<float> out = Tensor<float>::zeros({window, c});
    std::copy(seq.data.begin() + offset * c, seq.data.begin() + (offset + window) * c, out.data.begin());
    return out;
}

TrainingPair make_training_pair(const SynthTrackSet& ts, Rng& rng, const SynthConfig& cfg, const GapSpaceConfig& gap) {
    cfg.validate();
    gap.validate();
    std::vector<int64_t> pool;
    for (int64_t i = 0; i < ts.num_stems(); ++i)
        if (!ts.excluded[static_cast<size_t>(i)]) pool.push_back(i);
    if (pool.size() < 2) throw ContractViolation("make_training_pair: need two eligible stems");
    for (int64_t i : pool) {
        const auto& st = ts.stems[static_cast<size_t>(i)];
        if (st.rank() != 2 || st.shape[0] < cfg.window || st.shape[1] != cfg.channels)
            throw ContractViolation("make_training_pair: stem shape disagrees with config");
    }

    TrainingPair out;
    out.target_index = pool[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(pool.size())))];
    std::vector<int64_t> others;
    for (int64_t i : pool)
        if (i != out.target_index) others.push_back(i);
    std::vector<int64_t> mix;
    for (int64_t i : others)
        if (rng.uniform() < 0.5) mix.push_back(i);
    if (mix.empty()) mix.push_back(others[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(others.size())))]);

    const auto& target_stem = ts.stems[static_cast<size_t>(out.target_index)];
    const int64_t num_offsets = target_stem.shape[0] - cfg.window + 1;
    out.train_offset = rng.uniform_int(num_offsets);
    out.target = window_rows(target_stem, out.train_offset, cfg.window);

    out.context = Tensor<float>::zeros({cfg.window, cfg.channels});
    for (int64_t i : mix) {
        const auto w = window_rows(ts.stems[static_cast<size_t>(i)], out.train_offset, cfg.window);
        for (size_t j = 0; j < w.data.size(); ++j) out.context.data[j] += w.data[j];
    }
    for (auto& v : out.context.data) v /= static_cast<float>(mix.size());

    // style must come from elsewhere in the target stem when an alternative
    // window exists, so the model cannot copy the training window
    out.style_offset = out.train_offset;
    if (num_offsets > 1)
        while (out.style_offset == out.train_offset) out.style_offset = rng.uniform_int(num_offsets);
    out.style = audio_style_embedding(window_rows(target_stem, out.style_offset, cfg.window), gap);
    return out;
}

}  // namespace lcl
