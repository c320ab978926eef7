#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lcl/rng.hpp"
#include "lcl/tensor.hpp"

namespace lcl {

// Multitrack toy corpus: each track set holds aligned stems whose content is
// a seeded sum of sinusoids at exact DFT bins of the analysis window, so the
// labels stay recoverable from any aligned slice.
struct SynthConfig {
    int64_t num_track_sets = 2048;
    int64_t min_stems = 2;
    int64_t max_stems = 6;
    int64_t length = 64;
    int64_t window = 16;
    int64_t channels = 8;
    double amplitude = 1.0;

    void validate() const;
};

struct SynthTrackSet {
    uint64_t seed = 0;
    int genre_id = 0;
    std::vector<Tensor<float>> stems;
    std::vector<int> instrument_id;
    std::vector<int> secondary_id;
    // excluded stems are never picked as target nor mixed into context
    std::vector<bool> excluded;

    int64_t num_stems() const { return static_cast<int64_t>(stems.size()); }
};

SynthTrackSet gen_track_set(uint64_t seed, int64_t num_stems, const SynthConfig& cfg);

// Strongest and second-strongest DFT bins of the channel-averaged window,
// over bins 1 .. window/2 - 1.
std::pair<int, int> spectral_peaks(const Tensor<float>& window_rows);

// Power per DFT bin of the channel-averaged window, bins 1 .. window/2.
std::vector<double> spectral_power(const Tensor<float>& window_rows);

// Fraction of spectral power outside the three strongest bins, in [0, 1].
// Clean stem windows sit near 0; broadband or silent windows sit high.
double concentration_deficit(const Tensor<float>& window_rows);

// Shared embedding space for style vectors from both modalities. Audio and
// text views of one item land on a common anchor, then get pushed apart by
// offset_norm along a fixed direction. Windows whose spectral power is not
// concentrated on three bins (clean stems always are) additionally get
// deflected off the anchor manifold, so sloppy generations read as
// out-of-distribution.
struct GapSpaceConfig {
    int64_t embed_dim = 64;
    int64_t feature_rows = 64;
    double offset_norm = 0.5;
    double cone_angle = 0.3;
    double noise_scale = 0.05;
    double quality_gate = 0.02;
    double quality_scale = 4.0;
    uint64_t space_seed = 0x6c636c2d67617031ull;

    void validate() const;
};

Tensor<float> audio_style_embedding(const Tensor<float>& window_rows, const GapSpaceConfig& gap);
Tensor<float> text_style_embedding(const std::vector<std::string>& tags, const GapSpaceConfig& gap);

std::vector<std::string> stem_tags(const SynthTrackSet& ts, int64_t stem_index);

struct TrainingPair {
    Tensor<float> target;
    Tensor<float> context;
    Tensor<float> style;
    int64_t target_index = 0;
    int64_t train_offset = 0;
    int64_t style_offset = 0;
};

// Target is one eligible stem over a random window; context is the mean of a
// random nonempty subset of the other eligible stems over the same window.
// The style vector comes from a different window of the target stem whenever
// the stem length permits one.
TrainingPair make_training_pair(const SynthTrackSet& ts, Rng& rng, const SynthConfig& cfg, const GapSpaceConfig& gap);

Tensor<float> window_rows(const Tensor<float>& seq, int64_t offset, int64_t window);

}  // namespace lcl
