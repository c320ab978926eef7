#include "lcl/bridge.hpp"

#include <cmath>

#include "lcl/errors.hpp"
#include "lcl/metrics.hpp"

namespace lcl {

GapStats modality_gap_stats(const Tensor<float>& text_rows, const Tensor<float>& audio_rows) {
    if (text_rows.rank() != 2 || audio_rows.rank() != 2)
        throw ContractViolation("modality_gap_stats: rank-2 inputs required");
    if (text_rows.shape[0] == 0 || audio_rows.shape[0] == 0)
        throw ContractViolation("modality_gap_stats: empty embedding set");
    if (text_rows.shape != audio_rows.shape)
        throw ContractViolation("modality_gap_stats: matched sets must agree in shape, got " +
                                shape_str(text_rows.shape) + " vs " + shape_str(audio_rows.shape));

    const int64_t n = text_rows.shape[0], d = text_rows.shape[1];
    GapStats out;
    double dist2 = 0.0;
    for (int64_t j = 0; j < d; ++j) {
        double mt = 0.0, ma = 0.0;
        for (int64_t i = 0; i < n; ++i) {
            mt += text_rows.at(i, j);
            ma += audio_rows.at(i, j);
        }
        const double diff = (mt - ma) / static_cast<double>(n);
        dist2 += diff * diff;
    }
    out.centroid_distance = std::sqrt(dist2);

    out.mean_pairwise_cosine = mean_row_cosine(text_rows, audio_rows);
    return out;
}

}  // namespace lcl
