#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lcl/tensor.hpp"

namespace lcl {

// All metric inputs are (N x D) row-per-sample matrices; math runs at double
// precision regardless of storage type.

double frechet_distance(const Tensor<float>& x, const Tensor<float>& y);
double kernel_distance(const Tensor<float>& x, const Tensor<float>& y);

// density: average count of real-ball memberships per generated point,
// normalized by k; coverage: fraction of real points whose k-NN ball
// (closed, radius = k-th neighbor distance within real) contains at least
// one generated point.
std::pair<double, double> density_coverage(const Tensor<float>& real, const Tensor<float>& gen, int k);

double cosine_score(const std::vector<float>& a, const std::vector<float>& b);

// Mean of row-paired cosine scores; rows must align one-to-one.
double mean_row_cosine(const Tensor<float>& a, const Tensor<float>& b);

struct MetricStat {
    double mean = 0.0;
    double stddev = 0.0;
    bool operator==(const MetricStat&) const = default;
};

// One report cell: named column -> batch-averaged statistic, with column
// order preserved for table emission.
struct MetricCell {
    std::vector<std::string> order;
    std::map<std::string, MetricStat> values;

    void set(const std::string& name, MetricStat s);
    const MetricStat& at(const std::string& name) const;
    bool operator==(const MetricCell&) const = default;
};

// Adherence plugins: (context set, accompaniment set) -> scalar. Registered
// metrics appear as extra report columns between den and the cosine scores.
using AdherenceFn = std::function<double(const Tensor<float>& context, const Tensor<float>& accomp)>;

class MetricRegistry {
public:
    void add(const std::string& name, AdherenceFn fn);
    void remove(const std::string& name);
    bool has(const std::string& name) const;
    const std::vector<std::pair<std::string, AdherenceFn>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, AdherenceFn>> entries_;
};

// Produces batch b of candidate embeddings as a (batch_size x D) block.
using BatchGenerator = std::function<Tensor<float>(int batch_index, int batch_size)>;

// Caller-supplied per-batch columns (used for the paired cosine scores).
struct ExtraMetric {
    std::string name;
    std::function<double(int batch_index, const Tensor<float>& batch)> fn;
};

// Each metric is evaluated once per batch against the full reference, then
// averaged; stddev is the sample standard deviation over batches.
MetricCell evaluation_protocol(const BatchGenerator& gen, const Tensor<float>& reference, int batches, int batch_size,
                               int density_k = 5, const MetricRegistry* plugins = nullptr,
                               const std::vector<ExtraMetric>& extras = {});

}  // namespace lcl
