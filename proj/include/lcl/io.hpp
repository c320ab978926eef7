#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcl/nn.hpp"
#include "lcl/optimizer.hpp"
#include "lcl/tensor.hpp"

namespace lcl {

// On-disk parameter bundle. Layout: magic "LCL1", then per entry: name length
// (u32 LE), UTF-8 name, rank (u32), dims (u32 each), f32 LE row-major data,
// repeated until EOF. Metadata rides along as entries named "meta/<k>=<v>"
// with rank 1, dims {0}, no payload. Bytes are deterministic for a given
// Checkpoint: meta first in key order, then tensors in `names` order.
struct Checkpoint {
    std::vector<std::string> names;
    std::unordered_map<std::string, Tensor<float>> tensors;
    std::map<std::string, std::string> meta;

    void add(const std::string& name, Tensor<float> t);
    const Tensor<float>& at(const std::string& name) const;
    bool has(const std::string& name) const { return tensors.count(name) != 0; }
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint checkpoint_from_params(const ParamStore<float>& params, std::map<std::string, std::string> meta);
ParamStore<float> params_from_checkpoint(const Checkpoint& ck);

// Optimizer state lives in a sibling bundle with entries opt/m/<param> and
// opt/v/<param> plus meta key "opt_t".
Checkpoint checkpoint_from_optimizer(const AdamW<float>& opt, const ParamStore<float>& params);
void optimizer_from_checkpoint(const Checkpoint& ck, AdamW<float>& opt);

// Embedding sets: magic "EMB1", u32 LE count N, u32 dim D, u8 modality
// (0=audio-side, 1=text-side), u8 source (0=real, 1=generated), then N*D
// f32 LE row-major.
struct EmbeddingSet {
    uint8_t modality = 0;
    uint8_t source = 0;
    Tensor<float> rows;  // (N x D)

    int64_t count() const { return rows.shape.empty() ? 0 : rows.shape[0]; }
    int64_t dim() const { return rows.shape.size() < 2 ? 0 : rows.shape[1]; }
};

void save_embeddings(const std::string& path, const EmbeddingSet& set);
EmbeddingSet load_embeddings(const std::string& path);

// Small text helpers shared by report/plot/manifest writers.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lcl
