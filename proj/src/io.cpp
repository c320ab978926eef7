#include "lcl/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "lcl/errors.hpp"

namespace lcl {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u8(std::ostream& os, uint8_t v) { os.write(reinterpret_cast<const char*>(&v), 1); }

void put_f32(std::ostream& os, float f) {
    static_assert(sizeof(float) == 4);
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(os, v);
}

bool try_u32(std::istream& is, uint32_t& out) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (is.gcount() == 0 && is.eof()) return false;
    if (is.gcount() != 4) throw IoError("truncated u32");
    out = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) | (static_cast<uint32_t>(b[2]) << 16) |
          (static_cast<uint32_t>(b[3]) << 24);
    return true;
}

uint32_t get_u32(std::istream& is) {
    uint32_t v;
    if (!try_u32(is, v)) throw IoError("unexpected EOF reading u32");
    return v;
}

uint8_t get_u8(std::istream& is) {
    char c;
    if (!is.read(&c, 1)) throw IoError("unexpected EOF reading u8");
    return static_cast<uint8_t>(c);
}

float get_f32(std::istream& is) {
    uint32_t v = get_u32(is);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

void put_entry(std::ostream& os, const std::string& name, const Shape& shape, const float* data, int64_t n) {
    put_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<uint32_t>(shape.size()));
    for (int64_t d : shape) put_u32(os, static_cast<uint32_t>(d));
    for (int64_t i = 0; i < n; ++i) put_f32(os, data[i]);
}

constexpr uint32_t kMaxNameLen = 1u << 20;
constexpr uint32_t kMaxRank = 16;
constexpr uint64_t kMaxNumel = 1ull << 33;

}  // namespace

void Checkpoint::add(const std::string& name, Tensor<float> t) {
    if (tensors.count(name)) throw ContractViolation("duplicate checkpoint entry: " + name);
    names.push_back(name);
    tensors.emplace(name, std::move(t));
}

const Tensor<float>& Checkpoint::at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("checkpoint entry missing: " + name);
    return it->second;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write("LCL1", 4);
    for (const auto& [k, v] : ck.meta) {
        put_entry(os, "meta/" + k + "=" + v, Shape{0}, nullptr, 0);
    }
    for (const auto& name : ck.names) {
        const Tensor<float>& t = ck.tensors.at(name);
        put_entry(os, name, t.shape, t.data.data(), t.numel());
    }
    if (!os) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for read: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "LCL1", 4) != 0)
        throw IoError("bad magic in " + path);
    Checkpoint ck;
    uint32_t name_len;
    while (try_u32(is, name_len)) {
        if (name_len == 0 || name_len > kMaxNameLen) throw IoError("implausible name length in " + path);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw IoError("truncated name in " + path);
        const uint32_t rank = get_u32(is);
        if (rank > kMaxRank) throw IoError("implausible rank in " + path);
        Shape shape;
        uint64_t numel = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            const uint32_t d = get_u32(is);
            shape.push_back(static_cast<int64_t>(d));
            numel *= d;
        }
        if (numel > kMaxNumel) throw IoError("implausible tensor size in " + path);
        Tensor<float> t(shape);
        for (auto& x : t.data) x = get_f32(is);
        if (name.rfind("meta/", 0) == 0) {
            const std::string kv = name.substr(5);
            const size_t eq = kv.find('=');
            if (eq == std::string::npos) throw IoError("malformed meta entry: " + name);
            ck.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
        } else {
            ck.add(name, std::move(t));
        }
    }
    return ck;
}

Checkpoint checkpoint_from_params(const ParamStore<float>& params, std::map<std::string, std::string> meta) {
    Checkpoint ck;
    ck.meta = std::move(meta);
    for (const auto& name : params.names) ck.add(name, params.values.at(name));
    return ck;
}

ParamStore<float> params_from_checkpoint(const Checkpoint& ck) {
    ParamStore<float> params;
    for (const auto& name : ck.names) params.add(name, ck.tensors.at(name));
    return params;
}

Checkpoint checkpoint_from_optimizer(const AdamW<float>& opt, const ParamStore<float>& params) {
    Checkpoint ck;
    ck.meta["opt_t"] = std::to_string(opt.t);
    for (const auto& name : params.names) {
        auto mi = opt.m.find(name);
        auto vi = opt.v.find(name);
        if (mi == opt.m.end() || vi == opt.v.end()) continue;
        ck.add("opt/m/" + name, mi->second);
        ck.add("opt/v/" + name, vi->second);
    }
    return ck;
}

void optimizer_from_checkpoint(const Checkpoint& ck, AdamW<float>& opt) {
    auto it = ck.meta.find("opt_t");
    if (it == ck.meta.end()) throw IoError("optimizer bundle missing opt_t");
    opt.t = std::stoll(it->second);
    opt.m.clear();
    opt.v.clear();
    for (const auto& name : ck.names) {
        if (name.rfind("opt/m/", 0) == 0)
            opt.m.emplace(name.substr(6), ck.tensors.at(name));
        else if (name.rfind("opt/v/", 0) == 0)
            opt.v.emplace(name.substr(6), ck.tensors.at(name));
        else
            throw IoError("unexpected entry in optimizer bundle: " + name);
    }
}

void save_embeddings(const std::string& path, const EmbeddingSet& set) {
    if (set.rows.rank() != 2) throw ContractViolation("embedding set must be rank-2 (N x D)");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write("EMB1", 4);
    put_u32(os, static_cast<uint32_t>(set.rows.shape[0]));
    put_u32(os, static_cast<uint32_t>(set.rows.shape[1]));
    put_u8(os, set.modality);
    put_u8(os, set.source);
    for (float x : set.rows.data) put_f32(os, x);
    if (!os) throw IoError("write failed: " + path);
}

EmbeddingSet load_embeddings(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for read: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "EMB1", 4) != 0)
        throw IoError("bad magic in " + path);
    const uint32_t n = get_u32(is);
    const uint32_t d = get_u32(is);
    if (static_cast<uint64_t>(n) * d > kMaxNumel) throw IoError("implausible embedding size in " + path);
    EmbeddingSet set;
    set.modality = get_u8(is);
    set.source = get_u8(is);
    if (set.modality > 1 || set.source > 1) throw IoError("bad tag byte in " + path);
    set.rows = Tensor<float>(Shape{static_cast<int64_t>(n), static_cast<int64_t>(d)});
    for (auto& x : set.rows.data) x = get_f32(is);
    char extra;
    if (is.read(&extra, 1)) throw IoError("trailing bytes in " + path);
    return set;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for read: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace lcl
