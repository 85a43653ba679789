#include "hyperlat/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "hyperlat/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian; big-endian hosts need byte swaps");

namespace hyperlat {

namespace {

constexpr char kMagic[8] = {'H', 'L', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw InputError("checkpoint: truncated file");
    return v;
}

} // namespace

void save_checkpoint(const CheckpointData& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("checkpoint: cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_pod<uint64_t>(out, data.size());
    uint64_t offset = 0;
    for (const auto& [name, entry] : data) {
        write_pod<uint32_t>(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod<uint32_t>(out, static_cast<uint32_t>(entry.shape.size()));
        for (int64_t d : entry.shape) write_pod<int64_t>(out, d);
        write_pod<uint64_t>(out, offset);
        offset += entry.values.size() * sizeof(double);
    }
    for (const auto& [name, entry] : data)
        out.write(reinterpret_cast<const char*>(entry.values.data()),
                  static_cast<std::streamsize>(entry.values.size() * sizeof(double)));
    if (!out) throw InputError("checkpoint: write failed for " + path);
}

void save_checkpoint(const ParamStore& params, const std::string& path) {
    save_checkpoint(snapshot(params), path);
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw InputError("checkpoint: " + path + " is not a parameter archive");
    const uint64_t n = read_pod<uint64_t>(in);
    struct Pending { std::string name; std::vector<int64_t> shape; uint64_t offset; size_t count; };
    std::vector<Pending> manifest;
    manifest.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        const uint32_t name_len = read_pod<uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const uint32_t ndim = read_pod<uint32_t>(in);
        std::vector<int64_t> shape(ndim);
        size_t count = 1;
        for (uint32_t d = 0; d < ndim; ++d) {
            shape[d] = read_pod<int64_t>(in);
            count *= static_cast<size_t>(shape[d]);
        }
        const uint64_t offset = read_pod<uint64_t>(in);
        manifest.push_back({std::move(name), std::move(shape), offset, count});
    }
    const std::streampos payload_start = in.tellg();
    CheckpointData data;
    for (auto& e : manifest) {
        in.seekg(payload_start + static_cast<std::streamoff>(e.offset));
        std::vector<double> values(e.count);
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(e.count * sizeof(double)));
        if (!in) throw InputError("checkpoint: truncated payload in " + path);
        data.emplace(std::move(e.name), CheckpointEntry{std::move(e.shape), std::move(values)});
    }
    return data;
}

CheckpointData snapshot(const ParamStore& params) {
    CheckpointData data;
    for (const auto& name : params.names()) {
        Tensor t = params.get(name);
        data.emplace(name, CheckpointEntry{t.shape(), t.data()});
    }
    return data;
}

size_t load_matching(const CheckpointData& data, const ParamStore& params) {
    size_t loaded = 0;
    for (const auto& name : params.names()) {
        auto it = data.find(name);
        if (it == data.end()) continue;
        Tensor t = params.get(name);
        if (t.shape() != it->second.shape)
            throw InputError("checkpoint: shape mismatch for parameter " + name);
        t.data() = it->second.values;
        ++loaded;
    }
    return loaded;
}

} // namespace hyperlat
