#include "wdf/weights_io.hpp"

#include <cstring>
#include <fstream>

#include "wdf/errors.hpp"

namespace wdf::weights {

namespace {

constexpr char kMagic[4] = {'W', 'D', 'F', 'W'};

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::ifstream& in, const std::string& what) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ParseError("weight file truncated while reading " + what);
    return v;
}

void put_string(std::ofstream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string take_string(std::ifstream& in, const std::string& what) {
    const auto n = take<std::uint32_t>(in, what + " length");
    if (n > (1u << 20)) throw ParseError("weight file has an implausible " + what + " length");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw ParseError("weight file truncated while reading " + what);
    return s;
}

}  // namespace

void save_weights(const std::string& path, const WeightFile& file) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot open weight file for writing: " + path);
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kWeightFormatVersion);
    put_string(out, file.model_tag);
    put<std::uint64_t>(out, file.config_hash);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(file.meta.size()));
    for (std::int64_t m : file.meta) put<std::int64_t>(out, m);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(file.tensors.size()));
    for (const auto& t : file.tensors) {
        put_string(out, t.name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
        long long numel = 1;
        for (int d : t.shape) {
            put<std::int32_t>(out, d);
            numel *= d;
        }
        if (numel != static_cast<long long>(t.data.size())) {
            throw InvalidArgumentError("weight tensor '" + t.name +
                                       "' data does not match its shape");
        }
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
    if (!out) throw ParseError("failed writing weight file: " + path);
}

WeightFile load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open weight file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw ParseError("not a weight file: " + path);
    }
    const auto version = take<std::uint32_t>(in, "format version");
    if (version != kWeightFormatVersion) {
        throw ParseError("unsupported weight format version " + std::to_string(version) +
                         " in " + path);
    }
    WeightFile file;
    file.model_tag = take_string(in, "model tag");
    file.config_hash = take<std::uint64_t>(in, "config hash");
    const auto meta_count = take<std::uint32_t>(in, "meta count");
    if (meta_count > 1024) throw ParseError("weight file has an implausible meta count");
    file.meta.reserve(meta_count);
    for (std::uint32_t i = 0; i < meta_count; ++i) {
        file.meta.push_back(take<std::int64_t>(in, "meta entry"));
    }
    const auto tensor_count = take<std::uint32_t>(in, "tensor count");
    if (tensor_count > (1u << 16)) throw ParseError("weight file has an implausible tensor count");
    file.tensors.reserve(tensor_count);
    for (std::uint32_t i = 0; i < tensor_count; ++i) {
        NamedTensor t;
        t.name = take_string(in, "tensor name");
        const auto ndim = take<std::uint32_t>(in, "tensor rank");
        if (ndim > 8) throw ParseError("weight tensor '" + t.name + "' has an implausible rank");
        long long numel = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            const auto dim = take<std::int32_t>(in, "tensor dimension");
            if (dim <= 0) throw ParseError("weight tensor '" + t.name + "' has a bad dimension");
            t.shape.push_back(dim);
            numel *= dim;
        }
        if (numel > (1LL << 31)) {
            throw ParseError("weight tensor '" + t.name + "' is implausibly large");
        }
        t.data.resize(static_cast<std::size_t>(numel));
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        if (!in) throw ParseError("weight file truncated in tensor '" + t.name + "'");
        file.tensors.push_back(std::move(t));
    }
    return file;
}

}  // namespace wdf::weights
