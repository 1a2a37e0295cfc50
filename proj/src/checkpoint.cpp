#include "pathomics/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace pathomics {

namespace {

constexpr char kMagic[4] = {'P', 'O', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("checkpoint: truncated while reading " + what);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::ifstream& in, const std::string& what) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw std::runtime_error("checkpoint: truncated while reading " + what);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::ifstream& in, const std::string& what) {
    std::uint64_t bits = get_u64(in, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

Checkpoint snapshot_model(PathOmicsModel& model, std::string config_json,
                          std::uint64_t rng_state) {
    Checkpoint ckpt;
    ckpt.config_json = std::move(config_json);
    ckpt.rng_state = rng_state;
    for (const NamedParam& p : model.named_params(ParamSet::all)) {
        ckpt.tensors.emplace_back(p.name, *p.tensor);
    }
    return ckpt;
}

void restore_model(PathOmicsModel& model, const Checkpoint& ckpt) {
    std::map<std::string, const Tensor*> by_name;
    for (const auto& [name, tensor] : ckpt.tensors) by_name.emplace(name, &tensor);
    for (const NamedParam& p : model.named_params(ParamSet::all)) {
        auto it = by_name.find(p.name);
        if (it == by_name.end()) {
            throw std::runtime_error("checkpoint: missing tensor '" + p.name + "'");
        }
        if (it->second->shape != p.tensor->shape) {
            throw std::runtime_error("checkpoint: tensor '" + p.name + "' has shape " +
                                     shape_str(it->second->shape) + ", model expects " +
                                     shape_str(p.tensor->shape));
        }
        *p.tensor = *it->second;
    }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u64(out, ckpt.config_json.size());
    out.write(ckpt.config_json.data(), static_cast<std::streamsize>(ckpt.config_json.size()));
    put_u64(out, ckpt.rng_state);
    put_u64(out, ckpt.tensors.size());
    for (const auto& [name, tensor] : ckpt.tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(tensor.shape.size()));
        for (std::size_t d : tensor.shape) put_u64(out, d);
        for (double v : tensor.data) put_f64(out, v);
    }
    if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path.string());
    }
    std::uint32_t version = get_u32(in, "version");
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    Checkpoint ckpt;
    std::uint64_t config_len = get_u64(in, "config length");
    ckpt.config_json.resize(config_len);
    if (!in.read(ckpt.config_json.data(), static_cast<std::streamsize>(config_len))) {
        throw std::runtime_error("checkpoint: truncated config echo");
    }
    ckpt.rng_state = get_u64(in, "rng state");
    std::uint64_t count = get_u64(in, "tensor count");
    for (std::uint64_t t = 0; t < count; ++t) {
        std::uint32_t name_len = get_u32(in, "tensor name length");
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) {
            throw std::runtime_error("checkpoint: truncated tensor name");
        }
        std::uint32_t ndim = get_u32(in, "tensor rank");
        std::vector<std::size_t> shape;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            shape.push_back(static_cast<std::size_t>(get_u64(in, "tensor dim")));
        }
        Tensor tensor = Tensor::zeros(shape);
        for (double& v : tensor.data) v = get_f64(in, "tensor data");
        ckpt.tensors.emplace_back(std::move(name), std::move(tensor));
    }
    return ckpt;
}

}  // namespace pathomics
