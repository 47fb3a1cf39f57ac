#include "vidcont/core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "vidcont/core/errors.hpp"
#include "vidcont/core/hash.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace vidcont {

namespace {

constexpr char kMagic[4] = {'V', 'C', 'K', 'P'};

template <class T>
void write_pod(std::ostream &out, T v) {
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream &in, const std::string &path) {
    T v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in) throw IoError("truncated checkpoint: " + path);
    return v;
}

}  // namespace

const NamedArray *Checkpoint::find(const std::string &name) const {
    for (const auto &a : arrays)
        if (a.name == name) return &a;
    return nullptr;
}

const NamedArray &Checkpoint::require(const std::string &name) const {
    const NamedArray *a = find(name);
    if (!a) throw DataError("checkpoint array missing: " + name);
    return *a;
}

void Checkpoint::add(const std::string &name, const nn::Tensor &t) {
    arrays.push_back({name, t.shape(), t.vec()});
}

void Checkpoint::add_raw(const std::string &name, nn::Shape shape, std::vector<float> data) {
    arrays.push_back({name, std::move(shape), std::move(data)});
}

void Checkpoint::save(const std::string &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    write_pod<uint32_t>(out, version);
    write_pod<uint64_t>(out, config_text.size());
    out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(arrays.size()));
    for (const auto &a : arrays) {
        write_pod<uint32_t>(out, static_cast<uint32_t>(a.name.size()));
        out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
        write_pod<uint32_t>(out, static_cast<uint32_t>(a.shape.size()));
        for (int d : a.shape) write_pod<uint32_t>(out, static_cast<uint32_t>(d));
        out.write(reinterpret_cast<const char *>(a.data.data()),
                  static_cast<std::streamsize>(a.data.size() * sizeof(float)));
    }
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint Checkpoint::load(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("not a checkpoint file (bad magic): " + path);
    Checkpoint ck;
    ck.version = read_pod<uint32_t>(in, path);
    const uint64_t cfg_len = read_pod<uint64_t>(in, path);
    ck.config_text.resize(cfg_len);
    in.read(ck.config_text.data(), static_cast<std::streamsize>(cfg_len));
    if (!in) throw IoError("truncated checkpoint: " + path);
    const uint32_t count = read_pod<uint32_t>(in, path);
    ck.arrays.resize(count);
    for (auto &a : ck.arrays) {
        const uint32_t name_len = read_pod<uint32_t>(in, path);
        a.name.resize(name_len);
        in.read(a.name.data(), name_len);
        const uint32_t ndim = read_pod<uint32_t>(in, path);
        a.shape.resize(ndim);
        int64_t numel = 1;
        for (auto &d : a.shape) {
            d = static_cast<int>(read_pod<uint32_t>(in, path));
            numel *= d;
        }
        a.data.resize(static_cast<size_t>(numel));
        in.read(reinterpret_cast<char *>(a.data.data()),
                static_cast<std::streamsize>(a.data.size() * sizeof(float)));
        if (!in) throw IoError("truncated checkpoint: " + path);
    }
    return ck;
}

uint64_t file_hash(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for hashing: " + path);
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got > 0) h = fnv1a64(buf, static_cast<size_t>(got), h);
    }
    return h;
}

}  // namespace vidcont
