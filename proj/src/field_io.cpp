#include "khm/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace khm {

VectorField& Snapshot::add_field(const std::string& name) {
    fields.emplace_back(name, VectorField(*grid));
    return fields.back().second;
}

const VectorField* Snapshot::find_field(const std::string& name) const {
    for (const auto& [n, f] : fields)
        if (n == name) return &f;
    return nullptr;
}

const VectorField& Snapshot::require_field(const std::string& name) const {
    const VectorField* f = find_field(name);
    if (!f) throw PreconditionError("snapshot has no field named '" + name + "'");
    return *f;
}

void Snapshot::set_param(const std::string& key, real value) {
    for (auto& [k, v] : params)
        if (k == key) {
            v = value;
            return;
        }
    params.emplace_back(key, value);
}

real Snapshot::param_or(const std::string& key, real fallback) const {
    for (const auto& [k, v] : params)
        if (k == key) return v;
    return fallback;
}

namespace {

constexpr char kMagic[4] = {'K', 'H', 'M', '1'};

class Sink {
  public:
    explicit Sink(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw PreconditionError("cannot open '" + path + "' for writing");
    }
    void bytes(const void* p, std::size_t len) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
        hash_ = fnv1a(p, len, hash_);
    }
    void u16(std::uint16_t v) { le(v); }
    void u32(std::uint32_t v) { le(v); }
    void u64(std::uint64_t v) { le(v); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        le(bits);
    }
    void f64_array(const double* p, std::size_t count) {
        static_assert(std::endian::native == std::endian::little,
                      "bulk field path writes raw IEEE-754 bytes");
        bytes(p, count * 8);
    }
    std::uint64_t hash() const { return hash_; }
    void close(const std::string& path) {
        out_.flush();
        if (!out_) throw PreconditionError("write to '" + path + "' failed");
    }

  private:
    template <typename T>
    void le(T v) {
        unsigned char buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(buf, sizeof(T));
    }
    std::ofstream out_;
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

class Source {
  public:
    explicit Source(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw PreconditionError("cannot open '" + path + "' for reading");
    }
    void bytes(void* p, std::size_t len) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
        if (static_cast<std::size_t>(in_.gcount()) != len)
            throw PreconditionError("snapshot '" + path_ + "' is truncated");
        hash_ = fnv1a(p, len, hash_);
    }
    std::uint16_t u16() { return le<std::uint16_t>(); }
    std::uint32_t u32() { return le<std::uint32_t>(); }
    std::uint64_t u64_raw() {
        // trailer read: not folded into the running hash
        unsigned char buf[8];
        in_.read(reinterpret_cast<char*>(buf), 8);
        if (in_.gcount() != 8)
            throw PreconditionError("snapshot '" + path_ + "' is missing its checksum trailer");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }
    double f64() {
        std::uint64_t bits = le<std::uint64_t>();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void f64_array(double* p, std::size_t count) { bytes(p, count * 8); }
    std::uint64_t hash() const { return hash_; }
    const std::string& path() const { return path_; }

  private:
    template <typename T>
    T le() {
        unsigned char buf[sizeof(T)];
        bytes(buf, sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
        return v;
    }
    std::ifstream in_;
    std::string path_;
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

}  // namespace

void write_snapshot(const std::string& path, const Snapshot& s) {
    if (!s.grid) throw PreconditionError("write_snapshot: snapshot has no grid");
    static_assert(sizeof(double) == 8);
    Sink sink(path);
    sink.bytes(kMagic, 4);
    sink.u32(static_cast<std::uint32_t>(s.grid->n()));
    sink.u32(static_cast<std::uint32_t>(s.fields.size()));
    sink.f64(s.time);
    sink.u32(static_cast<std::uint32_t>(s.params.size()));
    for (const auto& [key, value] : s.params) {
        sink.u16(static_cast<std::uint16_t>(key.size()));
        sink.bytes(key.data(), key.size());
        sink.f64(value);
    }
    for (const auto& [name, field] : s.fields) {
        sink.u16(static_cast<std::uint16_t>(name.size()));
        sink.bytes(name.data(), name.size());
        for (int a = 0; a < 3; ++a) sink.f64_array(field.c[a].data(), field.c[a].size());
    }
    const std::uint64_t h = sink.hash();
    sink.u64(h);
    sink.close(path);
}

Snapshot read_snapshot(const std::string& path) {
    Source src(path);
    char magic[4];
    src.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw PreconditionError("'" + path + "' is not a KHM1 snapshot");
    const std::uint32_t n = src.u32();
    const std::uint32_t field_count = src.u32();
    const double time = src.f64();
    const std::uint32_t param_count = src.u32();
    if (n < 8 || n > 4096 || n % 2 != 0)
        throw PreconditionError("snapshot '" + path + "' has implausible n = " + std::to_string(n));

    Snapshot s(static_cast<int>(n), time);
    for (std::uint32_t i = 0; i < param_count; ++i) {
        std::string key(src.u16(), '\0');
        src.bytes(key.data(), key.size());
        s.params.emplace_back(std::move(key), src.f64());
    }
    for (std::uint32_t i = 0; i < field_count; ++i) {
        std::string name(src.u16(), '\0');
        src.bytes(name.data(), name.size());
        VectorField& f = s.add_field(name);
        for (int a = 0; a < 3; ++a) src.f64_array(f.c[a].data(), f.c[a].size());
    }
    const std::uint64_t expected = src.hash();
    const std::uint64_t stored = src.u64_raw();
    if (stored != expected)
        throw PreconditionError("snapshot '" + path + "' failed its checksum");
    return s;
}

}  // namespace khm
