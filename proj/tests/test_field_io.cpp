#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>

#include "khm/core.hpp"
#include "khm/field_io.hpp"
#include "khm/grid.hpp"

using namespace khm;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / "khm_field_io_test";
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

Snapshot sample_snapshot() {
    Snapshot s(8, 1.75);
    s.set_param("hallmhd", 1.0);
    s.set_param("d_i", 0.25);
    s.set_param("nu", 1e-3);
    s.set_param("eta", 2e-3);
    s.add_field("b");
    VectorField& u = s.add_field("u");
    VectorField& b = const_cast<VectorField&>(s.require_field("b"));
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<real> d(-3.0, 3.0);
    for (std::size_t i = 0; i < s.grid->size(); ++i) {
        b.set(i, {d(rng), d(rng), d(rng)});
        u.set(i, {d(rng), d(rng), d(rng)});
    }
    return s;
}

}  // namespace

TEST_CASE("snapshot round trip preserves every bit") {
    TempDir tmp;
    const std::string path = (tmp.path / "snap.khm").string();
    const Snapshot original = sample_snapshot();
    write_snapshot(path, original);
    const Snapshot back = read_snapshot(path);

    CHECK(back.grid->n() == 8);
    CHECK(back.time == original.time);
    CHECK(back.param_or("hallmhd", 0.0) == 1.0);
    CHECK(back.param_or("d_i", 0.0) == 0.25);
    CHECK(back.param_or("nu", 0.0) == 1e-3);
    CHECK(back.param_or("eta", 0.0) == 2e-3);

    const VectorField& b0 = original.require_field("b");
    const VectorField& b1 = back.require_field("b");
    const VectorField& u1 = back.require_field("u");
    bool exact = true;
    for (std::size_t i = 0; i < back.grid->size(); ++i) {
        const Vec3 a = b0.at(i);
        const Vec3 c = b1.at(i);
        exact = exact && a.x == c.x && a.y == c.y && a.z == c.z;
    }
    CHECK(exact);
    CHECK(u1.grid->n() == 8);
}

TEST_CASE("file begins with the format magic") {
    TempDir tmp;
    const std::string path = (tmp.path / "snap.khm").string();
    write_snapshot(path, sample_snapshot());
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "KHM1");
}

TEST_CASE("corrupted payload bytes are rejected by the checksum") {
    TempDir tmp;
    const std::string path = (tmp.path / "snap.khm").string();
    write_snapshot(path, sample_snapshot());

    const auto size = std::filesystem::file_size(path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekg(static_cast<std::streamoff>(size / 2));
        char byte = 0;
        f.read(&byte, 1);
        byte = static_cast<char>(byte ^ 0x40);
        f.seekp(static_cast<std::streamoff>(size / 2));
        f.write(&byte, 1);
    }
    CHECK_THROWS_AS(read_snapshot(path), PreconditionError);
}

TEST_CASE("truncated files are rejected") {
    TempDir tmp;
    const std::string path = (tmp.path / "snap.khm").string();
    write_snapshot(path, sample_snapshot());
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 16);
    CHECK_THROWS_AS(read_snapshot(path), PreconditionError);
}

TEST_CASE("missing files and fields are reported") {
    CHECK_THROWS_AS(read_snapshot("/nonexistent/snap.khm"), PreconditionError);
    const Snapshot s = sample_snapshot();
    CHECK_THROWS_AS(s.require_field("omega"), PreconditionError);
    CHECK(s.find_field("omega") == nullptr);
    CHECK(s.find_field("b") != nullptr);
    CHECK(s.param_or("absent", -7.0) == -7.0);
}
