#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "khm/config.hpp"
#include "khm/core.hpp"
#include "khm/manifest.hpp"

using namespace khm;

TEST_CASE("defaults validate and echo every key") {
    Config cfg;
    CHECK_NOTHROW(cfg.validate());
    const std::string text = cfg.resolved();
    for (const std::string& key : cfg.keys()) {
        CAPTURE(key);
        CHECK(text.find(key + " = ") != std::string::npos);
    }
    CHECK(cfg.get_int("solver.n") == 32);
    CHECK(cfg.get_real("solver.dt") == doctest::Approx(1e-3));
    CHECK(cfg.get_string("solver.model") == "emhd");
    CHECK(cfg.get_bool("deterministic"));
}

TEST_CASE("hash is stable and tracks value changes") {
    Config a;
    Config b;
    CHECK(a.hash() == b.hash());
    b.set("solver.n", "64");
    CHECK(a.hash() != b.hash());
}

TEST_CASE("file parsing handles comments, blanks and spacing") {
    std::istringstream in(
        "# a comment\n"
        "\n"
        "solver.n = 48   # trailing comment\n"
        "ic.kind=abc\n"
        "  kernel.epsilon =  0.75\n");
    Config cfg;
    cfg.load(in, "inline");
    CHECK(cfg.get_int("solver.n") == 48);
    CHECK(cfg.get_string("ic.kind") == "abc");
    CHECK(cfg.get_real("kernel.epsilon") == doctest::Approx(0.75));
}

TEST_CASE("unknown keys are rejected by name") {
    Config cfg;
    CHECK_THROWS_WITH_AS(cfg.set("solver.banana", "1"),
                         "config: unknown key 'solver.banana'", ConfigError);
    std::istringstream in("solver.zeta = 1\n");
    CHECK_THROWS_AS(cfg.load(in, "inline"), ConfigError);
}

TEST_CASE("lines without an equals sign report the origin and line number") {
    std::istringstream in("solver.n = 16\nnonsense line\n");
    Config cfg;
    try {
        cfg.load(in, "test.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
    }
}

TEST_CASE("set_pair splits on the first equals sign") {
    Config cfg;
    cfg.set_pair("output.dir=some/dir");
    CHECK(cfg.get_string("output.dir") == "some/dir");
    CHECK_THROWS_AS(cfg.set_pair("no-equals-here"), ConfigError);
}

TEST_CASE("typed getters reject malformed values by key") {
    Config cfg;
    cfg.set("solver.n", "abc");
    CHECK_THROWS_AS(cfg.get_int("solver.n"), ConfigError);
    cfg.set("solver.dt", "fast");
    CHECK_THROWS_AS(cfg.get_real("solver.dt"), ConfigError);
    cfg.set("deterministic", "maybe");
    CHECK_THROWS_AS(cfg.get_bool("deterministic"), ConfigError);
}

TEST_CASE("range violations name the offending key") {
    auto expect_mentions = [](Config& cfg, const char* key) {
        try {
            cfg.validate();
            FAIL("expected ConfigError for ", key);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(key) != std::string::npos);
        }
    };
    {
        Config cfg;
        cfg.set("solver.dt", "0");
        expect_mentions(cfg, "solver.dt");
    }
    {
        Config cfg;
        cfg.set("solver.cfl_safety", "1.5");
        expect_mentions(cfg, "solver.cfl_safety");
    }
    {
        Config cfg;
        cfg.set("quadrature.radial_nodes", "1");
        expect_mentions(cfg, "quadrature.radial_nodes");
    }
    {
        Config cfg;
        cfg.set("solver.model", "mhd");
        expect_mentions(cfg, "solver.model");
    }
}

TEST_CASE("cross-key constraints") {
    Config cfg;
    cfg.set("scan.lambda_min", "2.0");
    cfg.set("scan.lambda_max", "1.0");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    Config cfg2;
    cfg2.set("scan.ratio_min", "2.0");
    cfg2.set("scan.ratio_max", "2.0");
    CHECK_THROWS_AS(cfg2.validate(), ConfigError);
}

TEST_CASE("resolved round-trips through the parser") {
    Config a;
    a.set("solver.n", "64");
    a.set("ic.kind", "abc");
    a.set("kernel.epsilon", "0.35");
    std::istringstream in(a.resolved());
    Config b;
    b.load(in, "echo");
    CHECK(a.resolved() == b.resolved());
    CHECK(a.hash() == b.hash());
}

// ---------------------------------------------------------------------------
// run manifest

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / "khm_manifest_test";
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

}  // namespace

TEST_CASE("manifest lists files with checksums and verifies on re-read") {
    TempDir tmp;
    write_file(tmp.path / "a.csv", "x,y\n1,2\n");
    write_file(tmp.path / "b.json", "{\"pass\": true}\n");

    RunManifest m;
    m.tool = "khmlab";
    m.version = code_version();
    m.subcommand = "test";
    m.created_utc = utc_timestamp();
    m.config_hash = 1234567;
    manifest_add_file(m, tmp.path.string(), "a.csv");
    manifest_add_file(m, tmp.path.string(), "b.json");
    CHECK(m.files.size() == 2);
    CHECK(m.files[0].bytes == 8);

    {
        std::ofstream out(tmp.path / "manifest.json");
        write_manifest_json(out, m);
    }
    {
        std::ifstream in(tmp.path / "manifest.json");
        const RunManifest back = read_manifest_json(in);
        CHECK(back.tool == "khmlab");
        CHECK(back.subcommand == "test");
        CHECK(back.config_hash == 1234567);
        REQUIRE(back.files.size() == 2);
        CHECK(back.files[0].name == "a.csv");
        CHECK(back.files[0].checksum == m.files[0].checksum);
    }

    CHECK(verify_manifest(tmp.path.string()).empty());

    // altering a listed file must be detected
    write_file(tmp.path / "a.csv", "x,y\n1,3\n");
    const auto bad = verify_manifest(tmp.path.string());
    REQUIRE(bad.size() == 1);
    CHECK(bad[0] == "a.csv");

    // and so must deleting one
    std::filesystem::remove(tmp.path / "b.json");
    CHECK(verify_manifest(tmp.path.string()).size() == 2);
}

TEST_CASE("manifest readers reject malformed input") {
    std::istringstream bad("{not json");
    CHECK_THROWS_AS(read_manifest_json(bad), ConfigError);
    std::istringstream missing("{\"tool\": \"khmlab\"}");
    CHECK_THROWS_AS(read_manifest_json(missing), ConfigError);
}
