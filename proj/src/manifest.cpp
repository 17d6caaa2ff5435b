#include "khm/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "khm/core.hpp"

namespace khm {

namespace {

std::uint64_t hash_file(const std::string& path, std::uint64_t& bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("manifest: cannot read '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ull;
    bytes = 0;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const std::streamsize got = in.gcount();
        if (got <= 0) break;
        h = fnv1a(buf.data(), static_cast<std::size_t>(got), h);
        bytes += static_cast<std::uint64_t>(got);
    }
    return h;
}

}  // namespace

const char* code_version() { return "0.1.0"; }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void manifest_add_file(RunManifest& manifest, const std::string& dir, const std::string& name) {
    ManifestFile entry;
    entry.name = name;
    entry.checksum = hash_file(dir + "/" + name, entry.bytes);
    manifest.files.push_back(std::move(entry));
}

void write_manifest_json(std::ostream& out, const RunManifest& manifest) {
    nlohmann::json j;
    j["tool"] = manifest.tool;
    j["version"] = manifest.version;
    j["subcommand"] = manifest.subcommand;
    j["created_utc"] = manifest.created_utc;
    j["config_hash"] = manifest.config_hash;
    j["files"] = nlohmann::json::array();
    for (const ManifestFile& f : manifest.files) {
        j["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"checksum", f.checksum}});
    }
    out << j.dump(2) << '\n';
}

RunManifest read_manifest_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest: malformed JSON: ") + e.what());
    }
    RunManifest m;
    try {
        m.tool = j.at("tool").get<std::string>();
        m.version = j.at("version").get<std::string>();
        m.subcommand = j.at("subcommand").get<std::string>();
        m.created_utc = j.at("created_utc").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::uint64_t>();
        for (const auto& f : j.at("files")) {
            ManifestFile entry;
            entry.name = f.at("name").get<std::string>();
            entry.bytes = f.at("bytes").get<std::uint64_t>();
            entry.checksum = f.at("checksum").get<std::uint64_t>();
            m.files.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest: missing field: ") + e.what());
    }
    return m;
}

std::vector<std::string> verify_manifest(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw ConfigError("manifest: cannot open '" + dir + "/manifest.json'");
    const RunManifest m = read_manifest_json(in);
    std::vector<std::string> bad;
    for (const ManifestFile& f : m.files) {
        std::uint64_t bytes = 0;
        std::uint64_t checksum = 0;
        try {
            checksum = hash_file(dir + "/" + f.name, bytes);
        } catch (const ConfigError&) {
            bad.push_back(f.name);
            continue;
        }
        if (bytes != f.bytes || checksum != f.checksum) bad.push_back(f.name);
    }
    return bad;
}

}  // namespace khm
