#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace khm {

/// One artifact recorded in a run manifest. The checksum is FNV-1a over the
/// raw bytes of the file.
struct ManifestFile {
    std::string name;
    std::uint64_t bytes = 0;
    std::uint64_t checksum = 0;
};

/// Provenance record written next to every run's outputs. Lists each emitted
/// file with size and checksum so a later reader can prove the directory is
/// the one the tool produced.
struct RunManifest {
    std::string tool;
    std::string version;
    std::string subcommand;
    std::string created_utc;
    std::uint64_t config_hash = 0;
    std::vector<ManifestFile> files;
};

/// Version string compiled into the library.
const char* code_version();

/// Current time as an ISO 8601 UTC timestamp.
std::string utc_timestamp();

/// Hashes the file at dir/name and appends it to the manifest.
/// Throws ConfigError when the file cannot be read.
void manifest_add_file(RunManifest& manifest, const std::string& dir, const std::string& name);

void write_manifest_json(std::ostream& out, const RunManifest& manifest);
RunManifest read_manifest_json(std::istream& in);

/// Re-reads every file listed in dir/manifest.json and compares sizes and
/// checksums. Returns the names of files that are missing or altered.
std::vector<std::string> verify_manifest(const std::string& dir);

}  // namespace khm
