#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "khm/grid.hpp"

namespace khm {

/// A named collection of vector fields on one grid at one time, plus scalar
/// parameters (viscosities, ion inertial length, ...). This is the on-disk
/// state exchanged between `simulate` and the estimation subcommands.
struct Snapshot {
    std::unique_ptr<Grid> grid;
    real time = 0;
    std::vector<std::pair<std::string, real>> params;
    std::vector<std::pair<std::string, VectorField>> fields;

    Snapshot() = default;
    explicit Snapshot(int n, real t = 0) : grid(std::make_unique<Grid>(n)), time(t) {}

    VectorField& add_field(const std::string& name);
    const VectorField* find_field(const std::string& name) const;
    const VectorField& require_field(const std::string& name) const;

    void set_param(const std::string& key, real value);
    real param_or(const std::string& key, real fallback) const;
};

/// Binary snapshot file, little-endian throughout:
///   magic "KHM1" | u32 n | u32 field_count | f64 time | u32 param_count
///   params:  u16 key_len | key bytes | f64 value            (repeated)
///   fields:  u16 name_len | name bytes | 3 * n^3 f64 values (repeated,
///            components x,y,z in order, each x-fastest)
///   trailer: u64 FNV-1a over every preceding byte
void write_snapshot(const std::string& path, const Snapshot& s);

/// Reads and validates (magic, sizes, trailing checksum); throws
/// PreconditionError on a malformed or corrupted file.
Snapshot read_snapshot(const std::string& path);

}  // namespace khm
