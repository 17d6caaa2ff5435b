#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "khm/core.hpp"

namespace khm {

/// Flat key = value configuration with a fixed, typed schema.
///
/// Every key the tool understands is declared up front with a type, a default
/// and a range (or an allowed-value list for enumerations). Loading a file or
/// applying a command-line override rejects unknown keys immediately, naming
/// the key; validate() checks every value against its constraint and reports
/// the first violation, again by key. Values are stored as text and parsed by
/// the typed getters, so resolved() can echo the configuration back exactly.
class Config {
  public:
    Config();

    /// Parses `key = value` lines. '#' starts a comment, blank lines are
    /// skipped. `origin` is used in error messages (file name, "--set", ...).
    void load(std::istream& in, const std::string& origin = "config");
    void load_file(const std::string& path);

    /// Applies one "key=value" override as given on the command line.
    void set_pair(const std::string& pair);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    real get_real(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// Checks every value against its declared constraint plus a few
    /// cross-key relations (scan bounds ordered, ratio window non-empty).
    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// Canonical text form: every key in schema order, one `key = value`
    /// line each. Stable across platforms, suitable for hashing and for
    /// echoing next to run outputs.
    std::string resolved() const;

    /// FNV-1a hash of resolved().
    std::uint64_t hash() const;

    /// Names of all schema keys, in schema order.
    std::vector<std::string> keys() const;

  private:
    std::size_t index_of(const std::string& key) const;

    std::vector<std::string> values_;
};

}  // namespace khm
