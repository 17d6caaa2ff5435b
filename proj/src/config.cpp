#include "khm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace khm {

namespace {

enum class KeyKind { string_value, int_value, real_value, bool_value, enum_value };

struct KeySpec {
    const char* name;
    KeyKind kind;
    const char* def;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_strict = false;
    bool hi_strict = false;
    std::vector<std::string> allowed = {};
};

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> table = {
        {"solver.model", KeyKind::enum_value, "emhd", 0, 0, false, false, {"emhd", "hallmhd"}},
        {"solver.n", KeyKind::int_value, "32", 8, 512},
        {"solver.d_i", KeyKind::real_value, "1.0", 0},
        {"solver.nu", KeyKind::real_value, "0.0", 0},
        {"solver.eta", KeyKind::real_value, "0.0", 0},
        {"solver.dt", KeyKind::real_value, "1e-3", 0, std::numeric_limits<double>::infinity(), true},
        {"solver.t_end", KeyKind::real_value, "1.0", 0},
        {"solver.cfl_safety", KeyKind::real_value, "0.8", 0, 1, true, false},
        {"solver.ledger_stride", KeyKind::int_value, "10", 1, 1000000000},
        {"solver.snapshot_interval", KeyKind::real_value, "0.0", 0},
        {"ic.kind", KeyKind::enum_value, "random_lowk", 0, 0, false, false,
         {"abc", "random_lowk", "orszag_tang_3d"}},
        {"ic.seed", KeyKind::int_value, "12345", 0, 9.0e18},
        {"ic.kmax", KeyKind::int_value, "3", 1, 1000},
        {"ic.amplitude", KeyKind::real_value, "1.0", 0, std::numeric_limits<double>::infinity(), true},
        {"kernel.profile", KeyKind::enum_value, "bump", 0, 0, false, false, {"bump", "gaussian"}},
        {"kernel.epsilon", KeyKind::real_value, "0.5", 0, std::numeric_limits<double>::infinity(), true},
        {"quadrature.directions", KeyKind::enum_value, "fibonacci", 0, 0, false, false,
         {"fibonacci", "octahedron", "cube", "icosahedron", "dodecahedron"}},
        {"quadrature.direction_count", KeyKind::int_value, "256", 8, 100000},
        {"quadrature.radial_nodes", KeyKind::int_value, "24", 2, 4096},
        {"identities.seed", KeyKind::int_value, "7", 0, 9.0e18},
        {"identities.kmax", KeyKind::int_value, "4", 1, 1000},
        {"identities.samples_per_axis", KeyKind::int_value, "4", 1, 64},
        {"estimate.lambda", KeyKind::real_value, "0.5", 0, std::numeric_limits<double>::infinity(), true},
        {"scan.lambda_min", KeyKind::real_value, "0.2", 0, std::numeric_limits<double>::infinity(), true},
        {"scan.lambda_max", KeyKind::real_value, "1.2", 0, std::numeric_limits<double>::infinity(), true},
        {"scan.lambda_count", KeyKind::int_value, "10", 1, 1000},
        {"scan.window_t0", KeyKind::real_value, "0.0", 0},
        {"scan.window_t1", KeyKind::real_value, "1e30", 0},
        {"scan.ratio_min", KeyKind::real_value, "0.5", 0, std::numeric_limits<double>::infinity(), true},
        {"scan.ratio_max", KeyKind::real_value, "2.0", 0, std::numeric_limits<double>::infinity(), true},
        {"scan.require_plateau", KeyKind::bool_value, "false"},
        {"audit.balance", KeyKind::enum_value, "all", 0, 0, false, false,
         {"all", "energy-L", "energy-T", "helicity-L", "helicity-T"}},
        {"audit.factor_scale", KeyKind::real_value, "1.0", 0, std::numeric_limits<double>::infinity(), true},
        {"tolerances.identity_residual", KeyKind::real_value, "5e-3", 0, std::numeric_limits<double>::infinity(), true},
        {"tolerances.projector", KeyKind::real_value, "1e-12", 0, std::numeric_limits<double>::infinity(), true},
        {"tolerances.hall_rewrite", KeyKind::real_value, "1e-10", 0, std::numeric_limits<double>::infinity(), true},
        {"tolerances.audit_residual", KeyKind::real_value, "1e-2", 0, std::numeric_limits<double>::infinity(), true},
        {"tolerances.constants", KeyKind::real_value, "1e-8", 0, std::numeric_limits<double>::infinity(), true},
        {"tolerances.isotropy", KeyKind::real_value, "1e-6", 0, std::numeric_limits<double>::infinity(), true},
        {"output.dir", KeyKind::string_value, "out"},
        {"threads", KeyKind::int_value, "1", 1, 256},
        {"deterministic", KeyKind::bool_value, "true"},
    };
    return table;
}

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::int64_t out = 0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("config: " + key + " expects an integer, got '" + text + "'");
    }
    return out;
}

real parse_real(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    try {
        std::size_t pos = 0;
        const real v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + " expects a number, got '" + text + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw ConfigError("config: " + key + " expects true or false, got '" + text + "'");
}

std::string bound_text(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void check_range(const std::string& key, const KeySpec& spec, double v) {
    const bool below = spec.lo_strict ? (v <= spec.lo) : (v < spec.lo);
    const bool above = spec.hi_strict ? (v >= spec.hi) : (v > spec.hi);
    if (below || above) {
        std::ostringstream os;
        const bool open_hi = spec.hi_strict || std::isinf(spec.hi);
        os << "config: " << key << " = " << v << " is outside "
           << (spec.lo_strict ? "(" : "[") << bound_text(spec.lo) << ", " << bound_text(spec.hi)
           << (open_hi ? ")" : "]");
        throw ConfigError(os.str());
    }
}

}  // namespace

Config::Config() {
    values_.reserve(schema().size());
    for (const KeySpec& spec : schema()) values_.push_back(spec.def);
}

std::size_t Config::index_of(const std::string& key) const {
    const auto& table = schema();
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (key == table[i].name) return i;
    }
    throw ConfigError("config: unknown key '" + key + "'");
}

void Config::load(std::istream& in, const std::string& origin) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: " + origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + text + "'");
        }
        set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    load(in, path);
}

void Config::set_pair(const std::string& pair) {
    const std::size_t eq = pair.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("config: --set expects key=value, got '" + pair + "'");
    }
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
    values_[index_of(key)] = trim(value);
}

bool Config::has(const std::string& key) const {
    const auto& table = schema();
    return std::any_of(table.begin(), table.end(),
                       [&](const KeySpec& s) { return key == s.name; });
}

std::string Config::get_string(const std::string& key) const { return values_[index_of(key)]; }

std::int64_t Config::get_int(const std::string& key) const {
    return parse_int(key, values_[index_of(key)]);
}

real Config::get_real(const std::string& key) const {
    return parse_real(key, values_[index_of(key)]);
}

bool Config::get_bool(const std::string& key) const {
    return parse_bool(key, values_[index_of(key)]);
}

void Config::validate() const {
    const auto& table = schema();
    for (std::size_t i = 0; i < table.size(); ++i) {
        const KeySpec& spec = table[i];
        const std::string& value = values_[i];
        switch (spec.kind) {
            case KeyKind::string_value:
                if (value.empty()) throw ConfigError(std::string("config: ") + spec.name + " must not be empty");
                break;
            case KeyKind::int_value:
                check_range(spec.name, spec, static_cast<double>(parse_int(spec.name, value)));
                break;
            case KeyKind::real_value: {
                const real v = parse_real(spec.name, value);
                if (!std::isfinite(v)) {
                    throw ConfigError(std::string("config: ") + spec.name + " must be finite");
                }
                check_range(spec.name, spec, v);
                break;
            }
            case KeyKind::bool_value:
                parse_bool(spec.name, value);
                break;
            case KeyKind::enum_value:
                if (std::find(spec.allowed.begin(), spec.allowed.end(), value) == spec.allowed.end()) {
                    std::string options;
                    for (const std::string& a : spec.allowed) {
                        if (!options.empty()) options += ", ";
                        options += a;
                    }
                    throw ConfigError(std::string("config: ") + spec.name + " = '" + value +
                                      "' is not one of {" + options + "}");
                }
                break;
        }
    }
    if (get_real("scan.lambda_min") > get_real("scan.lambda_max")) {
        throw ConfigError("config: scan.lambda_min exceeds scan.lambda_max");
    }
    if (get_real("scan.window_t0") > get_real("scan.window_t1")) {
        throw ConfigError("config: scan.window_t0 exceeds scan.window_t1");
    }
    if (get_real("scan.ratio_min") >= get_real("scan.ratio_max")) {
        throw ConfigError("config: scan.ratio_min must be below scan.ratio_max");
    }
}

std::string Config::resolved() const {
    const auto& table = schema();
    std::string out;
    for (std::size_t i = 0; i < table.size(); ++i) {
        out += table[i].name;
        out += " = ";
        out += values_[i];
        out += '\n';
    }
    return out;
}

std::uint64_t Config::hash() const { return fnv1a(resolved()); }

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    out.reserve(schema().size());
    for (const KeySpec& spec : schema()) out.emplace_back(spec.name);
    return out;
}

}  // namespace khm
