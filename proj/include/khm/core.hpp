#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

/// Small shared pieces: the 3-vector used throughout, error categories that the
/// CLI maps to exit codes, and a couple of numeric helpers.
namespace khm {

using real = double;

inline constexpr real pi = 3.141592653589793238462643383279502884;
inline constexpr real box_length = 2.0 * pi;   // the domain is always [0, 2*pi)^3

/// Raised when a run configuration is malformed (unknown key, bad value,
/// unresolvable scale). Exit code 2 at the CLI boundary.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when an operation's stated precondition fails on actual data
/// (non-solenoidal input to inverse_curl, dissipative snapshot fed to an
/// inviscid audit, ...). Exit code 2 at the CLI boundary.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    real x = 0, y = 0, z = 0;

    real& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    real operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(real s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline Vec3 operator*(real s, const Vec3& v) { return v * s; }
inline real dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline real norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// Relative residual used by the identity harness:
/// |lhs - rhs| / (1 + |lhs| + |rhs|).
inline real identity_residual(real lhs, real rhs) {
    return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

/// FNV-1a 64-bit, used for config hashes and output checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}
inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

}  // namespace khm
