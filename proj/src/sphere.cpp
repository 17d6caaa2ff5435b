#include "khm/sphere.hpp"

#include <algorithm>
#include <cmath>

namespace khm {

namespace {

// Independent second-moment components of a symmetric traceless matrix built
// from the set: (Mzz - 1/3, Mxx - Myy, Mxy, Mxz, Myz).
std::array<real, 5> moment_defect(const std::vector<Vec3>& pts) {
    real zz = 0, xx = 0, yy = 0, xy = 0, xz = 0, yz = 0;
    for (const Vec3& p : pts) {
        zz += p.z * p.z;
        xx += p.x * p.x;
        yy += p.y * p.y;
        xy += p.x * p.y;
        xz += p.x * p.z;
        yz += p.y * p.z;
    }
    const real m = static_cast<real>(pts.size());
    return {zz / m - 1.0 / 3.0, (xx - yy) / m, xy / m, xz / m, yz / m};
}

// Base half-set from five shape parameters. p = {z scale, m=1 azimuth cos/sin,
// m=2 azimuth cos/sin}; the m=1 modes are weighted by z so they act with odd
// parity in the colatitude, which is what the xz/yz moments respond to.
std::vector<Vec3> build_full_set(int count, const std::array<real, 5>& p) {
    const int h = count / 2;
    std::vector<Vec3> pts(count);
    const real golden_angle = pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < h; ++i) {
        real z = (1.0 - (2.0 * i + 1.0) / count) * p[0];
        z = std::clamp(z, -1.0, 1.0);
        const real phi0 = golden_angle * i;
        const real phi = phi0 + (p[1] * std::cos(phi0) + p[2] * std::sin(phi0)) * z +
                         p[3] * std::cos(2.0 * phi0) + p[4] * std::sin(2.0 * phi0);
        const real r = std::sqrt(std::max(0.0, 1.0 - z * z));
        pts[i] = {r * std::cos(phi), r * std::sin(phi), z};
        pts[h + i] = -pts[i];
    }
    return pts;
}

// Solve the 5x5 Newton system moment_defect(build(p)) = 0. The raw lattice is
// already within ~1e-3, the adjustments stay below ~1e-2 and the iteration
// converges in a handful of steps; this is what lets a 256-point equal-weight
// set reproduce the I/3 projection identity to rounding.
std::array<real, 5> calibrate(int count) {
    std::array<real, 5> p{1.0, 0.0, 0.0, 0.0, 0.0};
    for (int iter = 0; iter < 40; ++iter) {
        const auto r0 = moment_defect(build_full_set(count, p));
        real worst = 0;
        for (real r : r0) worst = std::max(worst, std::abs(r));
        if (worst < 1e-15) break;

        // finite-difference Jacobian
        real J[5][5];
        const real h = 1e-7;
        for (int j = 0; j < 5; ++j) {
            auto pj = p;
            pj[j] += h;
            const auto rj = moment_defect(build_full_set(count, pj));
            for (int i = 0; i < 5; ++i) J[i][j] = (rj[i] - r0[i]) / h;
        }
        // Gaussian elimination with partial pivoting
        real A[5][6];
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) A[i][j] = J[i][j];
            A[i][5] = r0[i];
        }
        for (int c = 0; c < 5; ++c) {
            int piv = c;
            for (int r = c + 1; r < 5; ++r)
                if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
            std::swap_ranges(A[c], A[c] + 6, A[piv]);
            for (int r = 0; r < 5; ++r) {
                if (r == c || A[c][c] == 0.0) continue;
                const real f = A[r][c] / A[c][c];
                for (int j = c; j < 6; ++j) A[r][j] -= f * A[c][j];
            }
        }
        for (int i = 0; i < 5; ++i)
            if (A[i][i] != 0.0) p[i] -= A[i][5] / A[i][i];
    }
    return p;
}

DirectionSet from_points(std::vector<Vec3> pts, const std::string& name) {
    DirectionSet set;
    const real w = 1.0 / static_cast<real>(pts.size());
    set.w.assign(pts.size(), w);
    set.n = std::move(pts);
    set.name = name;
    return set;
}

}  // namespace

DirectionSet fibonacci_sphere(int count) {
    if (count < 8 || count % 2 != 0)
        throw ConfigError("fibonacci_sphere: count must be even and >= 8");
    const auto p = calibrate(count);
    return from_points(build_full_set(count, p), "fibonacci:" + std::to_string(count));
}

DirectionSet design_point_set(const std::string& name) {
    std::vector<Vec3> pts;
    if (name == "octahedron") {
        pts = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}};
    } else if (name == "cube") {
        const real s = 1.0 / std::sqrt(3.0);
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                for (int sz : {-1, 1}) pts.push_back({sx * s, sy * s, sz * s});
    } else if (name == "icosahedron") {
        const real g = (1.0 + std::sqrt(5.0)) / 2.0;
        const real s = 1.0 / std::sqrt(1.0 + g * g);
        for (int a : {-1, 1})
            for (int b : {-1, 1}) {
                pts.push_back({0, a * s, b * g * s});
                pts.push_back({a * s, b * g * s, 0});
                pts.push_back({b * g * s, 0, a * s});
            }
    } else if (name == "dodecahedron") {
        const real g = (1.0 + std::sqrt(5.0)) / 2.0;
        const real c = 1.0 / std::sqrt(3.0);
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                for (int sz : {-1, 1}) pts.push_back({sx * c, sy * c, sz * c});
        const real a = c / g, b = c * g;
        for (int s1 : {-1, 1})
            for (int s2 : {-1, 1}) {
                pts.push_back({0, s1 * a, s2 * b});
                pts.push_back({s1 * a, s2 * b, 0});
                pts.push_back({s2 * b, 0, s1 * a});
            }
    } else {
        throw ConfigError("unknown design point set '" + name +
                          "' (expected octahedron|cube|icosahedron|dodecahedron)");
    }
    // order so that the antipode of point i is point i + count/2
    std::vector<Vec3> ordered;
    std::vector<bool> used(pts.size(), false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (used[i]) continue;
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (used[j]) continue;
            if (norm(pts[i] + pts[j]) < 1e-12) {
                ordered.push_back(pts[i]);
                used[i] = used[j] = true;
                pts[j] = -pts[i];  // exact negation for the mirror half
                break;
            }
        }
    }
    std::vector<Vec3> full = ordered;
    for (const Vec3& v : ordered) full.push_back(-v);
    return from_points(std::move(full), name);
}

DirectionSet make_direction_set(const std::string& kind, int count) {
    if (kind == "fibonacci") return fibonacci_sphere(count);
    return design_point_set(kind);
}

real second_moment_error(const DirectionSet& set) {
    real m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (int i = 0; i < set.count(); ++i)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m[a][b] += set.w[i] * set.n[i][a] * set.n[i][b];
    real worst = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            worst = std::max(worst, std::abs(m[a][b] - (a == b ? 1.0 / 3.0 : 0.0)));
    return worst;
}

}  // namespace khm
