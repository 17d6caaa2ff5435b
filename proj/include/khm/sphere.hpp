#pragma once

#include <array>
#include <string>
#include <vector>

#include "khm/core.hpp"

namespace khm {

/// Quadrature points on the unit sphere with weights normalized to sum to 1,
/// approximating the normalized surface measure d(sigma)/(4*pi). All bundled
/// sets are exactly antipodally symmetric: point i + count/2 is the exact
/// negation of point i, so odd integrands cancel to rounding, matching the
/// parity of the exact integral.
struct DirectionSet {
    std::vector<Vec3> n;
    std::vector<real> w;
    std::string name;
    int count() const { return static_cast<int>(n.size()); }
};

/// Antipodally symmetric spherical Fibonacci set with equal weights. The base
/// half fills the upper hemisphere with golden-angle azimuths; exact antipodes
/// fill the lower. A small calibration pass (see sphere.cpp) nudges the base
/// colatitudes/azimuths so the discrete second moment equals I/3 to rounding.
/// count must be even and >= 6.
DirectionSet fibonacci_sphere(int count);

/// Exact small point sets (vertex orbits of the octahedron, cube, icosahedron,
/// dodecahedron). These integrate all polynomials up to their design strength
/// (3, 3, 5, 5) exactly, so second moments are exact by construction; useful
/// for high-precision identity checks at tiny point counts.
DirectionSet design_point_set(const std::string& name);

/// Resolve a config string: "fibonacci" uses `count`, otherwise a design name.
DirectionSet make_direction_set(const std::string& kind, int count);

/// Maximum componentwise deviation of sum_i w_i n_i (x) n_i from I/3.
real second_moment_error(const DirectionSet& set);

}  // namespace khm
