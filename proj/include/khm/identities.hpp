#pragma once

#include <array>
#include <string>

#include "khm/core.hpp"
#include "khm/grid.hpp"
#include "khm/kernel.hpp"
#include "khm/sphere.hpp"

/// Verification harness for the algebraic backbone of the scale-flux laws:
/// the projector-gradient contraction, the four smoothed projection-flux
/// identities, and the equivalent spectral forms of the Hall nonlinearity.
namespace khm {

struct IdentityReport {
    std::string identity_name;
    real lhs_norm = 0;
    real rhs_norm = 0;
    real residual = 0;
    std::string resolution;
};

/// Checks that the l-gradient of the alignment projector n (x) n, contracted
/// against three constant vectors as
///   [d/dl_k (n_i n_j) - (dn_i/dl_j + dn_j/dl_i) n_k] E_k F_i G_j,
/// collapses to (1/|l|) n . [G (E.F) + F (E.G) - 2 E (F.G)]. The left side is
/// evaluated as the explicit 27-term contraction, the right side in closed
/// form. Throws PreconditionError when l = 0.
IdentityReport check_projector_gradient(const Vec3& E, const Vec3& F, const Vec3& G,
                                        const Vec3& ell);

/// The four smoothed projection-flux identities. With delta X the two-point
/// increment, X_L / X_T the parts of the shifted field along / normal to
/// n = l/|l|, and (.)^eps the kernel-weighted l-average, each identity equates
///   integral{ grad phi^eps . dE (...) + (2/|l|) phi^eps n . (...) } dl
///     + div[ (E g)^eps - E g^eps ]
/// against divergence-commutator terms like E_j d_k[(E_k F_L_j)^eps -
/// E_k F_L_j^eps]; g is the projected product named below. They hold for
/// divergence-free E and arbitrary F.
enum class FluxIdentity {
    longitudinal_mixed,    // g = F_L . E_L
    longitudinal_squared,  // g = F_L . F_L
    transverse_mixed,      // g = F_T . E_T
    transverse_squared,    // g = F_T . F_T
};

std::string to_string(FluxIdentity which);

struct FluxIdentityResolution {
    const MollifierKernel* kernel = nullptr;
    const DirectionSet* directions = nullptr;
    int radial_nodes = 32;
    /// Residuals are sampled on a samples_per_axis^3 sublattice of x points.
    int samples_per_axis = 4;
};

/// Evaluates all four identities in a single sweep over the (radius,
/// direction) quadrature: both the increment integrals and every smoothed
/// product use the same nodes, so the reported residual tracks quadrature
/// refinement honestly. E must be divergence-free (PreconditionError
/// otherwise); both fields should be band-limited well inside the grid so
/// pointwise products are alias-free.
std::array<IdentityReport, 4> check_projection_flux_identities(const VectorField& E,
                                                               const VectorField& F,
                                                               const FluxIdentityResolution& res);

/// Single-identity convenience wrapper; runs the same sweep.
IdentityReport check_projection_flux_identity(FluxIdentity which, const VectorField& E,
                                              const VectorField& F,
                                              const FluxIdentityResolution& res);

/// Evaluates the Hall term three ways -- curl(J x b), the antisymmetric
/// tensor divergence div(b (x) J) - div(J (x) b), and curl applied to
/// div(b (x) b) -- and reports the worst pairwise relative difference in the
/// spectral L2 norm. b must be divergence-free and band-limited with every
/// |k_i| <= n/4 so the quadratic products are alias-free.
IdentityReport check_hall_rewrites(const VectorField& b);

}  // namespace khm
