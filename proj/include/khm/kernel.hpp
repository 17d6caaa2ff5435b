#pragma once

#include <string>
#include <vector>

#include "khm/core.hpp"

namespace khm {

/// One-dimensional quadrature rule for integrals over a radial interval.
/// Weights include the dr factor only; callers multiply in r^2, kernel values
/// and the 4*pi solid-angle factor as needed.
struct RadialRule {
    std::vector<real> r;
    std::vector<real> w;
    int size() const { return static_cast<int>(r.size()); }
};

/// Gauss-Legendre rule with `nodes` points on [a, b].
RadialRule gauss_legendre(int nodes, real a, real b);

/// Composite rule on [0, R] graded toward the origin through the map
/// r = R * t^grading. grading = 1 reduces to plain Gauss-Legendre. The grading
/// concentrates nodes near r = 0 where the transverse kernel part phi_T has an
/// integrable logarithmic singularity.
RadialRule graded_radial_rule(int nodes, real R, real grading);

enum class KernelProfile { bump, gaussian };

KernelProfile kernel_profile_from_string(const std::string& name);
std::string to_string(KernelProfile p);

/// Which member of the kernel split a scalar mollification uses.
enum class RadialPart { full, longitudinal, transverse };

/// Radial mollifier phi^eps(x) = eps^-3 phi(|x|/eps) with unit integral
/// 4*pi int r^2 phi(r) dr = 1.
///
/// Two profiles are bundled:
///   bump      phi(r) = C exp(-1/(1-r^2)) on [0,1), compactly supported,
///             C fixed numerically at construction;
///   gaussian  phi(r) = (2*pi)^(-3/2) exp(-r^2/2), truncated for quadrature at
///             r = 9 where the relative tail is below 1e-16.
///
/// The split phi = phi_L + phi_T with phi_T(r) = 2 int_r^inf phi(s)/s ds is
/// exposed for the pressure-gradient identity; phi_T is evaluated by an
/// internal Gauss rule on demand.
class MollifierKernel {
  public:
    MollifierKernel(KernelProfile profile, real epsilon);

    KernelProfile profile() const { return profile_; }
    real epsilon() const { return eps_; }

    /// Support radius of the unscaled profile (1 for bump, 9 for the truncated
    /// gaussian). The scaled kernel vanishes (to rounding) beyond
    /// epsilon * support_radius().
    real support_radius() const { return support_; }

    /// Check the kernel against a grid spacing: quadrature over the kernel is
    /// meaningful only when eps >= 2 * spacing. Throws ConfigError otherwise.
    void require_resolvable(real grid_spacing) const;

    // unscaled profile and derivative
    real phi(real r) const;
    real dphi(real r) const;
    real phi_T(real r) const;
    real phi_L(real r) const { return phi(r) - phi_T(r); }

    // scaled versions: phi_eps(r) = eps^-3 phi(r/eps), d/dr phi_eps = eps^-4 phi'(r/eps)
    real phi_eps(real r) const { return phi(r / eps_) / (eps_ * eps_ * eps_); }
    real dphi_eps(real r) const { return dphi(r / eps_) / (eps_ * eps_ * eps_ * eps_); }
    real phi_T_eps(real r) const { return phi_T(r / eps_) / (eps_ * eps_ * eps_); }
    real phi_L_eps(real r) const { return phi_L(r / eps_) / (eps_ * eps_ * eps_); }
    real part_eps(RadialPart part, real r) const;

  private:
    KernelProfile profile_;
    real eps_;
    real support_;
    real bump_norm_ = 0;      // C in the bump profile
    RadialRule tail_rule_;    // reference rule for the phi_T tail integral
};

/// Moments of the unscaled profile, all computed with `nodes`-point rules:
///   m2       = 4*pi int r^2 phi dr          (should be 1)
///   m3_dphi  = 4*pi int r^3 phi' dr         (should be -3)
///   m2_T     = 4*pi int r^2 phi_T dr        (should be 2/3)
struct KernelMoments {
    real m2;
    real m3_dphi;
    real m2_T;
};
KernelMoments kernel_moments(const MollifierKernel& k, int nodes = 256);

}  // namespace khm
