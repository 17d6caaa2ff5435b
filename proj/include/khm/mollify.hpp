#pragma once

#include <vector>

#include "khm/grid.hpp"
#include "khm/kernel.hpp"

namespace khm {

/// Which directional part of the smoothing integral to keep: the full kernel
/// average, the nhat nhat^T - weighted part, or the complement.
enum class SmoothPart { full, longitudinal, transverse };

/// Isotropic smoothing operators as spectral multipliers.
///
/// Full smoothing is diagonal: m0(|k|) = 4 pi int r^2 phi_eps(r) j0(kr) dr.
/// The longitudinal part (integrand weighted by nhat nhat^T) acts as
///   M_ij(k) = A(|k|) delta_ij + B(|k|) khat_i khat_j,
///   A = 4 pi int r^2 phi_eps j1(kr)/(kr) dr,
///   B = 4 pi int r^2 phi_eps (j0(kr) - 3 j1(kr)/(kr)) dr,
/// and the transverse part is full minus longitudinal. Scalar smoothing
/// against the split radial kernels phi_L, phi_T uses
///   m_X(|k|) = 4 pi int r^2 phi_X,eps(r) j0(kr) dr.
/// Tables are indexed by the integer squared wavenumber of the grid.
class Smoother {
  public:
    /// radial_nodes <= 0 picks a profile-dependent default (bump kernels need
    /// far fewer nodes than the wide truncated gaussian).
    Smoother(const Grid& g, const MollifierKernel& kernel, int radial_nodes = 0);

    real epsilon() const { return epsilon_; }
    int max_k2() const { return static_cast<int>(A_.size()) - 1; }

    void apply(const SpectralVector& in, SmoothPart part, SpectralVector& out) const;
    SpectralVector apply(const SpectralVector& in, SmoothPart part) const;

    void apply(const SpectralScalar& in, RadialPart part, SpectralScalar& out) const;
    SpectralScalar apply(const SpectralScalar& in, RadialPart part) const;

    real coef_A(int k2) const { return A_[k2]; }
    real coef_B(int k2) const { return B_[k2]; }
    real coef_full(int k2) const { return full_[k2]; }
    real coef_scalar(RadialPart part, int k2) const;

  private:
    const Grid* grid_;
    real epsilon_;
    std::vector<real> A_, B_, full_, scal_L_, scal_T_;
};

/// The claim that div of the nhat nhat^T - weighted smoothing of a scalar is
/// the gradient of its phi_L - smoothed value reduces, mode by mode, to
/// A(k) + B(k) = m_L(k). Returns the max absolute defect over the grid's
/// wavenumbers (zero in exact arithmetic).
real pressure_gradient_claim_residual(const Smoother& s);

/// Field-level form of the same claim: assembles div of the weighted tensor
/// smoothing of p and the gradient of its phi_L smoothing, and returns the
/// relative L2 difference.
real pressure_gradient_claim_residual(const Smoother& s, const SpectralScalar& p);

}  // namespace khm
