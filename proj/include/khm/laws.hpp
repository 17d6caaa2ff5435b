#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "khm/core.hpp"
#include "khm/field_io.hpp"
#include "khm/grid.hpp"
#include "khm/increments.hpp"
#include "khm/kernel.hpp"
#include "khm/sphere.hpp"

/// Third-order shell functionals (the S family), smoothed dissipation
/// functionals (the D family), the space-integrated two-point balance
/// auditor, the radial-moment constant verifier, and the separation scan
/// that compares compensated S values against measured dissipation.
namespace khm {

/// Every shell functional evaluated at one separation for one snapshot.
/// S_EL and S_ET are the assembled combinations
///   S_EL = S_EL_bar - (2/5) S_E_bar,   S_ET = S_ET_bar + (2/5) S_E_bar,
/// so S_EL + S_ET always equals S_EL_bar + S_ET_bar. For Hall runs the
/// assembled values additionally carry the velocity and mixed blocks.
struct LawScanRecord {
    real lambda = 0;
    real S_EL = 0;
    real S_ET = 0;
    real S_E_bar = 0;
    real S_EL_bar = 0;
    real S_ET_bar = 0;
    real S_ML = 0;
    real S_MT = 0;
    real S_HL = 0;
    std::string model;
    real t = 0;
};

/// Space-averaged dissipation functionals at a single kernel scale.
/// eps_E_measured is filled by callers that hold a run ledger; the
/// quadrature itself cannot know it.
struct DissipationEstimate {
    real epsilon_kernel = 0;
    real D_EL = 0;
    real D_ET = 0;
    real D_ML = 0;
    real D_MT = 0;
    real eps_E_measured = 0;
};

/// Direction quadrature plus the ion inertial length for the shell
/// estimators. d_i multiplies exactly the magnetic blocks that carry it in
/// the functional definitions; the velocity and mixed Hall blocks do not.
struct ShellQuad {
    const DirectionSet* directions = nullptr;
    real d_i = 1.0;
};

/// All shell functionals of one state at one separation. Velocity blocks and
/// S_HL are zero when no velocity spectrum is supplied (u = nullptr).
struct ShellFunctionals {
    real S_EL = 0;
    real S_ET = 0;
    real S_E_bar = 0;
    real S_EL_bar = 0;
    real S_ET_bar = 0;
    real S_ML = 0;
    real S_MT = 0;
    real S_HL = 0;
};

/// One-pass evaluation of every functional: per direction the registered
/// spectra are rendered at x + lambda*n and a single sweep accumulates all
/// cubic integrands. Throws ConfigError when lambda is below the grid
/// spacing. J is derived as curl(b); omega as curl(u).
ShellFunctionals shell_functionals(const SpectralVector& b, const SpectralVector* u,
                                   real lambda, const ShellQuad& quad);

// Single-functional wrappers over the same engine, taking real-space fields.
// J (resp. omega) must be the curl of b (resp. u); it is used as given.
real s_el_energy(const VectorField& b, const VectorField& J, real lambda, const ShellQuad& quad);
real s_et_energy(const VectorField& b, const VectorField& J, real lambda, const ShellQuad& quad);
real s_e_bar(const VectorField& b, const VectorField& J, real lambda, const ShellQuad& quad);
std::pair<real, real> s_energy_hallmhd(const VectorField& u, const VectorField& b, real lambda,
                                       const ShellQuad& quad);
real s_ml(const VectorField& b, real lambda, const ShellQuad& quad);
real s_mt(const VectorField& b, real lambda, const ShellQuad& quad);
real s_hl_generalized(const VectorField& u, const VectorField& omega, const VectorField& b,
                      real lambda, const ShellQuad& quad);

/// Quadrature for the volume ell-integrals behind the D functionals: radial
/// Gauss-Legendre on [0, support] times a direction set.
struct DissipationQuad {
    const MollifierKernel* kernel = nullptr;
    const DirectionSet* directions = nullptr;
    int radial_nodes = 32;
    real d_i = 1.0;
};

/// All four D functionals of (b, J = curl b) at the kernel scale. J is used
/// as given. Throws ConfigError when the kernel is not resolvable on the
/// grid or the quadrature is degenerate.
DissipationEstimate d_energy(const VectorField& b, const VectorField& J,
                             const DissipationQuad& quad);

/// The two pure-b helicity functionals only (D_EL and D_ET stay zero).
DissipationEstimate d_magnetic(const VectorField& b, const DissipationQuad& quad);

/// The four space-integrated two-point balances. On the periodic box every
/// flux divergence integrates to zero, which leaves
///   energy-L:    d/dt <u_L^e . u + b_L^e . b>                  = -(2/3) <D_EL>
///   energy-T:    d/dt <u_T^e . u + b_T^e . b>                  = -(4/3) <D_ET>
///   helicity-L:  d/dt <A_L^e . b + A . b_L^e> - cross_L        = -(4/3) <D_ML>
///   helicity-T:  d/dt <A_T^e . b + A . b_T^e> - cross_T        = -(8/3) <D_MT>
/// with, writing E = u x b,
///   cross_L = <E_L^e . b> + <E . b_L^e> + <curl(A_L^e) . E> + <A . (curl E)_L^e>
/// where the last two collapse to phi/r-weighted shell integrals (the
/// longitudinal projector does not commute with the curl), and
///   cross_L + cross_T = 2<E^e . b> + 2<E . b^e>.
/// The velocity and cross terms vanish identically for runs without a
/// velocity field. Energy balances are exact for runs without velocity; on
/// Hall runs only the helicity pair is a closed balance.
enum class KhmBalance {
    energy_longitudinal,
    energy_transverse,
    helicity_longitudinal,
    helicity_transverse,
};

/// Accepts "energy-L", "energy-T", "helicity-L", "helicity-T".
KhmBalance khm_balance_from_string(const std::string& name);
std::string to_string(KhmBalance which);

struct AuditOptions {
    const MollifierKernel* kernel = nullptr;
    const DirectionSet* directions = nullptr;
    int radial_nodes = 24;
    /// Multiplies the stated balance factor; 1.0 audits the balance as
    /// written, anything else exists to prove the audit is sensitive to it.
    real factor_scale = 1.0;
};

struct AuditReport {
    KhmBalance balance = KhmBalance::energy_longitudinal;
    real lhs = 0;
    real rhs = 0;
    real residual = 0;  // |lhs - rhs| / max(|lhs|, |rhs|, floor)
    real floor = 0;
    std::string resolution;
};

/// Audits one balance between two snapshots of the same inviscid run: the
/// time derivative is the centered difference across the pair, the right
/// side the trapezoid average of the D functional. Snapshots with nonzero
/// nu or eta are refused (PreconditionError); the balances hold as stated
/// only without diffusion.
AuditReport audit_khm(const Snapshot& first, const Snapshot& second, KhmBalance which,
                      const AuditOptions& opt);

/// All four balances from one pass over each snapshot.
std::array<AuditReport, 4> audit_khm_all(const Snapshot& first, const Snapshot& second,
                                         const AuditOptions& opt);

/// Radial moments of the kernel profile and the constant combinations they
/// assemble. For any admissible profile the exact values are
///   m2 = 1, m3_dphi = -3, transverse_route = -15/8,
///   longitudinal_route = -9/4, eliminated = -5/4, mixed_weight = -2/5,
/// so worst_deviation is pure quadrature error.
struct CoareaConstants {
    real m2 = 0;
    real m3_dphi = 0;
    real transverse_route = 0;    // (3/8)(m3_dphi - 2 m2)
    real longitudinal_route = 0;  // (3/4) m3_dphi
    real eliminated = 0;          // longitudinal route after removing the transverse block
    real mixed_weight = 0;        // recovered S_E_bar weight in the assembled functional
    real worst_deviation = 0;
};

CoareaConstants verify_coarea_constants(const MollifierKernel& kernel, int radial_nodes = 256);

/// Acceptance window for the compensated longitudinal ratio.
struct PlateauWindow {
    real ratio_min = 0.5;
    real ratio_max = 2.0;
};

/// Compensated-ratio summary of a scan. ratio_EL = -(5/4) S_EL / eps_E,
/// ratio_ET = -(15/8) S_ET / eps_E, ratio_ML = -(5/4) S_ML / eps_M, with S
/// values time-averaged across the scanned snapshots. When the measured
/// dissipation is zero (inviscid reference runs) the ratios fall back to the
/// uncompensated values and `compensated` is false.
struct PlateauReport {
    bool compensated = false;
    bool has_plateau = false;
    real lambda_lo = 0;
    real lambda_hi = 0;
    real decades = 0;  // log10(lambda_hi / lambda_lo)
    real transverse_agreement = 0;  // max over the band of |ratio_ET/ratio_EL - 1|
    real eps_E = 0;
    real eps_M = 0;
    std::vector<real> lambda;
    std::vector<real> ratio_EL;
    std::vector<real> ratio_ET;
    std::vector<real> ratio_ML;
};

struct ScanOptions {
    const DirectionSet* directions = nullptr;
    PlateauWindow window;
    real eps_E = 0;
    real eps_M = 0;
};

struct LawScan {
    std::vector<LawScanRecord> records;
    std::vector<real> excluded_lambdas;  // outside [spacing, box/4], logged not scanned
    PlateauReport plateau;
};

/// Evaluates every shell functional for each snapshot at each usable
/// separation and summarizes the compensated ratios. Model, d_i and the
/// velocity field come from each snapshot. Throws ConfigError when nothing
/// is scannable (no snapshots or no usable separation).
LawScan scan_laws(const std::vector<const Snapshot*>& snapshots, const SeparationScan& scan,
                  const ScanOptions& opt);

/// Header "t,model,lambda,S_EL,S_ET,S_E_bar,S_EL_bar,S_ET_bar,S_ML,S_MT,S_HL"
/// plus one row per record, full double precision.
void write_law_scan_csv(std::ostream& out, const std::vector<LawScanRecord>& records);

}  // namespace khm
