#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "khm/core.hpp"
#include "khm/field_io.hpp"
#include "khm/grid.hpp"

/// Pseudo-spectral integration of the electron-MHD induction equation and the
/// incompressible Hall-MHD system on the periodic box, with optional
/// Laplacian dissipation and a ledger of the quadratic invariants.
namespace khm {

enum class SolverModel { emhd, hallmhd };

SolverModel solver_model_from_string(const std::string& name);
std::string to_string(SolverModel m);

/// Spectral state of a run. `u` is kept zero and ignored for EMHD. Fields stay
/// divergence-free and band-limited to the dealiased shell by construction.
struct SolverState {
    SolverModel model = SolverModel::emhd;
    real t = 0;
    real d_i = 1;   // ion inertial length, the Hall coefficient
    real nu = 0;    // viscosity (hallmhd only)
    real eta = 0;   // resistivity
    SpectralVector u;
    SpectralVector b;
};

/// -d_i curl(J x b) + eta lap(b) with J = curl b; the quadratic product is
/// formed pointwise and dealiased. Output is solenoidal by construction.
SpectralVector rhs_emhd(Transformer& t, const SpectralVector& b, real d_i, real eta);

/// du = P[u x omega + J x b] + nu lap(u),  db = curl(u x b - d_i J x b) +
/// eta lap(b), with P the Leray projection; both products dealiased.
std::pair<SpectralVector, SpectralVector> rhs_hallmhd(Transformer& t, const SpectralVector& u,
                                                      const SpectralVector& b, real d_i, real nu,
                                                      real eta);

/// Convenience wrappers over real-space fields (transform, dealias, evaluate).
VectorField rhs_emhd(const VectorField& b, real d_i, real eta);
std::pair<VectorField, VectorField> rhs_hallmhd(const VectorField& u, const VectorField& b,
                                                real d_i, real nu, real eta);

struct StepControls {
    /// Fraction of the explicit stability envelope the step may use.
    real cfl_safety = 0.8;
    bool check_cfl = true;
};

/// Largest stable time step for the current state: safety * 2.8 / rate, where
/// rate sums the whistler (d_i |k|max^2 max|b|), advective/Alfven
/// (|k|max (max|u| + max|b|), hallmhd only) and diffusive (max(nu,eta)
/// |k|max^2) frequencies.
real cfl_dt_limit(Transformer& t, const SolverState& s, real safety);

/// One classical RK4 step. Refuses (PreconditionError) when dt exceeds the
/// CFL bound, and aborts with the offending time when the state stops being
/// finite.
SolverState step_rk4(Transformer& t, const SolverState& s, real dt,
                     const StepControls& controls = {});

/// One invariant-ledger row. E, H_M, H_G, H_C are volume integrals; the
/// dissipation rates are volume means (eps_E = eta <|J|^2> + nu <|grad u|^2>).
struct LedgerRow {
    real t = 0;
    real E = 0;      // int (|u|^2 + |b|^2)/2
    real H_M = 0;    // int A.b, A = inverse curl of b
    real H_G = 0;    // int (A+u).(b+omega)
    real H_C = 0;    // int u.b
    real eps_E = 0;
    // diagnostics (second CSV): helicity dissipation rates and health checks
    real eps_M = 0;  // 2 eta <J.b>
    real eps_C = 0;  // (nu+eta) <J.omega>
    real eps_H = 0;  // resistive/viscous part of -d/dt <(A+u).(b+omega)>
    real div_defect_b = 0;
    real div_defect_u = 0;
    real max_b = 0;
    real max_u = 0;
};

LedgerRow measure_invariants(Transformer& t, const SolverState& s);

struct InvariantLedger {
    std::vector<LedgerRow> rows;
};

/// Columns: t,E,H_M,H_G,H_C,eps_E.
void write_ledger_csv(std::ostream& out, const InvariantLedger& ledger);
/// Columns: t,eps_M,eps_C,eps_H,div_defect_b,div_defect_u,max_b,max_u.
void write_ledger_diagnostics_csv(std::ostream& out, const InvariantLedger& ledger);

/// Parses a main ledger CSV back into rows; the diagnostics columns stay
/// zero. Throws ConfigError on an unexpected header or a malformed row.
InvariantLedger read_ledger_csv(std::istream& in);
/// Parses a diagnostics CSV and fills those columns of an existing ledger.
/// Row count and times must match the rows already present.
void merge_ledger_diagnostics_csv(std::istream& in, InvariantLedger& ledger);

struct RunOptions {
    real dt = 1e-3;
    real t_end = 1.0;
    int ledger_stride = 10;          // steps between ledger rows (ends always logged)
    real snapshot_interval = 0;      // simulation-time spacing; 0 = final state only
    std::function<void(const SolverState&)> on_snapshot;
    StepControls controls;
};

struct RunResult {
    SolverState final_state;
    InvariantLedger ledger;
    int steps = 0;
};

/// Integrates to t_end, logging invariants and emitting snapshots through the
/// callback (including the initial and final states when snapshots are on).
RunResult run(Transformer& t, SolverState state, const RunOptions& opt);

/// Seeded initial conditions; all outputs mean-free, solenoidal, dealiased.
///   abc             curl eigenfield (A=B=C=1) scaled to `amplitude`, u = 0
///   random_lowk     independent Gaussian solenoidal modes on 0 < |k| <= kmax,
///                   b and (hallmhd) u each normalized to rms = amplitude
///   orszag_tang_3d  the three-dimensional Orszag-Tang vortex, scaled
/// Unknown kinds raise ConfigError.
struct InitialCondition {
    SpectralVector u;
    SpectralVector b;
};
InitialCondition make_initial_condition(const Grid& g, const std::string& kind,
                                        std::uint64_t seed, int kmax, real amplitude,
                                        SolverModel model);

/// Snapshot bridge: fields "b" (and "u" for hallmhd) plus params hallmhd,
/// d_i, nu, eta.
Snapshot make_snapshot(Transformer& t, const SolverState& s);
SolverState state_from_snapshot(const Snapshot& snap);

}  // namespace khm
