#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "khm/core.hpp"
#include "khm/grid.hpp"
#include "khm/sphere.hpp"

/// Two-point increments delta E(x; l) = E(x+l) - E(x), their longitudinal and
/// transverse parts against n = l/|l|, and the (1/lambda) shell average that
/// every structure-function estimator is built from. Shifted copies E(x+l)
/// come from spectral phase shifts, so separations are arbitrary reals, not
/// lattice offsets.
namespace khm {

/// Throws PreconditionError unless |n| = 1 to 1e-12.
void require_unit_direction(const Vec3& nhat);

/// (n (x) n) v, the component along the separation direction.
inline Vec3 longitudinal_part(const Vec3& v, const Vec3& nhat) {
    return dot(v, nhat) * nhat;
}

/// (1 - n (x) n) v, the component in the plane normal to the separation.
inline Vec3 transverse_part(const Vec3& v, const Vec3& nhat) {
    return v - dot(v, nhat) * nhat;
}

/// delta E(x) = E(x+l) - E(x) on the grid, with the shifted copy rendered by
/// an exact phase shift of `spec`.
VectorField increment(Transformer& t, const SpectralVector& spec, const Vec3& ell);

/// Pointwise (n (x) n) applied to a whole field. Validates the direction.
VectorField project_longitudinal(const VectorField& f, const Vec3& nhat);
/// Pointwise (1 - n (x) n) applied to a whole field. Validates the direction.
VectorField project_transverse(const VectorField& f, const Vec3& nhat);

/// Holds the spectra of the fields an estimator needs and renders them all at
/// x + l on demand, so per-direction loops are three inverse transforms per
/// registered field and nothing else.
class ShiftedFieldBank {
  public:
    explicit ShiftedFieldBank(const Grid& g);

    /// Registers a spectrum; returns its slot. The base (unshifted) rendering
    /// is produced immediately.
    int add(const SpectralVector& spec);

    const Grid& grid() const { return *grid_; }
    int count() const { return static_cast<int>(spectra_.size()); }

    const VectorField& base(int slot) const { return base_[slot]; }

    /// Renders every registered field at x + l into the shifted() slots.
    void shift_all(const Vec3& ell);
    const VectorField& shifted(int slot) const { return shifted_[slot]; }

  private:
    const Grid* grid_;
    Transformer transformer_;
    std::vector<SpectralVector> spectra_;
    std::vector<VectorField> base_;
    std::vector<VectorField> shifted_;
};

/// Per-direction work for shell_average: `prepare` runs once per direction
/// with the unit vector and the full separation lambda*n (shift fields here);
/// `eval` then returns the pointwise scalar at grid index i.
struct ShellIntegrand {
    std::function<void(const Vec3& nhat, const Vec3& ell)> prepare;
    std::function<real(std::size_t i, const Vec3& nhat)> eval;
};

/// (1/lambda) sum_d w_d * mean_x integrand(x, n_d) with separation lambda*n_d.
/// The x-mean runs over every grid point unless stride > 1 (a speed knob that
/// acceptance-grade estimates never use). Throws ConfigError when lambda is
/// below the grid spacing.
real shell_average(const ShellIntegrand& f, real lambda, const DirectionSet& dirs,
                   const Grid& g, int stride = 1);

/// Strictly increasing separations, each >= grid spacing and <= box_length/4.
struct SeparationScan {
    std::vector<real> lambdas;
};

/// Geometric ladder of `count` separations from lambda_min to lambda_max
/// inclusive. Validates the SeparationScan invariants against `g`.
SeparationScan log_spaced_scan(real lambda_min, real lambda_max, int count, const Grid& g);

/// One shell-average result, as streamed to CSV.
struct ShellSample {
    real lambda = 0;
    int direction_count = 0;
    real value = 0;
    std::string estimator_name;
};

/// Header "lambda,direction_count,value,estimator_name" plus one row per
/// sample, full double precision.
void write_shell_csv(std::ostream& out, const std::vector<ShellSample>& samples);

}  // namespace khm
