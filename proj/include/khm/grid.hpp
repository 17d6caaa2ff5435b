#pragma once

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "khm/core.hpp"

namespace khm {

/// Uniform periodic grid on [0, 2*pi)^3 with n points per axis (n even, >= 8).
/// Real-space storage is x-fastest: index = ix + n*(iy + n*iz).
class Grid {
  public:
    explicit Grid(int n);

    int n() const { return n_; }
    real spacing() const { return spacing_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
    real volume() const { return box_length * box_length * box_length; }

    /// Retained band under the 2/3 rule: modes with every |k_i| <= dealias_kmax().
    /// 3*kmax < n strictly, so alias images of quadratic products of retained
    /// modes always land outside the retained band.
    int dealias_kmax() const { return (n_ - 1) / 3; }

    std::size_t index(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) + static_cast<std::size_t>(n_) * (iy + static_cast<std::size_t>(n_) * iz);
    }
    Vec3 point(int ix, int iy, int iz) const {
        return {spacing_ * ix, spacing_ * iy, spacing_ * iz};
    }

    // spectral (r2c) layout: kx in [0, n/2] reduced, ky/kz full with negative
    // frequencies stored at iy >= n/2+1 as ky = iy - n
    int n_half() const { return n_ / 2 + 1; }
    std::size_t spectral_size() const {
        return static_cast<std::size_t>(n_half()) * n_ * n_;
    }
    std::size_t spectral_index(int ikx, int iy, int iz) const {
        return static_cast<std::size_t>(ikx) +
               static_cast<std::size_t>(n_half()) * (iy + static_cast<std::size_t>(n_) * iz);
    }
    int freq(int i) const { return i <= n_ / 2 ? i : i - n_; }

    bool operator==(const Grid& o) const { return n_ == o.n_; }

  private:
    int n_;
    real spacing_;
};

using complexr = std::complex<real>;

struct ScalarField {
    const Grid* grid = nullptr;
    std::vector<real> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(&g), v(g.size(), 0.0) {}
    real& operator[](std::size_t i) { return v[i]; }
    real operator[](std::size_t i) const { return v[i]; }
};

struct VectorField {
    const Grid* grid = nullptr;
    std::array<std::vector<real>, 3> c;

    VectorField() = default;
    explicit VectorField(const Grid& g) : grid(&g) {
        for (auto& comp : c) comp.assign(g.size(), 0.0);
    }
    Vec3 at(std::size_t i) const { return {c[0][i], c[1][i], c[2][i]}; }
    void set(std::size_t i, const Vec3& v) {
        c[0][i] = v.x;
        c[1][i] = v.y;
        c[2][i] = v.z;
    }
};

struct SpectralScalar {
    const Grid* grid = nullptr;
    std::vector<complexr> v;

    SpectralScalar() = default;
    explicit SpectralScalar(const Grid& g) : grid(&g), v(g.spectral_size(), complexr{0, 0}) {}
};

struct SpectralVector {
    const Grid* grid = nullptr;
    std::array<std::vector<complexr>, 3> c;

    SpectralVector() = default;
    explicit SpectralVector(const Grid& g) : grid(&g) {
        for (auto& comp : c) comp.assign(g.spectral_size(), complexr{0, 0});
    }
};

/// FFT engine bound to one grid. Forward transforms divide by n^3 so spectral
/// values are Fourier amplitudes: f(x) = sum_k fhat_k exp(i k.x). Instances
/// hold FFTW plans plus scratch buffers and are not thread-safe; use one
/// instance per thread.
class Transformer {
  public:
    explicit Transformer(const Grid& g);
    ~Transformer();
    Transformer(const Transformer&) = delete;
    Transformer& operator=(const Transformer&) = delete;

    const Grid& grid() const { return *grid_; }

    SpectralScalar forward(const ScalarField& f);
    ScalarField inverse(const SpectralScalar& s);
    SpectralVector forward(const VectorField& f);
    VectorField inverse(const SpectralVector& s);

    /// inverse transform into a caller-provided field (avoids allocation in hot loops)
    void inverse_into(const SpectralScalar& s, ScalarField& out);
    void inverse_into(const SpectralVector& s, VectorField& out);

    /// Real field of the shifted input, component values F(x + ell), for
    /// arbitrary real ell: multiplies spectra by exp(i k.ell) and inverts.
    void shifted_into(const SpectralVector& s, const Vec3& ell, VectorField& out);
    void shifted_into(const SpectralScalar& s, const Vec3& ell, ScalarField& out);

  private:
    struct Impl;
    const Grid* grid_;
    std::unique_ptr<Impl> impl_;
};

// ---- spectral operators ----------------------------------------------------

SpectralVector curl(const SpectralVector& f);
SpectralScalar divergence(const SpectralVector& f);
SpectralVector gradient(const SpectralScalar& f);

/// Leray projection onto divergence-free fields: fhat - khat (khat . fhat).
void leray_project(SpectralVector& f);

/// Zero every mode with any |k_i| > dealias_kmax() (the 2/3 rule).
void dealias(SpectralVector& f);
void dealias(SpectralScalar& f);

/// Solve curl A = f for the mean-free, divergence-free potential A
/// (Coulomb gauge): Ahat = i k x fhat / |k|^2. The input must be mean-free and
/// divergence-free to `tol` relative; violations raise PreconditionError
/// naming the offending norm.
SpectralVector inverse_curl(const SpectralVector& f, real tol = 1e-8);

/// Solve laplace(p) = s with zero mean.
SpectralScalar poisson_solve(const SpectralScalar& s);

/// Multiply by exp(i k . ell) in place: the spectrum of x -> F(x + ell).
void phase_shift(SpectralVector& f, const Vec3& ell);
void phase_shift(SpectralScalar& f, const Vec3& ell);

/// max_k |k . fhat_k| / max(|fhat|): relative solenoidality defect.
real divergence_defect(const SpectralVector& f);

/// Volume mean of the pointwise dot product of two real fields.
real mean_dot(const VectorField& a, const VectorField& b);
real mean(const ScalarField& a);

/// Spectral sums (Parseval): mean |f|^2 = sum_k |fhat_k|^2 over the full
/// (Hermitian-expanded) lattice.
real spectral_mean_square(const SpectralVector& f);
/// mean of a.b from spectra.
real spectral_mean_dot(const SpectralVector& a, const SpectralVector& b);
/// mean of |grad f|^2 from the spectrum.
real spectral_mean_grad_square(const SpectralVector& f);

}  // namespace khm
