#include "khm/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace khm {

Grid::Grid(int n) : n_(n), spacing_(box_length / n) {
    if (n < 8 || n % 2 != 0)
        throw ConfigError("grid.n must be even and >= 8, got " + std::to_string(n));
}

// ---- Transformer ------------------------------------------------------------

struct Transformer::Impl {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    std::vector<real> rbuf;
    std::vector<complexr> cbuf;
};

Transformer::Transformer(const Grid& g) : grid_(&g), impl_(new Impl) {
    const int n = g.n();
    impl_->rbuf.assign(g.size(), 0.0);
    impl_->cbuf.assign(g.spectral_size(), complexr{0, 0});
    // dims (z, y, x): x is the fastest (reduced) axis
    impl_->r2c = fftw_plan_dft_r2c_3d(n, n, n, impl_->rbuf.data(),
                                      reinterpret_cast<fftw_complex*>(impl_->cbuf.data()),
                                      FFTW_ESTIMATE);
    impl_->c2r = fftw_plan_dft_c2r_3d(n, n, n,
                                      reinterpret_cast<fftw_complex*>(impl_->cbuf.data()),
                                      impl_->rbuf.data(), FFTW_ESTIMATE);
}

Transformer::~Transformer() {
    fftw_destroy_plan(impl_->r2c);
    fftw_destroy_plan(impl_->c2r);
}

SpectralScalar Transformer::forward(const ScalarField& f) {
    SpectralScalar out(*grid_);
    std::copy(f.v.begin(), f.v.end(), impl_->rbuf.begin());
    fftw_execute_dft_r2c(impl_->r2c, impl_->rbuf.data(),
                         reinterpret_cast<fftw_complex*>(out.v.data()));
    const real scale = 1.0 / static_cast<real>(grid_->size());
    for (auto& z : out.v) z *= scale;
    return out;
}

ScalarField Transformer::inverse(const SpectralScalar& s) {
    ScalarField out(*grid_);
    inverse_into(s, out);
    return out;
}

void Transformer::inverse_into(const SpectralScalar& s, ScalarField& out) {
    if (out.grid != grid_) out = ScalarField(*grid_);
    std::copy(s.v.begin(), s.v.end(), impl_->cbuf.begin());  // c2r destroys its input
    fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(impl_->cbuf.data()),
                         out.v.data());
}

SpectralVector Transformer::forward(const VectorField& f) {
    SpectralVector out(*grid_);
    const real scale = 1.0 / static_cast<real>(grid_->size());
    for (int a = 0; a < 3; ++a) {
        std::copy(f.c[a].begin(), f.c[a].end(), impl_->rbuf.begin());
        fftw_execute_dft_r2c(impl_->r2c, impl_->rbuf.data(),
                             reinterpret_cast<fftw_complex*>(out.c[a].data()));
        for (auto& z : out.c[a]) z *= scale;
    }
    return out;
}

VectorField Transformer::inverse(const SpectralVector& s) {
    VectorField out(*grid_);
    inverse_into(s, out);
    return out;
}

void Transformer::inverse_into(const SpectralVector& s, VectorField& out) {
    if (out.grid != grid_) out = VectorField(*grid_);
    for (int a = 0; a < 3; ++a) {
        std::copy(s.c[a].begin(), s.c[a].end(), impl_->cbuf.begin());
        fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(impl_->cbuf.data()),
                             out.c[a].data());
    }
}

void Transformer::shifted_into(const SpectralVector& s, const Vec3& ell, VectorField& out) {
    SpectralVector tmp = s;
    phase_shift(tmp, ell);
    inverse_into(tmp, out);
}

void Transformer::shifted_into(const SpectralScalar& s, const Vec3& ell, ScalarField& out) {
    SpectralScalar tmp = s;
    phase_shift(tmp, ell);
    inverse_into(tmp, out);
}

// ---- operators --------------------------------------------------------------

namespace {

// Wavenumber used by derivative multipliers. The Nyquist plane is mapped to
// zero: an odd derivative of the Nyquist cosine is not representable on the
// grid, and every dealiased field has that plane empty anyway.
inline real deriv_freq(const Grid& g, int i) {
    const int f = g.freq(i);
    return std::abs(f) == g.n() / 2 ? 0.0 : static_cast<real>(f);
}

template <typename F>
void for_each_mode(const Grid& g, F&& fn) {
    const int n = g.n(), nh = g.n_half();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ikx = 0; ikx < nh; ++ikx, ++idx) fn(idx, ikx, iy, iz);
}

}  // namespace

SpectralVector curl(const SpectralVector& f) {
    const Grid& g = *f.grid;
    SpectralVector out(g);
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const real kx = deriv_freq(g, ikx), ky = deriv_freq(g, iy), kz = deriv_freq(g, iz);
        const complexr fx = f.c[0][i], fy = f.c[1][i], fz = f.c[2][i];
        const complexr I{0, 1};
        out.c[0][i] = I * (ky * fz - kz * fy);
        out.c[1][i] = I * (kz * fx - kx * fz);
        out.c[2][i] = I * (kx * fy - ky * fx);
    });
    return out;
}

SpectralScalar divergence(const SpectralVector& f) {
    const Grid& g = *f.grid;
    SpectralScalar out(g);
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const real kx = deriv_freq(g, ikx), ky = deriv_freq(g, iy), kz = deriv_freq(g, iz);
        out.v[i] = complexr{0, 1} * (kx * f.c[0][i] + ky * f.c[1][i] + kz * f.c[2][i]);
    });
    return out;
}

SpectralVector gradient(const SpectralScalar& f) {
    const Grid& g = *f.grid;
    SpectralVector out(g);
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const complexr I{0, 1};
        out.c[0][i] = I * deriv_freq(g, ikx) * f.v[i];
        out.c[1][i] = I * deriv_freq(g, iy) * f.v[i];
        out.c[2][i] = I * deriv_freq(g, iz) * f.v[i];
    });
    return out;
}

void leray_project(SpectralVector& f) {
    const Grid& g = *f.grid;
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const real kx = deriv_freq(g, ikx), ky = deriv_freq(g, iy), kz = deriv_freq(g, iz);
        const real k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0) return;
        const complexr kf = (kx * f.c[0][i] + ky * f.c[1][i] + kz * f.c[2][i]) / k2;
        f.c[0][i] -= kx * kf;
        f.c[1][i] -= ky * kf;
        f.c[2][i] -= kz * kf;
    });
}

namespace {
inline bool outside_shell(const Grid& g, int ikx, int iy, int iz) {
    const int kmax = g.dealias_kmax();
    return std::abs(g.freq(ikx)) > kmax || std::abs(g.freq(iy)) > kmax ||
           std::abs(g.freq(iz)) > kmax;
}
}  // namespace

void dealias(SpectralVector& f) {
    const Grid& g = *f.grid;
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        if (outside_shell(g, ikx, iy, iz))
            for (int a = 0; a < 3; ++a) f.c[a][i] = complexr{0, 0};
    });
}

void dealias(SpectralScalar& f) {
    const Grid& g = *f.grid;
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        if (outside_shell(g, ikx, iy, iz)) f.v[i] = complexr{0, 0};
    });
}

real divergence_defect(const SpectralVector& f) {
    const Grid& g = *f.grid;
    real worst = 0, amp = 0;
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const real kx = deriv_freq(g, ikx), ky = deriv_freq(g, iy), kz = deriv_freq(g, iz);
        const complexr kf = kx * f.c[0][i] + ky * f.c[1][i] + kz * f.c[2][i];
        const real kn = std::sqrt(kx * kx + ky * ky + kz * kz);
        if (kn > 0) worst = std::max(worst, std::abs(kf) / kn);
        for (int a = 0; a < 3; ++a) amp = std::max(amp, std::abs(f.c[a][i]));
    });
    return amp > 0 ? worst / amp : 0.0;
}

SpectralVector inverse_curl(const SpectralVector& f, real tol) {
    const Grid& g = *f.grid;
    real amp = 0;
    for (int a = 0; a < 3; ++a)
        for (const auto& z : f.c[a]) amp = std::max(amp, std::abs(z));
    const real mean0 = std::max({std::abs(f.c[0][0]), std::abs(f.c[1][0]), std::abs(f.c[2][0])});
    if (amp > 0 && mean0 > tol * amp)
        throw PreconditionError("inverse_curl: input has nonzero mean, |mean|/|max| = " +
                                std::to_string(mean0 / amp));
    const real defect = divergence_defect(f);
    if (defect > tol)
        throw PreconditionError("inverse_curl: input not solenoidal, relative divergence = " +
                                std::to_string(defect));
    SpectralVector out(g);
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const real kx = deriv_freq(g, ikx), ky = deriv_freq(g, iy), kz = deriv_freq(g, iz);
        const real k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0) return;  // mean-free gauge
        const complexr I{0, 1};
        out.c[0][i] = I * (ky * f.c[2][i] - kz * f.c[1][i]) / k2;
        out.c[1][i] = I * (kz * f.c[0][i] - kx * f.c[2][i]) / k2;
        out.c[2][i] = I * (kx * f.c[1][i] - ky * f.c[0][i]) / k2;
    });
    return out;
}

SpectralScalar poisson_solve(const SpectralScalar& s) {
    const Grid& g = *s.grid;
    SpectralScalar out(g);
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const real kx = deriv_freq(g, ikx), ky = deriv_freq(g, iy), kz = deriv_freq(g, iz);
        const real k2 = kx * kx + ky * ky + kz * kz;
        out.v[i] = k2 == 0.0 ? complexr{0, 0} : -s.v[i] / k2;
    });
    return out;
}

namespace {

// Per-axis shift multipliers. At the Nyquist index the cosine convention keeps
// the shifted spectrum Hermitian (the sine component of the Nyquist mode is
// invisible on grid points); dealiased fields never touch that plane.
std::vector<complexr> axis_phases(const Grid& g, real shift, bool reduced) {
    const int count = reduced ? g.n_half() : g.n();
    std::vector<complexr> ph(count);
    for (int i = 0; i < count; ++i) {
        const int f = g.freq(i);
        if (std::abs(f) == g.n() / 2)
            ph[i] = complexr{std::cos(f * shift), 0};
        else
            ph[i] = std::polar<real>(1.0, f * shift);
    }
    return ph;
}

}  // namespace

void phase_shift(SpectralScalar& f, const Vec3& ell) {
    const Grid& g = *f.grid;
    const auto px = axis_phases(g, ell.x, true);
    const auto py = axis_phases(g, ell.y, false);
    const auto pz = axis_phases(g, ell.z, false);
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        f.v[i] *= px[ikx] * py[iy] * pz[iz];
    });
}

void phase_shift(SpectralVector& f, const Vec3& ell) {
    const Grid& g = *f.grid;
    const auto px = axis_phases(g, ell.x, true);
    const auto py = axis_phases(g, ell.y, false);
    const auto pz = axis_phases(g, ell.z, false);
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const complexr m = px[ikx] * py[iy] * pz[iz];
        f.c[0][i] *= m;
        f.c[1][i] *= m;
        f.c[2][i] *= m;
    });
}

// ---- reductions -------------------------------------------------------------

real mean_dot(const VectorField& a, const VectorField& b) {
    real acc = 0;
    const std::size_t m = a.grid->size();
    for (std::size_t i = 0; i < m; ++i)
        acc += a.c[0][i] * b.c[0][i] + a.c[1][i] * b.c[1][i] + a.c[2][i] * b.c[2][i];
    return acc / static_cast<real>(m);
}

real mean(const ScalarField& a) {
    real acc = 0;
    for (real v : a.v) acc += v;
    return acc / static_cast<real>(a.v.size());
}

namespace {
// Hermitian multiplicity: interior kx planes represent a conjugate pair.
inline real herm_weight(const Grid& g, int ikx) {
    return (ikx == 0 || ikx == g.n() / 2) ? 1.0 : 2.0;
}
}  // namespace

real spectral_mean_square(const SpectralVector& f) {
    const Grid& g = *f.grid;
    real acc = 0;
    for_each_mode(g, [&](std::size_t i, int ikx, int, int) {
        const real w = herm_weight(g, ikx);
        acc += w * (std::norm(f.c[0][i]) + std::norm(f.c[1][i]) + std::norm(f.c[2][i]));
    });
    return acc;
}

real spectral_mean_dot(const SpectralVector& a, const SpectralVector& b) {
    const Grid& g = *a.grid;
    real acc = 0;
    for_each_mode(g, [&](std::size_t i, int ikx, int, int) {
        const real w = herm_weight(g, ikx);
        acc += w * (std::real(a.c[0][i] * std::conj(b.c[0][i])) +
                    std::real(a.c[1][i] * std::conj(b.c[1][i])) +
                    std::real(a.c[2][i] * std::conj(b.c[2][i])));
    });
    return acc;
}

real spectral_mean_grad_square(const SpectralVector& f) {
    const Grid& g = *f.grid;
    real acc = 0;
    for_each_mode(g, [&](std::size_t i, int ikx, int iy, int iz) {
        const real kx = deriv_freq(g, ikx), ky = deriv_freq(g, iy), kz = deriv_freq(g, iz);
        const real k2 = kx * kx + ky * ky + kz * kz;
        acc += herm_weight(g, ikx) * k2 *
               (std::norm(f.c[0][i]) + std::norm(f.c[1][i]) + std::norm(f.c[2][i]));
    });
    return acc;
}

}  // namespace khm
