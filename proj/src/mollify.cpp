#include "khm/mollify.hpp"

#include <cmath>

namespace khm {

namespace {

// spherical Bessel helpers with small-argument series to dodge cancellation
inline real sj0(real x) {
    if (std::abs(x) < 0.05) {
        const real x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0;
    }
    return std::sin(x) / x;
}

inline real sj1_over_x(real x) {
    if (std::abs(x) < 0.05) {
        const real x2 = x * x;
        return 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0;
    }
    return (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

}  // namespace

Smoother::Smoother(const Grid& g, const MollifierKernel& kernel, int radial_nodes)
    : grid_(&g), epsilon_(kernel.epsilon()) {
    kernel.require_resolvable(g.spacing());
    if (radial_nodes <= 0)
        radial_nodes = kernel.profile() == KernelProfile::bump ? 256 : 1024;

    const real R = kernel.support_radius() * epsilon_;
    const RadialRule rule = graded_radial_rule(radial_nodes, R, 2.0);

    // kernel values at the nodes, shared across every wavenumber
    std::vector<real> wr2_phi(rule.size()), wr2_phiL(rule.size()), wr2_phiT(rule.size());
    for (int q = 0; q < rule.size(); ++q) {
        const real r = rule.r[q];
        const real wr2 = 4.0 * pi * rule.w[q] * r * r;
        wr2_phi[q] = wr2 * kernel.phi_eps(r);
        wr2_phiL[q] = wr2 * kernel.phi_L_eps(r);
        wr2_phiT[q] = wr2 * kernel.phi_T_eps(r);
    }

    const int half = g.n() / 2;
    const int k2max = 3 * half * half;
    A_.assign(k2max + 1, 0.0);
    B_.assign(k2max + 1, 0.0);
    full_.assign(k2max + 1, 0.0);
    scal_L_.assign(k2max + 1, 0.0);
    scal_T_.assign(k2max + 1, 0.0);

    for (int k2 = 0; k2 <= k2max; ++k2) {
        const real k = std::sqrt(static_cast<real>(k2));
        real a = 0, b = 0, m0 = 0, mL = 0, mT = 0;
        for (int q = 0; q < rule.size(); ++q) {
            const real x = k * rule.r[q];
            const real j0 = sj0(x), j1x = sj1_over_x(x);
            a += wr2_phi[q] * j1x;
            b += wr2_phi[q] * (j0 - 3.0 * j1x);
            m0 += wr2_phi[q] * j0;
            mL += wr2_phiL[q] * j0;
            mT += wr2_phiT[q] * j0;
        }
        A_[k2] = a;
        B_[k2] = b;
        full_[k2] = m0;
        scal_L_[k2] = mL;
        scal_T_[k2] = mT;
    }
}

real Smoother::coef_scalar(RadialPart part, int k2) const {
    switch (part) {
        case RadialPart::full: return full_[k2];
        case RadialPart::longitudinal: return scal_L_[k2];
        case RadialPart::transverse: return scal_T_[k2];
    }
    return 0;
}

void Smoother::apply(const SpectralVector& in, SmoothPart part, SpectralVector& out) const {
    const Grid& g = *grid_;
    if (out.grid != grid_) out = SpectralVector(g);
    const int n = g.n(), nh = g.n_half();
    std::size_t i = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ikx = 0; ikx < nh; ++ikx, ++i) {
                const real kx = g.freq(ikx), ky = g.freq(iy), kz = g.freq(iz);
                const int k2 = static_cast<int>(kx * kx + ky * ky + kz * kz);
                const complexr fx = in.c[0][i], fy = in.c[1][i], fz = in.c[2][i];
                real diag, proj;
                switch (part) {
                    case SmoothPart::full: diag = full_[k2]; proj = 0; break;
                    case SmoothPart::longitudinal: diag = A_[k2]; proj = B_[k2]; break;
                    default: diag = full_[k2] - A_[k2]; proj = -B_[k2]; break;
                }
                complexr px{0, 0}, py{0, 0}, pz{0, 0};
                if (proj != 0.0 && k2 > 0) {
                    const complexr kf = (kx * fx + ky * fy + kz * fz) / static_cast<real>(k2);
                    px = proj * kx * kf;
                    py = proj * ky * kf;
                    pz = proj * kz * kf;
                }
                out.c[0][i] = diag * fx + px;
                out.c[1][i] = diag * fy + py;
                out.c[2][i] = diag * fz + pz;
            }
}

SpectralVector Smoother::apply(const SpectralVector& in, SmoothPart part) const {
    SpectralVector out(*grid_);
    apply(in, part, out);
    return out;
}

void Smoother::apply(const SpectralScalar& in, RadialPart part, SpectralScalar& out) const {
    const Grid& g = *grid_;
    if (out.grid != grid_) out = SpectralScalar(g);
    const std::vector<real>& m = part == RadialPart::full      ? full_
                                 : part == RadialPart::longitudinal ? scal_L_
                                                                    : scal_T_;
    const int n = g.n(), nh = g.n_half();
    std::size_t i = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ikx = 0; ikx < nh; ++ikx, ++i) {
                const real kx = g.freq(ikx), ky = g.freq(iy), kz = g.freq(iz);
                out.v[i] = m[static_cast<int>(kx * kx + ky * ky + kz * kz)] * in.v[i];
            }
}

SpectralScalar Smoother::apply(const SpectralScalar& in, RadialPart part) const {
    SpectralScalar out(*grid_);
    apply(in, part, out);
    return out;
}

real pressure_gradient_claim_residual(const Smoother& s) {
    real worst = 0;
    for (int k2 = 0; k2 <= s.max_k2(); ++k2)
        worst = std::max(worst, std::abs(s.coef_A(k2) + s.coef_B(k2) -
                                         s.coef_scalar(RadialPart::longitudinal, k2)));
    return worst;
}

real pressure_gradient_claim_residual(const Smoother& s, const SpectralScalar& p) {
    const Grid& g = *p.grid;
    // div_j of M_ij(k) phat: i k_i (A + B) phat; gradient of m_L phat: i k_i m_L phat
    SpectralVector lhs(g), rhs(g);
    const int n = g.n(), nh = g.n_half();
    std::size_t i = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ikx = 0; ikx < nh; ++ikx, ++i) {
                const real kx = g.freq(ikx), ky = g.freq(iy), kz = g.freq(iz);
                const int k2 = static_cast<int>(kx * kx + ky * ky + kz * kz);
                const complexr I{0, 1};
                const complexr lmul = I * (s.coef_A(k2) + s.coef_B(k2)) * p.v[i];
                const complexr rmul = I * s.coef_scalar(RadialPart::longitudinal, k2) * p.v[i];
                lhs.c[0][i] = kx * lmul;
                lhs.c[1][i] = ky * lmul;
                lhs.c[2][i] = kz * lmul;
                rhs.c[0][i] = kx * rmul;
                rhs.c[1][i] = ky * rmul;
                rhs.c[2][i] = kz * rmul;
            }
    real num = 0, den = 0;
    for (int a = 0; a < 3; ++a)
        for (std::size_t m = 0; m < lhs.c[a].size(); ++m) {
            num += std::norm(lhs.c[a][m] - rhs.c[a][m]);
            den += std::norm(lhs.c[a][m]) + std::norm(rhs.c[a][m]);
        }
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace khm
