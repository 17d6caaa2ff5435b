#include "khm/identities.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "khm/format.hpp"
#include "khm/increments.hpp"

namespace khm {

namespace {

real projector_slope(const Vec3& nhat, int i, int k, real r) {
    const real delta = (i == k) ? 1.0 : 0.0;
    return (delta - nhat[i] * nhat[k]) / r;
}

}  // namespace

IdentityReport check_projector_gradient(const Vec3& E, const Vec3& F, const Vec3& G,
                                        const Vec3& ell) {
    const real r = norm(ell);
    if (r == 0.0) throw PreconditionError("projector-gradient identity needs a nonzero separation");
    const Vec3 nhat = (1.0 / r) * ell;

    real lhs = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const real grad_proj =
                    projector_slope(nhat, i, k, r) * nhat[j] + projector_slope(nhat, j, k, r) * nhat[i];
                const real bracket =
                    grad_proj - (projector_slope(nhat, i, j, r) + projector_slope(nhat, j, i, r)) * nhat[k];
                lhs += bracket * E[k] * F[i] * G[j];
            }

    const Vec3 combo = dot(E, F) * G + dot(E, G) * F - 2.0 * dot(F, G) * E;
    const real rhs = dot(nhat, combo) / r;

    IdentityReport rep;
    rep.identity_name = "projector-gradient";
    rep.lhs_norm = std::abs(lhs);
    rep.rhs_norm = std::abs(rhs);
    rep.residual = identity_residual(lhs, rhs);
    rep.resolution = "closed-form contraction";
    return rep;
}

std::string to_string(FluxIdentity which) {
    switch (which) {
        case FluxIdentity::longitudinal_mixed: return "projection-flux-L-mixed";
        case FluxIdentity::longitudinal_squared: return "projection-flux-L-squared";
        case FluxIdentity::transverse_mixed: return "projection-flux-T-mixed";
        default: return "projection-flux-T-squared";
    }
}

namespace {

/// Largest |k_i| carrying spectral weight above 1e-12 of the peak.
int support_kmax(const SpectralVector& f) {
    const Grid& g = *f.grid;
    real peak = 0;
    for (int c = 0; c < 3; ++c)
        for (const auto& z : f.c[c]) peak = std::max(peak, std::abs(z));
    if (peak == 0) return 0;
    int kmax = 0;
    const int nh = g.n_half();
    for (int iz = 0; iz < g.n(); ++iz)
        for (int iy = 0; iy < g.n(); ++iy)
            for (int ikx = 0; ikx < nh; ++ikx) {
                const std::size_t idx = g.spectral_index(ikx, iy, iz);
                real amp = 0;
                for (int c = 0; c < 3; ++c) amp = std::max(amp, std::abs(f.c[c][idx]));
                if (amp <= 1e-12 * peak) continue;
                const int kb = std::max({std::abs(ikx), std::abs(g.freq(iy)), std::abs(g.freq(iz))});
                kmax = std::max(kmax, kb);
            }
    return kmax;
}

/// Everything the quadrature sweep accumulates on the full grid. Names follow
/// the identity structure: g* are the smoothed projected products, Eg* the
/// smoothed field-weighted products, and the tensor blocks hold, per column j,
/// the k-vector whose divergence the right-hand sides need.
struct FluxAccumulators {
    ScalarField gLE, gTE, gLL, gTT;
    VectorField EgLE, EgTE, EgLL, EgTT;
    std::array<VectorField, 3> EFL, EFT, EEL, EET;
    VectorField FepsL, FepsT, EepsL, EepsT;

    explicit FluxAccumulators(const Grid& g)
        : gLE(g), gTE(g), gLL(g), gTT(g),
          EgLE(g), EgTE(g), EgLL(g), EgTT(g),
          EFL{VectorField(g), VectorField(g), VectorField(g)},
          EFT{VectorField(g), VectorField(g), VectorField(g)},
          EEL{VectorField(g), VectorField(g), VectorField(g)},
          EET{VectorField(g), VectorField(g), VectorField(g)},
          FepsL(g), FepsT(g), EepsL(g), EepsT(g) {}
};

void accumulate_node(FluxAccumulators& A, const VectorField& Eb, const VectorField& Fb,
                     const Vec3& nhat, real wph) {
    const std::size_t total = Eb.grid->size();
    for (std::size_t i = 0; i < total; ++i) {
        const Vec3 e = Eb.at(i);
        const Vec3 f = Fb.at(i);
        const real nE = dot(nhat, e);
        const real nF = dot(nhat, f);
        const real eF = dot(e, f);
        const real fF = dot(f, f);

        const real gle = nF * nE;
        const real gte = eF - gle;
        const real gll = nF * nF;
        const real gtt = fF - gll;

        A.gLE[i] += wph * gle;
        A.gTE[i] += wph * gte;
        A.gLL[i] += wph * gll;
        A.gTT[i] += wph * gtt;

        const Vec3 fL = nF * nhat;
        const Vec3 fT = f - fL;
        const Vec3 eL = nE * nhat;
        const Vec3 eT = e - eL;

        for (int c = 0; c < 3; ++c) {
            A.EgLE.c[c][i] += wph * gle * e[c];
            A.EgTE.c[c][i] += wph * gte * e[c];
            A.EgLL.c[c][i] += wph * gll * e[c];
            A.EgTT.c[c][i] += wph * gtt * e[c];
            A.FepsL.c[c][i] += wph * fL[c];
            A.FepsT.c[c][i] += wph * fT[c];
            A.EepsL.c[c][i] += wph * eL[c];
            A.EepsT.c[c][i] += wph * eT[c];
        }
        for (int j = 0; j < 3; ++j) {
            const real aL = wph * fL[j];
            const real aT = wph * fT[j];
            const real bL = wph * eL[j];
            const real bT = wph * eT[j];
            for (int k = 0; k < 3; ++k) {
                A.EFL[j].c[k][i] += aL * e[k];
                A.EFT[j].c[k][i] += aT * e[k];
                A.EEL[j].c[k][i] += bL * e[k];
                A.EET[j].c[k][i] += bT * e[k];
            }
        }
    }
}

}  // namespace

std::array<IdentityReport, 4> check_projection_flux_identities(const VectorField& E,
                                                               const VectorField& F,
                                                               const FluxIdentityResolution& res) {
    if (!res.kernel || !res.directions)
        throw ConfigError("flux identity check needs a kernel and a direction set");
    if (!E.grid || !F.grid || !(*E.grid == *F.grid))
        throw PreconditionError("flux identity check needs E and F on one grid");
    const Grid& g = *E.grid;
    res.kernel->require_resolvable(g.spacing());
    if (res.radial_nodes < 2) throw ConfigError("flux identity check needs >= 2 radial nodes");
    if (res.samples_per_axis < 1 || res.samples_per_axis > g.n())
        throw ConfigError("samples_per_axis must lie in [1, n]");

    Transformer t(g);
    const SpectralVector Espec = t.forward(E);
    const SpectralVector Fspec = t.forward(F);

    const real defect = divergence_defect(Espec);
    if (defect > 1e-8)
        throw PreconditionError("flux identities need divergence-free E, relative defect = " +
                                format_real(defect));
    const int kmax = std::max(support_kmax(Espec), support_kmax(Fspec));
    if (3 * kmax > g.n() / 2 - 1)
        throw PreconditionError("fields occupy modes up to " + std::to_string(kmax) +
                                "; cubic products would alias on an n = " + std::to_string(g.n()) +
                                " grid");

    ShiftedFieldBank bank(g);
    const int slotE = bank.add(Espec);
    const int slotF = bank.add(Fspec);

    const int spa = res.samples_per_axis;
    const int stride = g.n() / spa;
    std::vector<std::size_t> sample_idx;
    sample_idx.reserve(static_cast<std::size_t>(spa) * spa * spa);
    for (int az = 0; az < spa; ++az)
        for (int ay = 0; ay < spa; ++ay)
            for (int ax = 0; ax < spa; ++ax)
                sample_idx.push_back(g.index(ax * stride, ay * stride, az * stride));
    const std::size_t samples = sample_idx.size();

    const DirectionSet& dirs = *res.directions;
    const RadialRule rad =
        gauss_legendre(res.radial_nodes, 0.0, res.kernel->support_radius() * res.kernel->epsilon());

    FluxAccumulators acc(g);
    std::vector<std::array<real, 4>> integral(samples, {0.0, 0.0, 0.0, 0.0});

    for (int d = 0; d < dirs.count(); ++d) {
        const Vec3 nhat = dirs.n[d];
        const real wd = 4.0 * pi * dirs.w[d];
        for (int q = 0; q < rad.size(); ++q) {
            const real r = rad.r[q];
            const real phi = res.kernel->phi_eps(r);
            const real dphi = res.kernel->dphi_eps(r);
            const real W = wd * rad.w[q] * r * r;

            bank.shift_all(r * nhat);
            const VectorField& Eb = bank.shifted(slotE);
            const VectorField& Fb = bank.shifted(slotF);

            accumulate_node(acc, Eb, Fb, nhat, W * phi);

            const real two_over_r = 2.0 * phi / r;
            const real one_over_r = phi / r;
            for (std::size_t s = 0; s < samples; ++s) {
                const std::size_t i = sample_idx[s];
                const Vec3 dE = Eb.at(i) - bank.base(slotE).at(i);
                const Vec3 dF = Fb.at(i) - bank.base(slotF).at(i);
                const real nE = dot(nhat, dE);
                const real nF = dot(nhat, dF);
                const real dEF = dot(dE, dF);
                const real e2 = dot(dE, dE);
                const real f2 = dot(dF, dF);
                const real lmix = nF * nE;
                const real tmix = dEF - lmix;
                const real cross_mixed = nE * dEF - nF * e2;
                const real cross_squared = nF * dEF - nE * nF * nF;

                integral[s][0] += W * (dphi * nE * lmix + two_over_r * nE * tmix - one_over_r * cross_mixed);
                integral[s][1] += 0.5 * W * (dphi * nE * nF * nF + two_over_r * cross_squared);
                integral[s][2] += W * ((dphi - two_over_r) * nE * tmix + one_over_r * cross_mixed);
                integral[s][3] += 0.5 * W * (dphi * nE * (f2 - nF * nF) - two_over_r * cross_squared);
            }
        }
    }

    // Assemble the divergence pieces spectrally, then read them at the samples.
    const VectorField& Ebase = bank.base(slotE);
    auto divergence_grid = [&](const VectorField& v) {
        SpectralVector vs = t.forward(v);
        return t.inverse(divergence(vs));
    };
    auto commutator_divergence = [&](const VectorField& smoothed_product, const ScalarField& smoothed) {
        VectorField v(g);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < g.size(); ++i)
                v.c[c][i] = smoothed_product.c[c][i] - Ebase.c[c][i] * smoothed[i];
        return divergence_grid(v);
    };
    auto tensor_divergence = [&](const std::array<VectorField, 3>& M, const VectorField& smoothed_proj) {
        std::array<ScalarField, 3> D;
        for (int j = 0; j < 3; ++j) {
            VectorField v(g);
            for (int k = 0; k < 3; ++k)
                for (std::size_t i = 0; i < g.size(); ++i)
                    v.c[k][i] = M[j].c[k][i] - Ebase.c[k][i] * smoothed_proj.c[j][i];
            D[j] = divergence_grid(v);
        }
        return D;
    };

    const ScalarField divLE = commutator_divergence(acc.EgLE, acc.gLE);
    const ScalarField divLL = commutator_divergence(acc.EgLL, acc.gLL);
    const ScalarField divTE = commutator_divergence(acc.EgTE, acc.gTE);
    const ScalarField divTT = commutator_divergence(acc.EgTT, acc.gTT);
    const std::array<ScalarField, 3> dEFL = tensor_divergence(acc.EFL, acc.FepsL);
    const std::array<ScalarField, 3> dEFT = tensor_divergence(acc.EFT, acc.FepsT);
    const std::array<ScalarField, 3> dEEL = tensor_divergence(acc.EEL, acc.EepsL);
    const std::array<ScalarField, 3> dEET = tensor_divergence(acc.EET, acc.EepsT);

    const VectorField& Fbase = bank.base(slotF);
    std::array<IdentityReport, 4> reports;
    const std::string resolution =
        "n=" + std::to_string(g.n()) + " kernel=" + to_string(res.kernel->profile()) +
        " eps=" + format_real(res.kernel->epsilon()) + " directions=" + std::to_string(dirs.count()) +
        " radial=" + std::to_string(res.radial_nodes) + " samples=" + std::to_string(spa) + "^3";

    for (int which = 0; which < 4; ++which) {
        real worst = 0, lmax = 0, rmax = 0;
        for (std::size_t s = 0; s < samples; ++s) {
            const std::size_t i = sample_idx[s];
            const Vec3 e = Ebase.at(i);
            const Vec3 f = Fbase.at(i);
            real lhs = 0, rhs = 0;
            switch (static_cast<FluxIdentity>(which)) {
                case FluxIdentity::longitudinal_mixed:
                    lhs = integral[s][0] + divLE[i];
                    rhs = e.x * dEFL[0][i] + e.y * dEFL[1][i] + e.z * dEFL[2][i] +
                          f.x * dEEL[0][i] + f.y * dEEL[1][i] + f.z * dEEL[2][i];
                    break;
                case FluxIdentity::longitudinal_squared:
                    lhs = integral[s][1] + 0.5 * divLL[i];
                    rhs = f.x * dEFL[0][i] + f.y * dEFL[1][i] + f.z * dEFL[2][i];
                    break;
                case FluxIdentity::transverse_mixed:
                    lhs = integral[s][2] + divTE[i];
                    rhs = e.x * dEFT[0][i] + e.y * dEFT[1][i] + e.z * dEFT[2][i] +
                          f.x * dEET[0][i] + f.y * dEET[1][i] + f.z * dEET[2][i];
                    break;
                default:
                    lhs = integral[s][3] + 0.5 * divTT[i];
                    rhs = f.x * dEFT[0][i] + f.y * dEFT[1][i] + f.z * dEFT[2][i];
                    break;
            }
            worst = std::max(worst, identity_residual(lhs, rhs));
            lmax = std::max(lmax, std::abs(lhs));
            rmax = std::max(rmax, std::abs(rhs));
        }
        reports[which].identity_name = to_string(static_cast<FluxIdentity>(which));
        reports[which].lhs_norm = lmax;
        reports[which].rhs_norm = rmax;
        reports[which].residual = worst;
        reports[which].resolution = resolution;
    }
    return reports;
}

IdentityReport check_projection_flux_identity(FluxIdentity which, const VectorField& E,
                                              const VectorField& F,
                                              const FluxIdentityResolution& res) {
    return check_projection_flux_identities(E, F, res)[static_cast<int>(which)];
}

namespace {

real spectral_l2(const SpectralVector& f) { return std::sqrt(spectral_mean_square(f)); }

real pairwise_relative(const SpectralVector& a, const SpectralVector& b) {
    const Grid& g = *a.grid;
    SpectralVector diff(g);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < g.spectral_size(); ++i) diff.c[c][i] = a.c[c][i] - b.c[c][i];
    const real scale = std::max({spectral_l2(a), spectral_l2(b), real(1e-300)});
    return spectral_l2(diff) / scale;
}

}  // namespace

IdentityReport check_hall_rewrites(const VectorField& b) {
    if (!b.grid) throw PreconditionError("hall rewrite check needs a field bound to a grid");
    const Grid& g = *b.grid;
    Transformer t(g);
    const SpectralVector bs = t.forward(b);

    const real defect = divergence_defect(bs);
    if (defect > 1e-8)
        throw PreconditionError("hall rewrites need divergence-free b, relative defect = " +
                                format_real(defect));
    const int kmax = support_kmax(bs);
    if (2 * kmax > g.n() / 2 - 1)
        throw PreconditionError("b occupies modes up to " + std::to_string(kmax) +
                                "; quadratic products would alias on an n = " +
                                std::to_string(g.n()) + " grid");

    const VectorField J = t.inverse(curl(bs));

    // curl of the pointwise cross product
    VectorField w(g);
    for (std::size_t i = 0; i < g.size(); ++i) w.set(i, cross(J.at(i), b.at(i)));
    const SpectralVector X1 = curl(t.forward(w));

    // antisymmetric tensor divergence, column by column
    SpectralVector X2(g);
    for (int j = 0; j < 3; ++j) {
        VectorField col(g);
        for (int k = 0; k < 3; ++k)
            for (std::size_t i = 0; i < g.size(); ++i)
                col.c[k][i] = b.c[k][i] * J.c[j][i] - J.c[k][i] * b.c[j][i];
        X2.c[j] = divergence(t.forward(col)).v;
    }

    // curl of the divergence of b (x) b
    SpectralVector inner(g);
    for (int j = 0; j < 3; ++j) {
        VectorField col(g);
        for (int k = 0; k < 3; ++k)
            for (std::size_t i = 0; i < g.size(); ++i) col.c[k][i] = b.c[k][i] * b.c[j][i];
        inner.c[j] = divergence(t.forward(col)).v;
    }
    const SpectralVector X3 = curl(inner);

    const real r12 = pairwise_relative(X1, X2);
    const real r13 = pairwise_relative(X1, X3);
    const real r23 = pairwise_relative(X2, X3);

    IdentityReport rep;
    rep.identity_name = "hall-rewrites";
    rep.lhs_norm = spectral_l2(X1);
    rep.rhs_norm = spectral_l2(X2);
    rep.residual = std::max({r12, r13, r23});
    rep.resolution = "pairwise: curl-cross/tensor=" + format_real(r12) +
                     " curl-cross/curl-div=" + format_real(r13) +
                     " tensor/curl-div=" + format_real(r23);
    return rep;
}

}  // namespace khm
