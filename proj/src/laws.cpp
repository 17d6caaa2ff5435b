#include "khm/laws.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "khm/format.hpp"

namespace khm {

namespace {

// Direction-weighted grid means of every cubic shell integrand. Values are
// still missing the 1/lambda and d_i factors; assembly applies those.
struct ShellSums {
    real el_bar = 0;
    real et_bar = 0;
    real e_bar = 0;
    real ml = 0;
    real mt = 0;
    real vel_L = 0;
    real vel_T = 0;
    real mixed = 0;
    real hl = 0;
};

ShellSums shell_pass(const SpectralVector& b, const SpectralVector* J, const SpectralVector* u,
                     const SpectralVector* omega, real lambda, const DirectionSet& dirs) {
    if (b.grid == nullptr) throw ConfigError("shell estimator: field has no grid");
    const Grid& g = *b.grid;
    if (lambda < g.spacing())
        throw ConfigError("separation " + format_real(lambda) + " is below the grid spacing " +
                          format_real(g.spacing()));
    if (dirs.count() == 0) throw ConfigError("shell estimator: empty direction set");

    ShiftedFieldBank bank(g);
    const int sb = bank.add(b);
    const int sJ = J != nullptr ? bank.add(*J) : -1;
    const int su = u != nullptr ? bank.add(*u) : -1;
    const int sw = omega != nullptr ? bank.add(*omega) : -1;

    const std::size_t size = g.size();
    const real inv_size = 1.0 / static_cast<real>(size);
    ShellSums out;
    for (int d = 0; d < dirs.count(); ++d) {
        const Vec3 nhat = dirs.n[d];
        bank.shift_all(lambda * nhat);
        const VectorField& b0 = bank.base(sb);
        const VectorField& b1 = bank.shifted(sb);
        ShellSums acc;
        for (std::size_t i = 0; i < size; ++i) {
            const Vec3 db = b1.at(i) - b0.at(i);
            const real nb = dot(db, nhat);
            const real bb = dot(db, db);
            acc.ml += nb * nb * nb;
            acc.mt += nb * (bb - nb * nb);
            if (sJ >= 0) {
                const Vec3 dJ = bank.shifted(sJ).at(i) - bank.base(sJ).at(i);
                const real nJ = dot(dJ, nhat);
                const real Jb = dot(dJ, db);
                acc.el_bar += nb * (nJ * nb) - 0.5 * nJ * (nb * nb);
                acc.et_bar += nb * (Jb - nJ * nb) - 0.5 * nJ * (bb - nb * nb);
                acc.e_bar += nJ * bb - nb * Jb;
            }
            if (su >= 0) {
                const Vec3 dv = bank.shifted(su).at(i) - bank.base(su).at(i);
                const real nv = dot(dv, nhat);
                const real vv = dot(dv, dv);
                const real vb = dot(dv, db);
                acc.vel_L += nv * (nv * nv + nb * nb) - 2.0 * nb * (nv * nb);
                acc.vel_T += nv * ((vv - nv * nv) + (bb - nb * nb)) - 2.0 * nb * (vb - nv * nb);
                acc.mixed += nb * vb - nv * bb;
                if (sw >= 0) {
                    const Vec3 dw = bank.shifted(sw).at(i) - bank.base(sw).at(i);
                    const real nw = dot(dw, nhat);
                    const real vw = dot(dv, dw);
                    acc.hl += nv * (nv * nw) - 0.5 * nw * (nv * nv) + 2.0 * nv * (nb * nv) -
                              nb * (nv * nv) - 0.4 * nw * vv + 0.4 * nv * vw - 0.8 * nb * vv +
                              0.8 * nv * vb;
                }
            }
        }
        const real wd = dirs.w[d] * inv_size;
        out.el_bar += wd * acc.el_bar;
        out.et_bar += wd * acc.et_bar;
        out.e_bar += wd * acc.e_bar;
        out.ml += wd * acc.ml;
        out.mt += wd * acc.mt;
        out.vel_L += wd * acc.vel_L;
        out.vel_T += wd * acc.vel_T;
        out.mixed += wd * acc.mixed;
        out.hl += wd * acc.hl;
    }
    return out;
}

void require_quad(const ShellQuad& quad) {
    if (quad.directions == nullptr) throw ConfigError("shell estimator: no direction set");
}

void require_same_grid(const VectorField& a, const VectorField& b, const char* what) {
    if (a.grid == nullptr || b.grid == nullptr || a.grid->n() != b.grid->n())
        throw ConfigError(std::string(what) + ": fields live on different grids");
}

}  // namespace

ShellFunctionals shell_functionals(const SpectralVector& b, const SpectralVector* u, real lambda,
                                   const ShellQuad& quad) {
    require_quad(quad);
    const SpectralVector J = curl(b);
    SpectralVector omega;
    if (u != nullptr) omega = curl(*u);
    const ShellSums s =
        shell_pass(b, &J, u, u != nullptr ? &omega : nullptr, lambda, *quad.directions);

    ShellFunctionals out;
    out.S_EL_bar = quad.d_i * s.el_bar / lambda;
    out.S_ET_bar = quad.d_i * s.et_bar / lambda;
    out.S_E_bar = quad.d_i * s.e_bar / lambda;
    out.S_ML = quad.d_i * s.ml / lambda;
    out.S_MT = quad.d_i * s.mt / lambda;
    out.S_EL = out.S_EL_bar - 0.4 * out.S_E_bar;
    out.S_ET = out.S_ET_bar + 0.4 * out.S_E_bar;
    if (u != nullptr) {
        out.S_EL += (s.vel_L + 0.8 * s.mixed) / lambda;
        out.S_ET += (s.vel_T - 0.8 * s.mixed) / lambda;
        out.S_HL = s.hl / lambda;
    }
    return out;
}

real s_el_energy(const VectorField& b, const VectorField& J, real lambda, const ShellQuad& quad) {
    require_quad(quad);
    require_same_grid(b, J, "s_el_energy");
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    const SpectralVector Js = t.forward(J);
    const ShellSums s = shell_pass(bs, &Js, nullptr, nullptr, lambda, *quad.directions);
    return quad.d_i * (s.el_bar - 0.4 * s.e_bar) / lambda;
}

real s_et_energy(const VectorField& b, const VectorField& J, real lambda, const ShellQuad& quad) {
    require_quad(quad);
    require_same_grid(b, J, "s_et_energy");
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    const SpectralVector Js = t.forward(J);
    const ShellSums s = shell_pass(bs, &Js, nullptr, nullptr, lambda, *quad.directions);
    return quad.d_i * (s.et_bar + 0.4 * s.e_bar) / lambda;
}

real s_e_bar(const VectorField& b, const VectorField& J, real lambda, const ShellQuad& quad) {
    require_quad(quad);
    require_same_grid(b, J, "s_e_bar");
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    const SpectralVector Js = t.forward(J);
    const ShellSums s = shell_pass(bs, &Js, nullptr, nullptr, lambda, *quad.directions);
    return quad.d_i * s.e_bar / lambda;
}

std::pair<real, real> s_energy_hallmhd(const VectorField& u, const VectorField& b, real lambda,
                                       const ShellQuad& quad) {
    require_quad(quad);
    require_same_grid(u, b, "s_energy_hallmhd");
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    const SpectralVector us = t.forward(u);
    const SpectralVector Js = curl(bs);
    const ShellSums s = shell_pass(bs, &Js, &us, nullptr, lambda, *quad.directions);
    const real el = (s.vel_L + 0.8 * s.mixed) / lambda + quad.d_i * (s.el_bar - 0.4 * s.e_bar) / lambda;
    const real et = (s.vel_T - 0.8 * s.mixed) / lambda + quad.d_i * (s.et_bar + 0.4 * s.e_bar) / lambda;
    return {el, et};
}

real s_ml(const VectorField& b, real lambda, const ShellQuad& quad) {
    require_quad(quad);
    if (b.grid == nullptr) throw ConfigError("s_ml: field has no grid");
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    const ShellSums s = shell_pass(bs, nullptr, nullptr, nullptr, lambda, *quad.directions);
    return quad.d_i * s.ml / lambda;
}

real s_mt(const VectorField& b, real lambda, const ShellQuad& quad) {
    require_quad(quad);
    if (b.grid == nullptr) throw ConfigError("s_mt: field has no grid");
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    const ShellSums s = shell_pass(bs, nullptr, nullptr, nullptr, lambda, *quad.directions);
    return quad.d_i * s.mt / lambda;
}

real s_hl_generalized(const VectorField& u, const VectorField& omega, const VectorField& b,
                      real lambda, const ShellQuad& quad) {
    require_quad(quad);
    require_same_grid(u, b, "s_hl_generalized");
    require_same_grid(u, omega, "s_hl_generalized");
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    const SpectralVector us = t.forward(u);
    const SpectralVector ws = t.forward(omega);
    const ShellSums s = shell_pass(bs, nullptr, &us, &ws, lambda, *quad.directions);
    return s.hl / lambda;
}

namespace {

// Grid means of the five cubic combinations the D integrands reduce to.
struct CubicMeans {
    real bLL_J = 0;  // <(n.db)^2 (n.dJ)>
    real bL_Jb = 0;  // <(n.db)(dJ.db)>
    real JL_bb = 0;  // <(n.dJ)|db|^2>
    real bL3 = 0;    // <(n.db)^3>
    real bL_bb = 0;  // <(n.db)|db|^2>
};

// One quadrature node of the volume ell-integrals. W carries the node weight
// 4 pi w_dir w_rad r^2; phi and dphi are the scaled kernel and its radial
// derivative at r.
void add_dissipation(DissipationEstimate& d, const CubicMeans& m, real W, real phi, real dphi,
                     real r, real d_i) {
    const real tphi = 2.0 * phi / r;
    const real mixed_T = m.bL_Jb - m.bLL_J;    // <(n.db)(dJ_T.db_T)>
    const real squared_T = m.JL_bb - m.bLL_J;  // <(n.dJ)(db_T)^2>
    const real triple = m.JL_bb - m.bL_Jb;     // <n.[db x (dJ x db)]>
    const real mt_b = m.bL_bb - m.bL3;         // <(n.db)(db_T)^2>
    d.D_EL += W * d_i *
              (0.75 * (dphi * m.bLL_J + tphi * (mixed_T + triple)) -
               0.375 * (dphi * m.bLL_J + tphi * squared_T));
    d.D_ET += W * d_i *
              (-0.1875 * (dphi - tphi) * squared_T + 0.375 * (dphi - tphi) * mixed_T -
               0.75 * (phi / r) * triple);
    d.D_ML += W * d_i * 0.75 * (dphi * m.bL3 + tphi * mt_b);
    d.D_MT += W * d_i * 0.375 * (dphi - tphi) * mt_b;
}

void require_dissipation_quad(const DissipationQuad& quad, const Grid& g) {
    if (quad.kernel == nullptr) throw ConfigError("dissipation estimate: no kernel");
    if (quad.directions == nullptr) throw ConfigError("dissipation estimate: no direction set");
    if (quad.radial_nodes < 2) throw ConfigError("dissipation estimate: radial_nodes must be >= 2");
    quad.kernel->require_resolvable(g.spacing());
}

DissipationEstimate dissipation_pass(const SpectralVector& b, const SpectralVector* J,
                                     const DissipationQuad& quad) {
    const Grid& g = *b.grid;
    ShiftedFieldBank bank(g);
    const int sb = bank.add(b);
    const int sJ = J != nullptr ? bank.add(*J) : -1;

    const MollifierKernel& k = *quad.kernel;
    const RadialRule rad = gauss_legendre(quad.radial_nodes, 0.0, k.support_radius() * k.epsilon());
    const DirectionSet& dirs = *quad.directions;
    const std::size_t size = g.size();
    const real inv_size = 1.0 / static_cast<real>(size);

    DissipationEstimate out;
    out.epsilon_kernel = k.epsilon();
    for (int d = 0; d < dirs.count(); ++d) {
        const Vec3 nhat = dirs.n[d];
        for (int q = 0; q < rad.size(); ++q) {
            const real r = rad.r[q];
            const real W = 4.0 * pi * dirs.w[d] * rad.w[q] * r * r;
            const real phi = k.phi_eps(r);
            const real dphi = k.dphi_eps(r);
            if (phi == 0.0 && dphi == 0.0) continue;
            bank.shift_all(r * nhat);
            const VectorField& b0 = bank.base(sb);
            const VectorField& b1 = bank.shifted(sb);
            CubicMeans m;
            for (std::size_t i = 0; i < size; ++i) {
                const Vec3 db = b1.at(i) - b0.at(i);
                const real nb = dot(db, nhat);
                const real bb = dot(db, db);
                m.bL3 += nb * nb * nb;
                m.bL_bb += nb * bb;
                if (sJ >= 0) {
                    const Vec3 dJ = bank.shifted(sJ).at(i) - bank.base(sJ).at(i);
                    const real nJ = dot(dJ, nhat);
                    m.bLL_J += nb * nb * nJ;
                    m.bL_Jb += nb * dot(dJ, db);
                    m.JL_bb += nJ * bb;
                }
            }
            m.bLL_J *= inv_size;
            m.bL_Jb *= inv_size;
            m.JL_bb *= inv_size;
            m.bL3 *= inv_size;
            m.bL_bb *= inv_size;
            add_dissipation(out, m, W, phi, dphi, r, quad.d_i);
        }
    }
    return out;
}

}  // namespace

DissipationEstimate d_energy(const VectorField& b, const VectorField& J,
                             const DissipationQuad& quad) {
    require_same_grid(b, J, "d_energy");
    require_dissipation_quad(quad, *b.grid);
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    const SpectralVector Js = t.forward(J);
    return dissipation_pass(bs, &Js, quad);
}

DissipationEstimate d_magnetic(const VectorField& b, const DissipationQuad& quad) {
    if (b.grid == nullptr) throw ConfigError("d_magnetic: field has no grid");
    require_dissipation_quad(quad, *b.grid);
    Transformer t(*b.grid);
    const SpectralVector bs = t.forward(b);
    return dissipation_pass(bs, nullptr, quad);
}

KhmBalance khm_balance_from_string(const std::string& name) {
    if (name == "energy-L") return KhmBalance::energy_longitudinal;
    if (name == "energy-T") return KhmBalance::energy_transverse;
    if (name == "helicity-L") return KhmBalance::helicity_longitudinal;
    if (name == "helicity-T") return KhmBalance::helicity_transverse;
    throw ConfigError("unknown balance '" + name +
                      "' (expected energy-L, energy-T, helicity-L or helicity-T)");
}

std::string to_string(KhmBalance which) {
    switch (which) {
        case KhmBalance::energy_longitudinal: return "energy-L";
        case KhmBalance::energy_transverse: return "energy-T";
        case KhmBalance::helicity_longitudinal: return "helicity-L";
        case KhmBalance::helicity_transverse: return "helicity-T";
    }
    return "?";
}

namespace {

// Everything one balance audit needs from a single snapshot: the smoothed
// two-point quadratics, the helicity transport cross terms, and the D
// functionals, all volume means over x.
struct VolumeBudget {
    real Q_EL = 0;
    real Q_ET = 0;
    real Q_ML = 0;
    real Q_MT = 0;
    real C_ML = 0;
    real C_MT = 0;
    DissipationEstimate d;
};

real max_norm(const VectorField& f) {
    real m = 0;
    for (std::size_t i = 0; i < f.grid->size(); ++i) m = std::max(m, norm(f.at(i)));
    return m;
}

VolumeBudget measure_volume_budget(const Snapshot& snap, bool hall, real d_i,
                                   const AuditOptions& opt) {
    const Grid& g = *snap.grid;
    Transformer t(g);
    const SpectralVector bs = t.forward(snap.require_field("b"));
    const SpectralVector Js = curl(bs);
    const SpectralVector As = inverse_curl(bs);

    ShiftedFieldBank bank(g);
    const int sb = bank.add(bs);
    const int sJ = bank.add(Js);
    const int sA = bank.add(As);
    int su = -1;
    VectorField uxb;
    if (hall) {
        su = bank.add(t.forward(snap.require_field("u")));
        const VectorField& u0 = bank.base(su);
        const VectorField& b0 = bank.base(sb);
        uxb = VectorField(g);
        for (std::size_t i = 0; i < g.size(); ++i) uxb.set(i, cross(u0.at(i), b0.at(i)));
    }

    const MollifierKernel& k = *opt.kernel;
    const RadialRule rad = gauss_legendre(opt.radial_nodes, 0.0, k.support_radius() * k.epsilon());
    const DirectionSet& dirs = *opt.directions;
    const std::size_t size = g.size();
    const real inv_size = 1.0 / static_cast<real>(size);

    VolumeBudget out;
    out.d.epsilon_kernel = k.epsilon();
    for (int d = 0; d < dirs.count(); ++d) {
        const Vec3 nhat = dirs.n[d];
        for (int q = 0; q < rad.size(); ++q) {
            const real r = rad.r[q];
            const real W = 4.0 * pi * dirs.w[d] * rad.w[q] * r * r;
            const real phi = k.phi_eps(r);
            const real dphi = k.dphi_eps(r);
            if (phi == 0.0 && dphi == 0.0) continue;
            bank.shift_all(r * nhat);
            const VectorField& b0 = bank.base(sb);
            const VectorField& b1 = bank.shifted(sb);
            const VectorField& A0 = bank.base(sA);
            const VectorField& A1 = bank.shifted(sA);

            CubicMeans m;
            real q_el = 0, q_et = 0, q_ml = 0, q_mt = 0;
            real cl_phi = 0, cl_over_r = 0, cfull = 0;
            for (std::size_t i = 0; i < size; ++i) {
                const Vec3 bb0 = b0.at(i);
                const Vec3 bb1 = b1.at(i);
                const Vec3 db = bb1 - bb0;
                const real nb = dot(db, nhat);
                const real dbb = dot(db, db);
                m.bL3 += nb * nb * nb;
                m.bL_bb += nb * dbb;
                const Vec3 dJ = bank.shifted(sJ).at(i) - bank.base(sJ).at(i);
                const real nJ = dot(dJ, nhat);
                m.bLL_J += nb * nb * nJ;
                m.bL_Jb += nb * dot(dJ, db);
                m.JL_bb += nJ * dbb;

                const real nb1 = dot(bb1, nhat);
                q_el += nb1 * dot(bb0, nhat);
                q_et += dot(bb1, bb0) - nb1 * dot(bb0, nhat);
                const Vec3 aa0 = A0.at(i);
                const Vec3 aa1 = A1.at(i);
                q_ml += dot(aa1, nhat) * dot(bb0, nhat) + nb1 * dot(aa0, nhat);
                q_mt += dot(aa1, bb0) - dot(aa1, nhat) * dot(bb0, nhat) + dot(bb1, aa0) -
                        nb1 * dot(aa0, nhat);
                if (su >= 0) {
                    const Vec3 uu0 = bank.base(su).at(i);
                    const Vec3 uu1 = bank.shifted(su).at(i);
                    const real nu1 = dot(uu1, nhat);
                    q_el += nu1 * dot(uu0, nhat);
                    q_et += dot(uu1, uu0) - nu1 * dot(uu0, nhat);
                    // ideal induction transport of the helicity pair. The
                    // longitudinal projector does not commute with the curl,
                    // so next to the projected phi terms the L part carries a
                    // phi/r compensation built from the potential.
                    const Vec3 e0 = uxb.at(i);
                    const Vec3 e1 = cross(uu1, bb1);
                    cl_phi += dot(e1, nhat) * dot(bb0, nhat) + dot(e0, nhat) * nb1;
                    cl_over_r += dot(nhat, cross(aa1, e0)) + dot(nhat, cross(e1, aa0));
                    cfull += dot(e1, bb0) + dot(e0, bb1);
                }
            }
            m.bLL_J *= inv_size;
            m.bL_Jb *= inv_size;
            m.JL_bb *= inv_size;
            m.bL3 *= inv_size;
            m.bL_bb *= inv_size;
            add_dissipation(out.d, m, W, phi, dphi, r, d_i);
            const real Wphi = W * phi;
            out.Q_EL += Wphi * q_el * inv_size;
            out.Q_ET += Wphi * q_et * inv_size;
            out.Q_ML += Wphi * q_ml * inv_size;
            out.Q_MT += Wphi * q_mt * inv_size;
            const real c_ml = (Wphi * cl_phi + W * (phi / r) * cl_over_r) * inv_size;
            out.C_ML += c_ml;
            out.C_MT += 2.0 * Wphi * cfull * inv_size - c_ml;
        }
    }
    return out;
}

AuditReport assemble_report(KhmBalance which, const VolumeBudget& b1, const VolumeBudget& b2,
                            real dt_gap, real factor_scale, real floor_value) {
    AuditReport rep;
    rep.balance = which;
    rep.floor = floor_value;
    switch (which) {
        case KhmBalance::energy_longitudinal:
            rep.lhs = (b2.Q_EL - b1.Q_EL) / dt_gap;
            rep.rhs = -(2.0 / 3.0) * factor_scale * 0.5 * (b1.d.D_EL + b2.d.D_EL);
            break;
        case KhmBalance::energy_transverse:
            rep.lhs = (b2.Q_ET - b1.Q_ET) / dt_gap;
            rep.rhs = -(4.0 / 3.0) * factor_scale * 0.5 * (b1.d.D_ET + b2.d.D_ET);
            break;
        case KhmBalance::helicity_longitudinal:
            rep.lhs = (b2.Q_ML - b1.Q_ML) / dt_gap - 0.5 * (b1.C_ML + b2.C_ML);
            rep.rhs = -(4.0 / 3.0) * factor_scale * 0.5 * (b1.d.D_ML + b2.d.D_ML);
            break;
        case KhmBalance::helicity_transverse:
            rep.lhs = (b2.Q_MT - b1.Q_MT) / dt_gap - 0.5 * (b1.C_MT + b2.C_MT);
            rep.rhs = -(8.0 / 3.0) * factor_scale * 0.5 * (b1.d.D_MT + b2.d.D_MT);
            break;
    }
    rep.residual = std::abs(rep.lhs - rep.rhs) /
                   std::max({std::abs(rep.lhs), std::abs(rep.rhs), floor_value});
    return rep;
}

std::array<AuditReport, 4> run_audit(const Snapshot& first, const Snapshot& second,
                                     const AuditOptions& opt) {
    if (first.grid == nullptr || second.grid == nullptr)
        throw PreconditionError("audit: snapshot without a grid");
    if (first.grid->n() != second.grid->n())
        throw PreconditionError("audit: snapshots live on different grids");
    if (opt.kernel == nullptr) throw ConfigError("audit: no kernel");
    if (opt.directions == nullptr) throw ConfigError("audit: no direction set");
    if (opt.radial_nodes < 2) throw ConfigError("audit: radial_nodes must be >= 2");
    opt.kernel->require_resolvable(first.grid->spacing());

    const real dt_gap = second.time - first.time;
    if (!(dt_gap > 0)) throw PreconditionError("audit: snapshots must be time-ordered");
    for (const Snapshot* s : {&first, &second}) {
        if (s->param_or("nu", 0.0) != 0.0 || s->param_or("eta", 0.0) != 0.0)
            throw PreconditionError(
                "audit: snapshots come from a dissipative run; the balance holds only without "
                "diffusion");
    }
    const bool hall = first.param_or("hallmhd", 0.0) != 0.0;
    if (hall != (second.param_or("hallmhd", 0.0) != 0.0))
        throw PreconditionError("audit: snapshots from different models");
    const real d_i = first.param_or("d_i", 1.0);

    const VolumeBudget v1 = measure_volume_budget(first, hall, d_i, opt);
    const VolumeBudget v2 = measure_volume_budget(second, hall, d_i, opt);

    real scale = std::max(max_norm(first.require_field("b")), max_norm(second.require_field("b")));
    if (hall) {
        scale = std::max(scale, max_norm(first.require_field("u")));
        scale = std::max(scale, max_norm(second.require_field("u")));
    }
    const real floor_value = 1e-12 * std::max(scale * scale * scale, 1e-300);

    const std::string resolution =
        "n=" + std::to_string(first.grid->n()) + " model=" + (hall ? "hallmhd" : "emhd") +
        " kernel=" + to_string(opt.kernel->profile()) + " eps=" + format_real(opt.kernel->epsilon()) +
        " directions=" + std::to_string(opt.directions->count()) +
        " radial=" + std::to_string(opt.radial_nodes) + " dt_gap=" + format_real(dt_gap) +
        " factor_scale=" + format_real(opt.factor_scale);

    std::array<AuditReport, 4> out;
    const std::array<KhmBalance, 4> order = {
        KhmBalance::energy_longitudinal, KhmBalance::energy_transverse,
        KhmBalance::helicity_longitudinal, KhmBalance::helicity_transverse};
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = assemble_report(order[i], v1, v2, dt_gap, opt.factor_scale, floor_value);
        out[i].resolution = resolution;
    }
    return out;
}

}  // namespace

AuditReport audit_khm(const Snapshot& first, const Snapshot& second, KhmBalance which,
                      const AuditOptions& opt) {
    return run_audit(first, second, opt)[static_cast<std::size_t>(which)];
}

std::array<AuditReport, 4> audit_khm_all(const Snapshot& first, const Snapshot& second,
                                         const AuditOptions& opt) {
    return run_audit(first, second, opt);
}

CoareaConstants verify_coarea_constants(const MollifierKernel& kernel, int radial_nodes) {
    const KernelMoments m = kernel_moments(kernel, radial_nodes);
    CoareaConstants c;
    c.m2 = m.m2;
    c.m3_dphi = m.m3_dphi;
    c.transverse_route = 0.375 * (c.m3_dphi - 2.0 * c.m2);
    c.longitudinal_route = 0.75 * c.m3_dphi;
    // The longitudinal route carries (3/2) m2 of the transverse block and
    // (3/2) m2 of the unprojected one; removing the former with the
    // transverse route leaves the assembled longitudinal constant and the
    // weight of the unprojected block relative to it.
    const real w = -(1.5 * c.m2) / c.transverse_route;
    c.eliminated = c.longitudinal_route / (1.0 + w);
    const real mixed = (1.5 * c.m2 + w * (-0.75 * c.m2)) / (1.0 + w);
    c.mixed_weight = mixed / c.eliminated;
    c.worst_deviation = std::max({std::abs(c.m2 - 1.0), std::abs(c.m3_dphi + 3.0),
                                  std::abs(c.transverse_route + 15.0 / 8.0),
                                  std::abs(c.longitudinal_route + 9.0 / 4.0),
                                  std::abs(c.eliminated + 5.0 / 4.0),
                                  std::abs(c.mixed_weight + 2.0 / 5.0)});
    return c;
}

LawScan scan_laws(const std::vector<const Snapshot*>& snapshots, const SeparationScan& scan,
                  const ScanOptions& opt) {
    if (opt.directions == nullptr) throw ConfigError("scan: no direction set");
    if (snapshots.empty()) throw ConfigError("scan: no snapshots");
    for (const Snapshot* s : snapshots)
        if (s == nullptr || s->grid == nullptr) throw ConfigError("scan: snapshot without a grid");
    const Grid& g = *snapshots.front()->grid;
    for (const Snapshot* s : snapshots)
        if (s->grid->n() != g.n()) throw ConfigError("scan: snapshots live on different grids");

    LawScan out;
    std::vector<real> usable;
    for (real lambda : scan.lambdas) {
        if (lambda >= g.spacing() && lambda <= box_length / 4.0)
            usable.push_back(lambda);
        else
            out.excluded_lambdas.push_back(lambda);
    }
    if (usable.empty()) throw ConfigError("scan: no separation inside the resolvable range");

    std::vector<real> sum_el(usable.size(), 0.0), sum_et(usable.size(), 0.0),
        sum_ml(usable.size(), 0.0);
    for (const Snapshot* snap : snapshots) {
        const bool hall = snap->param_or("hallmhd", 0.0) != 0.0;
        ShellQuad quad{opt.directions, snap->param_or("d_i", 1.0)};
        Transformer t(*snap->grid);
        const SpectralVector bs = t.forward(snap->require_field("b"));
        SpectralVector us;
        if (hall) us = t.forward(snap->require_field("u"));
        for (std::size_t j = 0; j < usable.size(); ++j) {
            const ShellFunctionals f =
                shell_functionals(bs, hall ? &us : nullptr, usable[j], quad);
            LawScanRecord rec;
            rec.lambda = usable[j];
            rec.S_EL = f.S_EL;
            rec.S_ET = f.S_ET;
            rec.S_E_bar = f.S_E_bar;
            rec.S_EL_bar = f.S_EL_bar;
            rec.S_ET_bar = f.S_ET_bar;
            rec.S_ML = f.S_ML;
            rec.S_MT = f.S_MT;
            rec.S_HL = f.S_HL;
            rec.model = hall ? "hallmhd" : "emhd";
            rec.t = snap->time;
            out.records.push_back(rec);
            sum_el[j] += f.S_EL;
            sum_et[j] += f.S_ET;
            sum_ml[j] += f.S_ML;
        }
    }

    PlateauReport& p = out.plateau;
    p.eps_E = opt.eps_E;
    p.eps_M = opt.eps_M;
    p.compensated = opt.eps_E > 0;
    const real denom_E = p.compensated ? opt.eps_E : 1.0;
    const real denom_M = opt.eps_M != 0.0 ? opt.eps_M : 1.0;
    const real inv_count = 1.0 / static_cast<real>(snapshots.size());
    p.lambda = usable;
    for (std::size_t j = 0; j < usable.size(); ++j) {
        p.ratio_EL.push_back(-1.25 * sum_el[j] * inv_count / denom_E);
        p.ratio_ET.push_back(-1.875 * sum_et[j] * inv_count / denom_E);
        p.ratio_ML.push_back(-1.25 * sum_ml[j] * inv_count / denom_M);
    }

    // Widest contiguous band of separations whose longitudinal ratio stays
    // inside the window, widest measured in lambda_hi / lambda_lo.
    std::size_t best_lo = 0, best_hi = 0;
    bool found = false;
    std::size_t j = 0;
    while (j < usable.size()) {
        if (p.ratio_EL[j] < opt.window.ratio_min || p.ratio_EL[j] > opt.window.ratio_max) {
            ++j;
            continue;
        }
        std::size_t k = j;
        while (k + 1 < usable.size() && p.ratio_EL[k + 1] >= opt.window.ratio_min &&
               p.ratio_EL[k + 1] <= opt.window.ratio_max)
            ++k;
        if (!found || usable[k] / usable[j] > usable[best_hi] / usable[best_lo]) {
            best_lo = j;
            best_hi = k;
            found = true;
        }
        j = k + 1;
    }
    p.has_plateau = found;
    if (found) {
        p.lambda_lo = usable[best_lo];
        p.lambda_hi = usable[best_hi];
        p.decades = std::log10(p.lambda_hi / p.lambda_lo);
        for (std::size_t i = best_lo; i <= best_hi; ++i)
            p.transverse_agreement =
                std::max(p.transverse_agreement, std::abs(p.ratio_ET[i] / p.ratio_EL[i] - 1.0));
    }
    return out;
}

void write_law_scan_csv(std::ostream& os, const std::vector<LawScanRecord>& records) {
    os << "t,model,lambda,S_EL,S_ET,S_E_bar,S_EL_bar,S_ET_bar,S_ML,S_MT,S_HL\n";
    for (const LawScanRecord& r : records) {
        os << format_real(r.t) << ',' << r.model << ',' << format_real(r.lambda) << ','
           << format_real(r.S_EL) << ',' << format_real(r.S_ET) << ',' << format_real(r.S_E_bar)
           << ',' << format_real(r.S_EL_bar) << ',' << format_real(r.S_ET_bar) << ','
           << format_real(r.S_ML) << ',' << format_real(r.S_MT) << ',' << format_real(r.S_HL)
           << '\n';
    }
}

}  // namespace khm
