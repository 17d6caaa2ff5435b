#include "khm/kernel.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>

namespace khm {

RadialRule gauss_legendre(int nodes, real a, real b) {
    if (nodes < 1) throw ConfigError("gauss_legendre: need at least one node");
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<size_t>(nodes));
    RadialRule rule;
    rule.r.resize(nodes);
    rule.w.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        double xi, wi;
        gsl_integration_glfixed_point(a, b, static_cast<size_t>(i), &xi, &wi, t);
        rule.r[i] = xi;
        rule.w[i] = wi;
    }
    gsl_integration_glfixed_table_free(t);
    return rule;
}

RadialRule graded_radial_rule(int nodes, real R, real grading) {
    if (grading < 1.0) throw ConfigError("graded_radial_rule: grading must be >= 1");
    RadialRule base = gauss_legendre(nodes, 0.0, 1.0);
    RadialRule rule;
    rule.r.resize(nodes);
    rule.w.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        const real t = base.r[i];
        rule.r[i] = R * std::pow(t, grading);
        rule.w[i] = base.w[i] * R * grading * std::pow(t, grading - 1.0);
    }
    return rule;
}

KernelProfile kernel_profile_from_string(const std::string& name) {
    if (name == "bump") return KernelProfile::bump;
    if (name == "gaussian") return KernelProfile::gaussian;
    throw ConfigError("unknown kernel profile '" + name + "' (expected bump|gaussian)");
}

std::string to_string(KernelProfile p) {
    return p == KernelProfile::bump ? "bump" : "gaussian";
}

MollifierKernel::MollifierKernel(KernelProfile profile, real epsilon)
    : profile_(profile), eps_(epsilon) {
    if (!(epsilon > 0)) throw ConfigError("kernel.epsilon must be positive");
    if (profile_ == KernelProfile::bump) {
        support_ = 1.0;
        // normalize 4*pi int_0^1 r^2 C exp(-1/(1-r^2)) dr = 1
        bump_norm_ = 1.0;
        RadialRule rule = gauss_legendre(256, 0.0, 1.0);
        real m = 0;
        for (int i = 0; i < rule.size(); ++i)
            m += rule.w[i] * rule.r[i] * rule.r[i] * phi(rule.r[i]);
        bump_norm_ = 1.0 / (4.0 * pi * m);
    } else {
        support_ = 9.0;  // exp(-81/2) ~ 2.6e-18, negligible against every tolerance here
    }
    tail_rule_ = gauss_legendre(128, 0.0, 1.0);
}

void MollifierKernel::require_resolvable(real grid_spacing) const {
    if (eps_ < 2.0 * grid_spacing)
        throw ConfigError("kernel.epsilon = " + std::to_string(eps_) +
                          " below resolvability threshold 2*spacing = " +
                          std::to_string(2.0 * grid_spacing));
}

real MollifierKernel::phi(real r) const {
    if (profile_ == KernelProfile::bump) {
        if (r >= 1.0) return 0.0;
        return bump_norm_ * std::exp(-1.0 / (1.0 - r * r));
    }
    static const real c = std::pow(2.0 * pi, -1.5);
    return c * std::exp(-0.5 * r * r);
}

real MollifierKernel::dphi(real r) const {
    if (profile_ == KernelProfile::bump) {
        if (r >= 1.0) return 0.0;
        const real d = 1.0 - r * r;
        return phi(r) * (-2.0 * r / (d * d));
    }
    return -r * phi(r);
}

real MollifierKernel::phi_T(real r) const {
    // phi_T(r) = 2 int_r^support phi(s)/s ds, zero outside the support.
    if (r >= support_) return 0.0;
    if (r <= 0) throw PreconditionError("phi_T: r must be positive (logarithmic singularity at 0)");
    real acc = 0;
    for (int i = 0; i < tail_rule_.size(); ++i) {
        const real s = r + (support_ - r) * tail_rule_.r[i];
        acc += tail_rule_.w[i] * phi(s) / s;
    }
    return 2.0 * (support_ - r) * acc;
}

real MollifierKernel::part_eps(RadialPart part, real r) const {
    switch (part) {
        case RadialPart::full: return phi_eps(r);
        case RadialPart::longitudinal: return phi_L_eps(r);
        case RadialPart::transverse: return phi_T_eps(r);
    }
    return 0;
}

KernelMoments kernel_moments(const MollifierKernel& k, int nodes) {
    RadialRule rule = gauss_legendre(nodes, 0.0, k.support_radius());
    KernelMoments m{0, 0, 0};
    for (int i = 0; i < rule.size(); ++i) {
        const real r = rule.r[i], w = rule.w[i];
        m.m2 += w * r * r * k.phi(r);
        m.m3_dphi += w * r * r * r * k.dphi(r);
        m.m2_T += w * r * r * k.phi_T(r);
    }
    m.m2 *= 4.0 * pi;
    m.m3_dphi *= 4.0 * pi;
    m.m2_T *= 4.0 * pi;
    return m;
}

}  // namespace khm
