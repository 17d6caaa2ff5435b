#include <doctest.h>

#include <cmath>

#include "khm/core.hpp"
#include "khm/kernel.hpp"

using namespace khm;

namespace {

// Composite Simpson on [a, b], an independent rule to check the
// Gauss-Legendre moments against.
template <typename F>
real simpson(F f, real a, real b, int panels) {
    const real h = (b - a) / (2 * panels);
    real sum = f(a) + f(b);
    for (int i = 1; i < 2 * panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace

TEST_CASE("gauss_legendre integrates polynomials exactly and smooth functions to rounding") {
    const RadialRule r4 = gauss_legendre(4, 0.0, 2.0);
    real x7 = 0;
    real wsum = 0;
    for (int i = 0; i < r4.size(); ++i) {
        x7 += r4.w[i] * std::pow(r4.r[i], 7);
        wsum += r4.w[i];
    }
    CHECK(x7 == doctest::Approx(256.0 / 8.0).epsilon(1e-13));  // degree 7 = 2n-1
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));

    const RadialRule r16 = gauss_legendre(16, -1.0, 3.0);
    real ex = 0;
    for (int i = 0; i < r16.size(); ++i) ex += r16.w[i] * std::exp(r16.r[i]);
    CHECK(ex == doctest::Approx(std::exp(3.0) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("profile registry and support radii") {
    CHECK(kernel_profile_from_string("bump") == KernelProfile::bump);
    CHECK(kernel_profile_from_string("gaussian") == KernelProfile::gaussian);
    CHECK_THROWS_AS(kernel_profile_from_string("tophat"), ConfigError);
    CHECK(to_string(KernelProfile::bump) == "bump");
    CHECK(to_string(KernelProfile::gaussian) == "gaussian");

    const MollifierKernel bump(KernelProfile::bump, 0.25);
    const MollifierKernel gauss(KernelProfile::gaussian, 0.25);
    CHECK(bump.support_radius() == doctest::Approx(1.0));
    CHECK(gauss.support_radius() == doctest::Approx(9.0));
    CHECK(bump.epsilon() == doctest::Approx(0.25));
    CHECK(bump.phi(1.0) == 0.0);
    CHECK(bump.phi(1.5) == 0.0);
    // the gaussian profile is not hard-truncated; beyond the nominal support
    // its mass is far below every tolerance in the toolkit
    CHECK(gauss.phi(9.5) < 1e-20);
}

TEST_CASE("bump profile shape is the normalized exp(-1/(1-r^2))") {
    const MollifierKernel k(KernelProfile::bump, 1.0);
    // normalization-free ratio oracle
    const real expected = std::exp(-1.0 / (1.0 - 0.25)) / std::exp(-1.0);
    CHECK(k.phi(0.5) / k.phi(0.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gaussian profile matches the (2 pi)^{-3/2} closed form") {
    const MollifierKernel k(KernelProfile::gaussian, 1.0);
    const real c = std::pow(2.0 * pi, -1.5);
    CHECK(k.phi(0.0) == doctest::Approx(c).epsilon(1e-10));
    CHECK(k.phi(1.3) == doctest::Approx(c * std::exp(-1.3 * 1.3 / 2.0)).epsilon(1e-10));
}

TEST_CASE("dphi is the derivative of phi") {
    for (const KernelProfile profile : {KernelProfile::bump, KernelProfile::gaussian}) {
        const MollifierKernel k(profile, 1.0);
        const real h = 1e-6;
        for (const real r : {0.2, 0.4, 0.7}) {
            const real fd = (k.phi(r + h) - k.phi(r - h)) / (2.0 * h);
            CHECK(k.dphi(r) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("radial moments hit the closed-form constants for both profiles") {
    for (const KernelProfile profile : {KernelProfile::bump, KernelProfile::gaussian}) {
        const MollifierKernel k(profile, 1.0);
        const KernelMoments m = kernel_moments(k);
        CAPTURE(to_string(profile));
        CHECK(m.m2 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.m3_dphi == doctest::Approx(-3.0).epsilon(1e-12));
        CHECK(m.m2_T == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
        // integration by parts ties the two moments together independently
        // of the normalization: 4 pi int r^3 phi' = -3 * 4 pi int r^2 phi
        CHECK(m.m3_dphi == doctest::Approx(-3.0 * m.m2).epsilon(1e-12));
    }
}

TEST_CASE("moments agree with an independent composite-Simpson quadrature") {
    for (const KernelProfile profile : {KernelProfile::bump, KernelProfile::gaussian}) {
        const MollifierKernel k(profile, 1.0);
        const real R = k.support_radius();
        const real m2 = simpson([&](real r) { return 4.0 * pi * r * r * k.phi(r); }, 0.0, R, 4000);
        const real m3 =
            simpson([&](real r) { return 4.0 * pi * r * r * r * k.dphi(r); }, 0.0, R, 4000);
        const KernelMoments m = kernel_moments(k);
        CHECK(m.m2 == doctest::Approx(m2).epsilon(1e-9));
        CHECK(m.m3_dphi == doctest::Approx(m3).epsilon(1e-9));
    }
}

TEST_CASE("phi_eps keeps unit mass at every scale") {
    for (const real eps : {0.3, 1.7}) {
        const MollifierKernel k(KernelProfile::bump, eps);
        const real R = k.support_radius() * eps;
        const real mass =
            simpson([&](real r) { return 4.0 * pi * r * r * k.phi_eps(r); }, 0.0, R, 4000);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
        // dphi_eps is the radial derivative of phi_eps
        const real h = 1e-6;
        const real fd = (k.phi_eps(0.4 * R + h) - k.phi_eps(0.4 * R - h)) / (2.0 * h);
        CHECK(k.dphi_eps(0.4 * R) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("resolvability gate refuses kernels thinner than two grid cells") {
    const MollifierKernel k(KernelProfile::bump, 0.3);
    CHECK_NOTHROW(k.require_resolvable(0.15));
    CHECK_THROWS_AS(k.require_resolvable(0.2), ConfigError);
}
