#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "vsq/kernels.hpp"

using namespace vsq;

TEST_SUITE("kernels") {

TEST_CASE("point values") {
    CHECK(ScalarKernel::fractional(0.5).eval(3.7) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ScalarKernel::gamma(0.5, 1.0).eval(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    const double inv_gamma_075 = 1.0 / boost::math::tgamma(0.75);
    CHECK(ScalarKernel::fractional(0.25).eval(1.0) == doctest::Approx(inv_gamma_075).epsilon(1e-13));
    CHECK(inv_gamma_075 == doctest::Approx(0.816049).epsilon(1e-6));
    CHECK(ScalarKernel::constant().eval(0.0) == 1.0);
}

TEST_CASE("singular kernels reject t = 0 and negative times") {
    CHECK_THROWS_AS(ScalarKernel::fractional(0.3).eval(0.0), std::domain_error);
    CHECK_THROWS_AS(ScalarKernel::gamma(0.3, 1.0).eval(-1.0), std::domain_error);
    CHECK_THROWS_AS(ScalarKernel::fractional(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ScalarKernel::fractional(0.7), std::invalid_argument);
    CHECK_THROWS_AS(ScalarKernel::gamma(0.3, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(kernel_kind_from_string("power"), std::invalid_argument);
}

TEST_CASE("cell integrals") {
    const double antiderivative = 1.0 / (0.75 * boost::math::tgamma(0.75));
    CHECK(ScalarKernel::fractional(0.25).cell_integral(0.0, 1.0) == doctest::Approx(antiderivative).epsilon(1e-12));
    CHECK(antiderivative == doctest::Approx(1.088066).epsilon(1e-6));
    CHECK(ScalarKernel::constant().cell_integral(2.0, 5.0) == doctest::Approx(3.0));
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(ScalarKernel::gamma(0.5, 2.0).cell_integral(0.0, inf) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(ScalarKernel::gamma(0.3, 2.0).total_integral() == doctest::Approx(std::pow(2.0, -0.8)).epsilon(1e-12));
    CHECK(std::isinf(ScalarKernel::fractional(0.3).total_integral()));
    CHECK_THROWS_AS(ScalarKernel::constant().cell_integral(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("gamma cell integrals against midpoint quadrature") {
    const ScalarKernel k = ScalarKernel::gamma(0.35, 0.7);
    const double a = 0.4, b = 2.3;
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += k.eval(a + (i + 0.5) * (b - a) / n);
    CHECK(k.cell_integral(a, b) == doctest::Approx(sum * (b - a) / n).epsilon(1e-9));
}

TEST_CASE("squared small-ball integral") {
    // ∫_0^h t^{2H-1}/Γ(H+1/2)^2 = h^{2H} / (2H Γ(H+1/2)^2)
    const double H = 0.3, h = 0.01, g = boost::math::tgamma(H + 0.5);
    CHECK(ScalarKernel::fractional(H).integral_squared(h) == doctest::Approx(std::pow(h, 2 * H) / (2 * H * g * g)).epsilon(1e-12));
    CHECK(ScalarKernel::constant().integral_squared(0.25) == doctest::Approx(0.25));
}

TEST_CASE("cell weights average the kernel") {
    const KernelSpec spec{{ScalarKernel::fractional(0.3), ScalarKernel::gamma(0.5, 1.0)}};
    const double h = 0.1;
    const CellWeights w(spec, h, 5);
    for (std::size_t d = 0; d < 5; ++d) {
        const double a = static_cast<double>(d) * h, b = a + h;
        CHECK(w(0, d) * h == doctest::Approx(spec[0].cell_integral(a, b)).epsilon(1e-13));
        CHECK(w(1, d) * h == doctest::Approx(std::exp(-a) - std::exp(-b)).epsilon(1e-12));
    }
}

TEST_CASE("grid helpers") {
    const GridSpec g = GridSpec::covering(0.1, 1.0);
    CHECK(g.n_steps == 10);
    CHECK(g.horizon() == doctest::Approx(1.0));
    CHECK_THROWS_AS(GridSpec({0.0, 10}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec({0.1, 0}).validate(), std::invalid_argument);
}

TEST_CASE("admissibility exponents") {
    const GridSpec probe{0.01, 200};
    const AdmissibilityReport frac = check_admissibility(KernelSpec{{ScalarKernel::fractional(0.3)}}, probe);
    CHECK(frac.gamma_estimate == doctest::Approx(0.6).epsilon(0.05));
    CHECK(frac.alpha_estimate == doctest::Approx(0.6).epsilon(0.05));
    CHECK(frac.monotone_ok);
    CHECK(frac.nonneg_ok);
    CHECK(frac.condition_K_ok);
    CHECK(frac.condition_R_ok);

    const AdmissibilityReport cst = check_admissibility(KernelSpec{{ScalarKernel::constant()}}, probe);
    CHECK(cst.gamma_estimate == doctest::Approx(1.0).epsilon(0.02));

    const AdmissibilityReport gam = check_admissibility(KernelSpec{{ScalarKernel::gamma(0.25, 1.0)}}, probe);
    CHECK(gam.gamma_estimate == doctest::Approx(0.5).epsilon(0.06));

    CHECK_THROWS_AS(check_admissibility(KernelSpec{{ScalarKernel::constant()}}, GridSpec{0.01, 10}), std::invalid_argument);
}

TEST_CASE("Mittag-Leffler function") {
    CHECK(mittag_leffler(1.0, -1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    CHECK(mittag_leffler(1.0, 0.0) == doctest::Approx(1.0));
    for (double alpha : {0.55, 0.6, 0.8, 0.95, 1.0})
        for (double z : {-0.01, -0.5, -1.0, -3.0, -8.0, -20.0, -45.0}) {
            const double ref = oracle::mittag_leffler(alpha, z);
            INFO("alpha=" << alpha << " z=" << z);
            CHECK(std::fabs(mittag_leffler(alpha, z) - ref) <= 1e-10 * std::max(1.0, std::fabs(ref)));
        }
    CHECK(e_alpha(0.8, 2.0) == doctest::Approx(oracle::e_alpha(0.8, 2.0)).epsilon(1e-10));
}

TEST_CASE("Sobolev seminorm") {
    const SobolevSeminorm c = kernel_sobolev_seminorm(KernelSpec{{ScalarKernel::constant()}}, 0.25, 2.0, 1.0);
    CHECK_FALSE(c.divergent);
    CHECK(std::isfinite(c.value));
    CHECK(c.second_term == 0.0);
    // ∫_0^1 t^{-1/2} dt = 2
    CHECK(c.first_term == doctest::Approx(2.0).epsilon(1e-6));

    const SobolevSeminorm ok = kernel_sobolev_seminorm(KernelSpec{{ScalarKernel::fractional(0.3)}}, 0.2, 2.0, 1.0);
    CHECK_FALSE(ok.divergent);
    CHECK(std::isfinite(ok.value));
    const SobolevSeminorm bad = kernel_sobolev_seminorm(KernelSpec{{ScalarKernel::fractional(0.3)}}, 0.45, 2.0, 1.0);
    CHECK(bad.divergent);
    CHECK(std::isinf(bad.value));
}

}
