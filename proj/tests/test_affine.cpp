#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vsq/affine.hpp"

using namespace vsq;

namespace {

ModelParams scalar_model(const ScalarKernel& k, double beta, double sigma, double b, double x0) {
    ModelParams p;
    p.kernel = KernelSpec{{k}};
    p.b = Eigen::VectorXd::Constant(1, b);
    p.beta = Eigen::MatrixXd::Constant(1, 1, beta);
    p.sigma = Eigen::VectorXd::Constant(1, sigma);
    p.x0 = Eigen::VectorXd::Constant(1, x0);
    return p;
}

Eigen::VectorXcd vec1(cplx u) { return Eigen::VectorXcd::Constant(1, u); }

}  // namespace

TEST_SUITE("affine") {

TEST_CASE("trivial transforms") {
    const ModelParams p = scalar_model(ScalarKernel::fractional(0.3), -1.0, 0.5, 0.2, 1.0);
    CHECK(std::abs(log_cf(p, 1.0, MeasureForcing{}, 0.01).exponent) == 0.0);
    const ModelParams z = scalar_model(ScalarKernel::fractional(0.3), -1.0, 0.5, 0.0, 0.0);
    CHECK(std::abs(log_cf(z, 1.0, MeasureForcing::point(0.0, vec1(cplx(-1.0, 2.0))), 0.01).exponent) == 0.0);
}

TEST_CASE("classical CIR transform") {
    const double beta = -0.8, sigma = 0.6, b = 0.3, x0 = 0.9, t = 2.0;
    const ModelParams p = scalar_model(ScalarKernel::constant(), beta, sigma, b, x0);
    for (cplx u : {cplx(-0.5), cplx(-1.0, 1.0), cplx(0.0, 2.0)}) {
        const LogCf r = log_cf(p, t, MeasureForcing::point(0.0, vec1(u)), 0.0005);
        const cplx ref = oracle::cir_log_cf(x0, b, beta, sigma, u, t);
        INFO("u=" << u);
        CHECK(std::abs(r.exponent - ref) <= 2e-3 * std::max(1.0, std::abs(ref)));
        CHECK(r.relative_gap <= 1e-10);
    }
}

TEST_CASE("dual forms agree for measures with atoms and densities") {
    ModelParams p;
    p.kernel = KernelSpec{{ScalarKernel::gamma(0.2, 0.5), ScalarKernel::fractional(0.4)}};
    p.beta.resize(2, 2);
    p.beta << -0.9, 0.3, 0.4, -1.2;
    p.sigma = Eigen::Vector2d(0.6, 0.8);
    p.b = Eigen::Vector2d(0.3, 0.1);
    p.x0 = Eigen::Vector2d(0.4, 1.1);
    const double h = 0.01, t = 2.0;
    MeasureForcing f;
    Eigen::VectorXcd u(2), v(2);
    u << cplx(-0.5, 1.0), cplx(-0.1, -0.3);
    v << cplx(-1.0, 0.0), cplx(0.0, 0.7);
    f.atoms.push_back({0.0, u});
    f.atoms.push_back({0.7, v});
    for (std::size_t k = 0; k <= 200; ++k) {
        Eigen::VectorXcd d(2);
        d << cplx(-0.2, 0.1 * std::sin(k * h)), cplx(-0.05, 0.0);
        f.density.push_back(d);
    }
    const LogCf r = log_cf(p, t, f, h);
    CHECK(r.relative_gap <= 1e-4);
    CHECK(r.exponent.real() <= 0.0);
}

TEST_CASE("limit exponent") {
    const ModelParams p = scalar_model(ScalarKernel::gamma(0.25, 1.0), -0.5, 0.4, 0.2, 1.0);
    CHECK(std::abs(limit_log_laplace(p, vec1(0.0)).exponent) == 0.0);
    // derivative at 0 is the stationary mean
    const double eps = 1e-4;
    const cplx dp = limit_log_laplace(p, vec1(-eps)).exponent;
    const cplx dpp = limit_log_laplace(p, vec1(-2.0 * eps)).exponent;
    const double slope = (4.0 * dp.real() - dpp.real()) / (2.0 * eps);  // one-sided second-order difference
    CHECK(-slope == doctest::Approx(0.8).epsilon(1e-3));
    const LimitExponent e = limit_log_laplace(p, vec1(cplx(-0.7, 0.4)));
    CHECK(e.relative_gap <= 1e-4);
    CHECK(e.status == TailStatus::Converged);
}

TEST_CASE("classical CIR limit is the Gamma stationary law") {
    const double beta = -1.2, sigma = 0.7, b = 0.4;
    for (double x0 : {0.0, 1.0, 5.0}) {
        const ModelParams p = scalar_model(ScalarKernel::constant(), beta, sigma, b, x0);
        for (cplx u : {cplx(-0.5), cplx(-1.0, 1.5)}) {
            const auto law = oracle::cir_stationary_law(b, beta, sigma);
            const cplx ref = -law.shape() * std::log(1.0 - u * law.scale());
            const LimitExponent e = limit_log_laplace(p, vec1(u));
            INFO("x0=" << x0 << " u=" << u);
            CHECK(std::abs(e.exponent - ref) <= 5e-3 * std::abs(ref));
        }
    }
}

TEST_CASE("stationary finite-dimensional exponent") {
    const ModelParams p = scalar_model(ScalarKernel::gamma(0.3, 1.0), -0.5, 0.4, 0.2, 1.0);
    const Eigen::VectorXcd u = vec1(cplx(-0.6, 0.3));
    const LimitExponent one = stationary_fdd_log_cf(p, {3.0}, {u});
    const LimitExponent direct = limit_log_laplace(p, u);
    CHECK(std::abs(one.exponent - direct.exponent) <= 1e-12 * std::abs(direct.exponent));
    const LimitExponent zero = stationary_fdd_log_cf(p, {0.0, 1.0}, {vec1(0.0), vec1(0.0)});
    CHECK(std::abs(zero.exponent) == 0.0);
    // decorrelation: at a large separation the joint exponent splits into two marginals
    const LimitExponent far = stationary_fdd_log_cf(p, {0.0, 30.0}, {u, u});
    CHECK(std::abs(far.exponent - 2.0 * direct.exponent) <= 1e-3 * std::abs(direct.exponent));
    CHECK_THROWS_AS(stationary_fdd_log_cf(p, {1.0, 0.0}, {u, u}), std::invalid_argument);
}

}
