#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vsq/resolvents.hpp"
#include "vsq/riccati.hpp"

using namespace vsq;

namespace {

ModelParams scalar_model(const ScalarKernel& k, double beta, double sigma) {
    ModelParams p;
    p.kernel = KernelSpec{{k}};
    p.b = Eigen::VectorXd::Constant(1, 0.0);
    p.beta = Eigen::MatrixXd::Constant(1, 1, beta);
    p.sigma = Eigen::VectorXd::Constant(1, sigma);
    p.x0 = Eigen::VectorXd::Constant(1, 0.0);
    return p;
}

Eigen::VectorXcd vec1(cplx u) { return Eigen::VectorXcd::Constant(1, u); }

double l2_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double h) {
    return std::sqrt(h * (a - b).cwiseAbs2().sum());
}

}  // namespace

TEST_SUITE("riccati") {

TEST_CASE("quadratic map") {
    ModelParams p = scalar_model(ScalarKernel::constant(), -1.0, std::sqrt(2.0));
    CHECK(std::abs(quadratic_map(p, vec1(0.0))(0)) == 0.0);
    CHECK(std::abs(quadratic_map(p, vec1(-1.0))(0) - cplx(2.0)) < 1e-14);

    ModelParams q;
    q.kernel = KernelSpec::uniform(2, ScalarKernel::constant());
    q.beta.resize(2, 2);
    q.beta << -1.0, 1.0, 0.0, -2.0;
    q.sigma = Eigen::Vector2d(1.0, 1.0);
    q.b = Eigen::Vector2d::Zero();
    q.x0 = Eigen::Vector2d::Zero();
    Eigen::VectorXcd u(2);
    u << cplx(0, 1), 0.0;
    const Eigen::VectorXcd r = quadratic_map(q, u);
    CHECK(std::abs(r(0) - cplx(-0.5, -1.0)) < 1e-14);
    CHECK(std::abs(r(1) - cplx(0.0, 1.0)) < 1e-14);

    // R_i pairs u with the i-th column of β
    ModelParams qt = q;
    qt.beta << -1.0, 0.0, 1.0, -2.0;
    const Eigen::VectorXcd rt = quadratic_map(qt, u);
    CHECK(std::abs(rt(0) - cplx(-0.5, -1.0)) < 1e-14);
    CHECK(std::abs(rt(1)) < 1e-14);

    // the Jacobian matches central differences
    Eigen::VectorXcd v(2);
    v << cplx(-0.3, 0.7), cplx(-1.1, -0.2);
    const Eigen::MatrixXcd J = quadratic_map_jacobian(q, v);
    for (int j = 0; j < 2; ++j) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(2);
        e(j) = 1e-6;
        const Eigen::VectorXcd fd = (quadratic_map(q, v + e) - quadratic_map(q, v - e)) / 2e-6;
        CHECK((fd - J.col(j)).norm() < 1e-8);
    }
}

TEST_CASE("zero forcing gives zero") {
    const ModelParams p = scalar_model(ScalarKernel::fractional(0.3), -1.0, 0.5);
    const RiccatiSolution s = solve_riccati(p, MeasureForcing{}, GridSpec{0.01, 100});
    CHECK(s.values().cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.tail().int_psi.norm() == 0.0);
    CHECK(s.tail().int_R.norm() == 0.0);
    CHECK(s.tail().int_psi_sq.norm() == 0.0);
}

TEST_CASE("constant kernel matches the Riccati ODE") {
    const double beta = -1.0, sigma = 0.8;
    const ModelParams p = scalar_model(ScalarKernel::constant(), beta, sigma);
    for (cplx u : {cplx(-0.5), cplx(-2.0), cplx(-1.0, 1.0)}) {
        const GridSpec g{0.005, 1000};
        const RiccatiSolution s = solve_riccati(p, MeasureForcing::point(0.0, vec1(u)), g);
        double err = 0.0;
        for (std::size_t k = 1; k <= g.n_steps; ++k)
            err = std::max(err, std::abs(s.psi(k)(0) - oracle::riccati_ode(beta, sigma, u, g.node(k))));
        INFO("u=" << u);
        CHECK(err <= 5.0 * g.step);
        CHECK(s.residual() < 1e-12);
    }
}

TEST_CASE("real forcing obeys the L1 bound") {
    const ModelParams p = scalar_model(ScalarKernel::fractional(0.3), -0.7, 0.6);
    const GridSpec g{0.01, 400};
    MeasureForcing f;
    f.atoms.push_back({0.0, vec1(-1.5)});
    f.atoms.push_back({1.0, vec1(-0.5)});
    const RiccatiSolution s = solve_riccati(p, f, g);
    CHECK(s.values().real().maxCoeff() <= 1e-10);
    const ResolventPair E = resolvent_second_kind(p.kernel, p.beta.transpose(), g);
    const double l1E = E.E_cumulative(g.n_steps).cwiseAbs().sum();
    CHECK(s.lp_norm(1.0) <= f.total_variation(g) * l1E);
}

TEST_CASE("directional derivative") {
    ModelParams p;
    p.kernel = KernelSpec{{ScalarKernel::fractional(0.3), ScalarKernel::gamma(0.4, 1.0)}};
    p.beta.resize(2, 2);
    p.beta << -1.0, 0.4, 0.2, -0.6;
    p.sigma = Eigen::Vector2d(0.7, 0.4);
    p.b = Eigen::Vector2d::Zero();
    p.x0 = Eigen::Vector2d::Zero();
    const GridSpec g{0.01, 300};
    Eigen::VectorXcd u(2);
    u << cplx(-0.4, 0.3), cplx(-0.2, -0.5);

    SUBCASE("base zero gives the transposed resolvent") {
        const Eigen::MatrixXcd D = directional_derivative(p, MeasureForcing{}, MeasureForcing::point(0.0, u), g);
        const ResolventPair E = resolvent_second_kind(p.kernel, p.beta.transpose(), g);
        for (std::size_t k = 1; k <= g.n_steps; ++k)
            CHECK((D.col(static_cast<Eigen::Index>(k)) - E.E(k).cast<cplx>() * u).norm() < 1e-11);
    }
    SUBCASE("zero direction gives zero") {
        const Eigen::MatrixXcd D = directional_derivative(p, MeasureForcing::point(0.0, u), MeasureForcing{}, g);
        CHECK(D.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("finite differences converge linearly") {
        Eigen::VectorXcd v(2);
        v << cplx(-0.3, 0.0), cplx(0.0, 0.4);
        MeasureForcing base = MeasureForcing::point(0.0, u);
        const Eigen::MatrixXcd D = directional_derivative(p, base, MeasureForcing::point(0.0, v), g);
        const Eigen::MatrixXcd psi = solve_riccati(p, base, g).values();
        std::vector<double> errs;
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            const Eigen::MatrixXcd shifted = solve_riccati(p, MeasureForcing::point(0.0, u + eps * v), g).values();
            errs.push_back(l2_distance((shifted - psi) / eps, D, g.step));
        }
        for (std::size_t k = 0; k < 3; ++k) CHECK(errs[k] <= 10.0 * (k == 0 ? 1e-2 : k == 1 ? 1e-3 : 1e-4));
        CHECK(errs[0] / errs[1] == doctest::Approx(10.0).epsilon(0.2));
    }
}

TEST_CASE("logistic tail integral") {
    const ModelParams p = scalar_model(ScalarKernel::constant(), -1.0, std::sqrt(2.0));
    const RiccatiSolution s = solve_riccati(p, MeasureForcing::point(0.0, vec1(-1.0)), GridSpec{0.001, 40000});
    CHECK(s.tail().status == TailStatus::Converged);
    CHECK(s.tail().int_psi(0).real() == doctest::Approx(-std::log(2.0)).epsilon(2e-3));
    CHECK(oracle::riccati_ode_integral(-1.0, std::sqrt(2.0), -1.0, 40.0).real() ==
          doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("real tail integral obeys the resolvent bound") {
    const ModelParams p = scalar_model(ScalarKernel::gamma(0.3, 1.0), -0.5, 0.5);
    const GridSpec g{0.01, 4000};
    const RiccatiSolution s = solve_riccati(p, MeasureForcing::point(0.0, vec1(-2.0)), g);
    CHECK(std::abs(s.tail().int_psi(0)) <= 2.0 * (2.0 / 3.0));
}

TEST_CASE("Lipschitz in the forcing and continuous in the parameters") {
    const GridSpec g{0.01, 300};
    const ModelParams p = scalar_model(ScalarKernel::gamma(0.3, 0.5), -0.8, 0.7);
    const MeasureForcing base = MeasureForcing::point(0.0, vec1(cplx(-1.0, 0.5)));
    const Eigen::MatrixXcd psi = solve_riccati(p, base, g).values();
    std::vector<double> d;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const Eigen::MatrixXcd q = solve_riccati(p, MeasureForcing::point(0.0, vec1(cplx(-1.0 - eps, 0.5))), g).values();
        d.push_back(l2_distance(q, psi, g.step) / eps);
    }
    CHECK(d[1] <= 1.2 * d[0] + 1e-12);
    CHECK(d[2] <= 1.2 * d[1] + 1e-12);

    std::vector<double> gaps;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
        ModelParams q = p;
        q.beta(0, 0) += delta;
        q.sigma(0) += delta;
        q.kernel = KernelSpec{{ScalarKernel::gamma(0.3 - delta / 10, 0.5 + delta)}};
        gaps.push_back(l2_distance(solve_riccati(q, base, g).values(), psi, g.step));
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
    CHECK(gaps[2] < 1e-2);
}

TEST_CASE("forcing validation") {
    const ModelParams p = scalar_model(ScalarKernel::constant(), -1.0, 1.0);
    CHECK_THROWS_AS(solve_riccati(p, MeasureForcing::point(0.0, vec1(0.5)), GridSpec{0.1, 10}), std::invalid_argument);
    CHECK_THROWS_AS(solve_riccati(p, MeasureForcing::point(0.123, vec1(-0.5)), GridSpec{0.1, 10}), std::invalid_argument);
    CHECK_THROWS_AS(solve_riccati(p, MeasureForcing::point(0.0, Eigen::VectorXcd::Zero(2)), GridSpec{0.1, 10}),
                    std::invalid_argument);
}

}
