#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "oracles.hpp"
#include "vsq/affine.hpp"
#include "vsq/moments.hpp"
#include "vsq/simulate.hpp"

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

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("keyed normals are reproducible and roughly standard") {
    CHECK(keyed_normal(1, 2, 3) == keyed_normal(1, 2, 3));
    CHECK(keyed_normal(1, 2, 3) != keyed_normal(1, 2, 4));
    CHECK(keyed_normal(1, 2, 3) != keyed_normal(2, 2, 3));
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double z = keyed_normal(9, static_cast<std::uint64_t>(k / 100), static_cast<std::uint64_t>(k % 100));
        s += z;
        s2 += z * z;
    }
    CHECK(std::fabs(s / n) < 4.0 / std::sqrt(double(n)));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("frozen dynamics keep every path at x0") {
    ModelParams p = scalar_model(ScalarKernel::fractional(0.3), 0.0, 0.0, 0.0, 0.7);
    for (Scheme s : {Scheme::Direct, Scheme::Resolvent}) {
        SimulationOptions o;
        o.scheme = s;
        const PathEnsemble e = simulate_paths(p, GridSpec{0.01, 50}, 10, 1, o);
        for (double v : e.values) CHECK(v == 0.7);
        CHECK(e.negativity_fraction == 0.0);
    }
}

TEST_CASE("classical CIR marginal moments") {
    const double beta = -1.0, sigma = 0.5, b = 0.6, x0 = 0.4, t = 1.0;
    const ModelParams p = scalar_model(ScalarKernel::constant(), beta, sigma, b, x0);
    const PathEnsemble e = simulate_paths(p, GridSpec{0.005, 200}, 100000, 17);
    const Eigen::MatrixXd x = e.marginal(t);
    const SampleMean m = sample_mean(x);
    CHECK(std::fabs(m.mean(0) - oracle::cir_mean(x0, b, beta, t)) <= 3.0 * m.standard_error(0));
    const double var = (x.array() - m.mean(0)).square().sum() / (x.rows() - 1.0);
    const double fourth = (x.array() - m.mean(0)).pow(4).mean();
    const double se_var = std::sqrt((fourth - var * var) / x.rows());
    CHECK(std::fabs(var - oracle::cir_variance(x0, b, beta, sigma, t)) <= 3.0 * se_var);
}

TEST_CASE("classical CIR from zero follows the Gamma law") {
    const double b = 0.5, sigma = 1.0, t = 0.5;
    const ModelParams p = scalar_model(ScalarKernel::constant(), 0.0, sigma, b, 0.0);
    const PathEnsemble e = simulate_paths(p, GridSpec{0.002, 250}, 100000, 5);
    Eigen::VectorXd x = e.marginal(t).col(0);
    std::sort(x.data(), x.data() + x.size());
    const auto law = oracle::cir_zero_start_law(b, sigma, t);
    double ks = 0.0;
    const double n = static_cast<double>(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double F = boost::math::cdf(law, std::max(x(k), 0.0));
        ks = std::max({ks, std::fabs(F - k / n), std::fabs(F - (k + 1) / n)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("Monte Carlo transform agrees with the affine formula") {
    const ModelParams p = scalar_model(ScalarKernel::gamma(0.3, 1.0), -0.5, 0.4, 0.2, 1.0);
    const double h = 0.01, t = 1.0;
    const PathEnsemble e = simulate_paths(p, GridSpec{h, 100}, 40000, 3);
    const MeasureForcing f = MeasureForcing::point(0.0, vec1(-1.0));
    const McEstimate mc = mc_log_cf(e, f, t);
    const LogCf ex = log_cf(p, t, f, h);
    CHECK(std::abs(mc.estimate - ex.exponent) <= 3.0 * mc.standard_error);

    const McEstimate none = mc_log_cf(e, MeasureForcing{}, t);
    CHECK(std::abs(none.estimate) == 0.0);
    CHECK(none.standard_error == 0.0);
}

TEST_CASE("zero volatility reproduces the deterministic exponent") {
    const ModelParams p = scalar_model(ScalarKernel::gamma(0.3, 1.0), -0.5, 0.0, 0.2, 1.0);
    const double h = 0.01, t = 1.0;
    const PathEnsemble e = simulate_paths(p, GridSpec{h, 100}, 20, 3);
    const MeasureForcing f = MeasureForcing::point(0.0, vec1(-1.0));
    const McEstimate mc = mc_log_cf(e, f, t);
    CHECK(mc.degenerate);
    CHECK(mc.standard_error == 0.0);
    CHECK(mc.estimate.real() == doctest::Approx(log_cf(p, t, f, h).exponent.real()).epsilon(1e-3));
}

TEST_CASE("schemes agree in the mean") {
    const ModelParams p = scalar_model(ScalarKernel::fractional(0.3), -0.8, 0.3, 0.3, 0.5);
    const GridSpec g{0.01, 100};
    SimulationOptions o;
    o.scheme = Scheme::Resolvent;
    const SampleMean a = sample_mean(simulate_paths(p, g, 20000, 8).marginal(1.0));
    const SampleMean r = sample_mean(simulate_paths(p, g, 20000, 9, o).marginal(1.0));
    const double se = std::hypot(a.standard_error(0), r.standard_error(0));
    CHECK(std::fabs(a.mean(0) - r.mean(0)) <= 3.0 * se);
    const MeanAt exact = mean_at(p, 1.0, 0.01);
    CHECK(std::fabs(a.mean(0) - exact.mean(0)) <= 3.0 * a.standard_error(0));
}

TEST_CASE("Holder moment slopes") {
    SUBCASE("rough gamma kernel") {
        const ModelParams p = scalar_model(ScalarKernel::gamma(0.3, 1.0), -0.5, 0.4, 0.2, 1.0);
        const PathEnsemble e = simulate_paths(p, GridSpec{0.001, 1000}, 2000, 21);
        const HolderCurve c = holder_moment_curve(e, 2.0, {0.004, 0.008, 0.016, 0.032, 0.064});
        CHECK(c.slope == doctest::Approx(0.6).epsilon(0.1 / 0.6));
    }
    SUBCASE("constant kernel is diffusive") {
        const ModelParams p = scalar_model(ScalarKernel::constant(), -0.5, 0.4, 0.2, 1.0);
        const PathEnsemble e = simulate_paths(p, GridSpec{0.001, 1000}, 2000, 21);
        const HolderCurve c = holder_moment_curve(e, 2.0, {0.004, 0.008, 0.016, 0.032, 0.064});
        CHECK(c.slope == doctest::Approx(1.0).epsilon(0.1));
    }
    SUBCASE("frozen paths have zero increments") {
        const ModelParams p = scalar_model(ScalarKernel::constant(), 0.0, 0.0, 0.0, 1.0);
        const HolderCurve c = holder_moment_curve(simulate_paths(p, GridSpec{0.01, 100}, 5, 1), 2.0, {0.1, 0.2});
        for (double v : c.moments) CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(holder_moment_curve(PathEnsemble{}, 1.0, {0.1}), std::invalid_argument);
}

TEST_CASE("shifted marginals and stationary means") {
    const ModelParams p = scalar_model(ScalarKernel::gamma(0.3, 1.0), -0.5, 0.4, 0.2, 1.0);
    const PathEnsemble e = simulate_paths(p, GridSpec{0.05, 400}, 8000, 4);
    const auto zero = shifted_marginals(e, 0.0, {0.0, 1.0});
    CHECK(zero[0].isApprox(e.marginal(0.0)));
    CHECK(zero[1].isApprox(e.marginal(1.0)));
    const double A = limit_summary(p).A(0);
    const SampleMean m10 = sample_mean(e.marginal(10.0));
    const SampleMean m20 = sample_mean(e.marginal(20.0));
    CHECK(std::fabs(m20.mean(0) - A) <= 3.0 * m20.standard_error(0));
    CHECK(std::fabs(m20.mean(0) - m10.mean(0)) <= 3.0 * std::hypot(m10.standard_error(0), m20.standard_error(0)));
    CHECK_THROWS_AS(e.marginal(0.123), std::invalid_argument);
}

TEST_CASE("thread count and batch size do not change the ensemble") {
    ModelParams p;
    p.kernel = KernelSpec{{ScalarKernel::fractional(0.3), ScalarKernel::gamma(0.5, 1.0)}};
    p.beta.resize(2, 2);
    p.beta << -1.0, 0.2, 0.1, -0.5;
    p.sigma = Eigen::Vector2d(0.5, 0.3);
    p.b = Eigen::Vector2d(0.2, 0.2);
    p.x0 = Eigen::Vector2d(0.1, 0.4);
    const GridSpec g{0.02, 50};
    SimulationOptions a, b;
    b.threads = 3;
    b.batch_size = 7;
    const PathEnsemble x = simulate_paths(p, g, 300, 99, a);
    const PathEnsemble y = simulate_paths(p, g, 300, 99, b);
    CHECK(x.values == y.values);
    CHECK(x.negativity_fraction == y.negativity_fraction);
    const PathEnsemble z = simulate_paths(p, g, 300, 100, a);
    CHECK(x.values != z.values);
}

TEST_CASE("ensemble dump round trip") {
    const ModelParams p = scalar_model(ScalarKernel::gamma(0.3, 1.0), -0.5, 0.4, 0.2, 1.0);
    SimulationOptions o;
    o.record_stride = 5;
    const PathEnsemble e = simulate_paths(p, GridSpec{0.01, 100}, 37, 12, o);
    CHECK(e.n_records() == 21);
    const auto dir = std::filesystem::temp_directory_path();
    const std::string f1 = (dir / "vsq_test_a.bin").string(), f2 = (dir / "vsq_test_b.bin").string();
    write_ensemble(f1, e);
    const PathEnsemble r = read_ensemble(f1);
    CHECK(r.values == e.values);
    CHECK(r.m == 1);
    CHECK(r.n_paths == 37);
    CHECK(r.record_step() == doctest::Approx(0.05));
    CHECK(r.seed == 12);
    write_ensemble(f2, simulate_paths(p, GridSpec{0.01, 100}, 37, 12, o));
    const std::string bytes = slurp(f1);
    CHECK(bytes.substr(0, 5) == "VSQR1");
    CHECK(bytes.size() == 5 + 5 * 8 + 37 * 21 * 8);
    CHECK(bytes == slurp(f2));
    std::filesystem::remove(f1);
    std::filesystem::remove(f2);
}

TEST_CASE("invalid simulation requests") {
    const ModelParams p = scalar_model(ScalarKernel::constant(), -0.5, 0.4, 0.2, 1.0);
    CHECK_THROWS_AS(simulate_paths(p, GridSpec{0.01, 100}, 0, 1), std::invalid_argument);
    SimulationOptions o;
    o.record_stride = 3;
    CHECK_THROWS_AS(simulate_paths(p, GridSpec{0.01, 100}, 5, 1, o), std::invalid_argument);
    CHECK_THROWS_AS(scheme_from_string("euler"), std::invalid_argument);
}

}
