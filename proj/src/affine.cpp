#include "vsq/affine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vsq/errors.hpp"
#include "vsq/resolvents.hpp"
#include "vsq/riccati.hpp"

namespace vsq {

namespace {

cplx bilinear(const Eigen::VectorXd& a, const Eigen::VectorXcd& z) { return (a.cast<cplx>().array() * z.array()).sum(); }

double relative_gap(cplx a, cplx b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

LimitExponent limit_from_atoms(const ModelParams& params, const std::vector<Atom>& atoms, const LimitOptions& options) {
    params.validate();
    const std::size_t m = params.m();
    MeasureForcing mu;
    mu.atoms = atoms;
    mu.validate(m);

    LimitExponent out;
    out.summary = limit_summary(params, options);

    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m));
    double last = 0.0;
    for (const auto& a : atoms) {
        total += a.weight;
        last = std::max(last, a.time);
    }
    if (total.cwiseAbs().maxCoeff() == 0.0 && mu.empty()) {
        out.exponent = out.direct_form = 0.0;
        out.status = out.summary.status;
        return out;
    }

    GridSpec grid = options.riccati_grid;
    grid.validate();
    if (last > 0.5 * grid.horizon()) grid = GridSpec::covering(grid.step, last + grid.horizon());
    const RiccatiSolution sol = solve_riccati(params, mu, grid);
    const RiccatiTail& tail = sol.tail();

    cplx quad = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        quad += 0.5 * params.sigma(ii) * params.sigma(ii) * out.summary.A(ii) * tail.int_psi_sq(ii);
    }
    out.exponent = bilinear(out.summary.A, total) + quad;
    out.direct_form = bilinear(params.x0, total) + bilinear(params.x0, tail.int_R) + bilinear(params.b, tail.int_psi);
    out.relative_gap = relative_gap(out.exponent, out.direct_form);
    out.riccati_window_ratio = tail.window_ratio;
    out.status = worst(out.summary.status, tail.status);
    if (out.status == TailStatus::Converged && out.relative_gap > 1e-4 && std::abs(out.exponent - out.direct_form) > 1e-12)
        throw NumericalError("limit exponent: the two forms disagree, relative gap " + std::to_string(out.relative_gap));
    return out;
}

}  // namespace

LogCf log_cf(const ModelParams& params, double t, const MeasureForcing& forcing, double step) {
    params.validate();
    const std::size_t m = params.m();
    if (!(step > 0.0) || !(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("log_cf: need step > 0 and t >= 0");
    const double nd = std::round(t / step);
    if (std::fabs(t - nd * step) > 1e-9 * std::max(1.0, t)) throw std::invalid_argument("log_cf: t must be a grid node");
    const auto n = static_cast<std::size_t>(nd);
    LogCf out;
    if (forcing.empty()) {
        forcing.validate(m);
        out.exponent = out.moment_form = 0.0;
        return out;
    }
    if (n == 0) {
        const Eigen::MatrixXcd mass = forcing.node_masses(GridSpec{step, 0}, m);
        out.exponent = out.moment_form = bilinear(params.x0, mass.col(0));
        return out;
    }

    const GridSpec grid{step, n};
    const Eigen::MatrixXcd mass = forcing.node_masses(grid, m);
    const RiccatiSolution sol = solve_riccati(params, forcing, grid);
    out.riccati_residual = sol.residual();

    out.exponent = bilinear(params.x0, mass.rowwise().sum()) + bilinear(params.x0, sol.integral_R(n)) +
                   bilinear(params.b, sol.integral_psi(n));

    const ResolventPair pair = resolvent_second_kind(params.kernel, params.beta, grid);
    const Eigen::MatrixXd M = mean_curve(params, pair);
    cplx f2 = 0.0;
    for (std::size_t j = 0; j <= n; ++j) f2 += bilinear(M.col(static_cast<Eigen::Index>(n - j)), mass.col(static_cast<Eigen::Index>(j)));
    for (std::size_t k = 1; k <= n; ++k) {
        const Eigen::VectorXcd p = sol.psi(k);
        const auto col = static_cast<Eigen::Index>(n - k + 1);
        for (std::size_t i = 0; i < m; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            f2 += step * 0.5 * params.sigma(ii) * params.sigma(ii) * M(ii, col) * p(ii) * p(ii);
        }
    }
    out.moment_form = f2;
    out.relative_gap = relative_gap(out.exponent, out.moment_form);
    if (out.relative_gap > 1e-4 && std::abs(out.exponent - out.moment_form) > 1e-12)
        throw NumericalError("log_cf: the two affine forms disagree, relative gap " + std::to_string(out.relative_gap));
    return out;
}

LimitExponent limit_log_laplace(const ModelParams& params, const Eigen::VectorXcd& u, const LimitOptions& options) {
    return limit_from_atoms(params, {Atom{0.0, u}}, options);
}

LimitExponent limit_log_laplace(const ModelParams& params, const Eigen::VectorXcd& u) {
    return limit_log_laplace(params, u, default_limit_options(params));
}

LimitExponent stationary_fdd_log_cf(const ModelParams& params, const std::vector<double>& times,
                                    const std::vector<Eigen::VectorXcd>& weights, const LimitOptions& options) {
    if (times.empty() || times.size() != weights.size())
        throw std::invalid_argument("stationary fdd: need matching, nonempty times and weights");
    for (std::size_t j = 1; j < times.size(); ++j)
        if (!(times[j] > times[j - 1])) throw std::invalid_argument("stationary fdd: times must be strictly increasing");
    std::vector<Atom> atoms;
    for (std::size_t j = 0; j < times.size(); ++j) atoms.push_back({times.back() - times[j], weights[j]});
    return limit_from_atoms(params, atoms, options);
}

LimitExponent stationary_fdd_log_cf(const ModelParams& params, const std::vector<double>& times,
                                    const std::vector<Eigen::VectorXcd>& weights) {
    return stationary_fdd_log_cf(params, times, weights, default_limit_options(params));
}

}  // namespace vsq
