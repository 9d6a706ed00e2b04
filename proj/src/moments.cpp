#include "vsq/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "vsq/errors.hpp"

namespace vsq {

namespace {

double min_lambda(const KernelSpec& spec) {
    double lam = std::numeric_limits<double>::infinity();
    for (const auto& k : spec.components) lam = std::min(lam, k.lambda());
    return lam;
}

double model_value(const TailFit& f, double t) {
    if (!f.ok) return 0.0;
    return f.amplitude * std::pow(t, -f.power) * std::exp(-f.rate * t);
}

}  // namespace

LimitOptions default_limit_options(const ModelParams& params) {
    const double lam = min_lambda(params.kernel);
    LimitOptions o;
    if (lam > 0.0) {
        const double Tr = std::clamp(60.0 / lam, 60.0, 2000.0);
        o.resolvent_grid = GridSpec{Tr / 20000.0, 20000};
        const double Tq = std::clamp(40.0 / lam, 40.0, 2000.0);
        o.riccati_grid = GridSpec{Tq / 8000.0, 8000};
    } else {
        o.resolvent_grid = GridSpec{0.2, 20000};
        o.riccati_grid = GridSpec{0.025, 16000};
    }
    return o;
}

Eigen::MatrixXd mean_curve(const ModelParams& params, const ResolventPair& pair) {
    const auto m = static_cast<Eigen::Index>(params.m());
    const std::size_t N = pair.size();
    Eigen::MatrixXd out(m, static_cast<Eigen::Index>(N + 1));
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t k = 0; k <= N; ++k)
        out.col(static_cast<Eigen::Index>(k)) =
            (I - pair.R_cumulative(k)) * params.x0 + pair.E_cumulative(k) * params.b;
    return out;
}

MeanAt mean_at(const ModelParams& params, double t, double step) {
    params.validate();
    if (!(step > 0.0) || !(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("mean_at: need step > 0, t >= 0");
    const double nd = std::round(t / step);
    if (std::fabs(t - nd * step) > 1e-9 * std::max(1.0, t))
        throw std::invalid_argument("mean_at: t must be a multiple of the step");
    MeanAt r;
    const auto n = static_cast<std::size_t>(nd);
    if (n == 0) {
        r.mean = r.transpose_form = params.x0;
        return r;
    }
    const GridSpec grid{step, n};
    const auto m = static_cast<Eigen::Index>(params.m());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    const ResolventPair pb = resolvent_second_kind(params.kernel, params.beta, grid);
    const ResolventPair pt = resolvent_second_kind(params.kernel, params.beta.transpose(), grid);
    r.mean = (I - pb.R_cumulative(n)) * params.x0 + pb.E_cumulative(n) * params.b;
    const Eigen::MatrixXd Et = pt.E_cumulative(n).transpose();
    r.transpose_form = (I + Et * params.beta) * params.x0 + Et * params.b;
    const double scale = std::max(r.mean.norm(), r.transpose_form.norm());
    const double diff = (r.mean - r.transpose_form).norm();
    r.relative_gap = scale > 0.0 ? diff / scale : 0.0;
    if (r.relative_gap > 1e-6 && diff > 1e-14)
        throw NumericalError("mean_at: first-moment forms disagree, relative gap " + std::to_string(r.relative_gap));
    return r;
}

LimitSummary limit_summary(const ModelParams& params, const ResolventPair& pair) {
    params.validate();
    const ResolventIntegrals& in = pair.integrals();
    if (!in.integrable())
        throw NumericalError("no limiting distribution certified: ∫E_β has not converged (window ratio " +
                             std::to_string(in.window_ratio) + ")");
    const auto m = static_cast<Eigen::Index>(params.m());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    LimitSummary s;
    s.status = in.status;
    s.window_ratio = in.window_ratio;
    s.R_integral = in.R_integral;
    s.E_integral = in.E_integral;
    s.A = (I - in.R_integral) * params.x0 + in.E_integral * params.b;

    const Eigen::MatrixXd D = in.R_integral - I;
    s.identity_residual = D.norm();
    constexpr double null_tol = 1e-4;
    s.independent_of_x0 = s.identity_residual <= null_tol;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    std::vector<Eigen::Index> null_cols;
    for (Eigen::Index k = 0; k < m; ++k)
        if (sv(k) <= null_tol) null_cols.push_back(k);
    s.N_basis.resize(m, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t c = 0; c < null_cols.size(); ++c)
        s.N_basis.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(null_cols[c]);
    s.P = I - s.N_basis * s.N_basis.transpose();

    const double h = pair.grid().step;
    double r_l1 = in.R_tail.norm(), e_l1 = in.E_tail.norm();
    for (std::size_t k = 1; k <= pair.size(); ++k) {
        r_l1 += h * pair.R(k).norm();
        e_l1 += h * pair.E(k).norm();
    }
    s.C_beta = (1.0 + r_l1) * std::sqrt(static_cast<double>(m)) + e_l1;
    return s;
}

LimitSummary limit_summary(const ModelParams& params, const LimitOptions& options) {
    params.validate();
    const ResolventPair pair = resolvent_second_kind(params.kernel, params.beta, options.resolvent_grid);
    return limit_summary(params, pair);
}

LimitSummary limit_summary(const ModelParams& params) { return limit_summary(params, default_limit_options(params)); }

Autocovariance stationary_autocov(const ModelParams& params, const std::vector<double>& lags,
                                  const AutocovOptions& options) {
    params.validate();
    double lag_max = 0.0;
    for (double l : lags) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("autocov: lags must be finite and >= 0");
        lag_max = std::max(lag_max, l);
    }
    Autocovariance out;
    out.lags = lags;
    out.summary = limit_summary(params);

    GridSpec grid = options.grid;
    if (grid.step == 0.0) {
        const double lam = min_lambda(params.kernel);
        const double T = lag_max + (lam > 0.0 ? std::clamp(60.0 / lam, 60.0, 2000.0) : 400.0);
        const double h = std::max(0.05, T / 40000.0);
        grid = GridSpec::covering(h, T);
    }
    grid.validate();
    out.grid = grid;
    const std::size_t N = grid.n_steps;
    const double h = grid.step;
    const double T = grid.horizon();
    if (lag_max >= 0.9 * T) throw std::invalid_argument("autocov: largest lag must stay below 0.9·horizon");

    const ResolventPair pair = resolvent_second_kind(params.kernel, params.beta, grid);
    const ResolventIntegrals& in = pair.integrals();
    out.tail_status = in.status;

    const auto m = static_cast<Eigen::Index>(params.m());
    Eigen::VectorXd S(m);
    for (Eigen::Index i = 0; i < m; ++i) S(i) = params.sigma(i) * params.sigma(i) * std::max(out.summary.A(i), 0.0);

    boost::math::quadrature::exp_sinh<double> es;
    auto at_index = [&](std::size_t l) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t k = 1; k + l <= N; ++k) acc.noalias() += h * pair.E(k + l) * S.asDiagonal() * pair.E(k).transpose();
        if (in.integrable()) {
            const double lo = T - static_cast<double>(l) * h;
            const double lag = static_cast<double>(l) * h;
            for (Eigen::Index i = 0; i < m; ++i) {
                for (Eigen::Index j = 0; j < m; ++j) {
                    auto f = [&](double u) {
                        double v = 0.0;
                        for (Eigen::Index c = 0; c < m; ++c) {
                            if (S(c) == 0.0) continue;
                            v += model_value(in.E_fits[static_cast<std::size_t>(i + c * m)], lo + lag + u) * S(c) *
                                 model_value(in.E_fits[static_cast<std::size_t>(j + c * m)], lo + u);
                        }
                        return v;
                    };
                    acc(i, j) += es.integrate(f, 1e-12);
                }
            }
        }
        return acc;
    };

    for (double lag : lags) {
        const double pos = lag / h;
        const auto l0 = static_cast<std::size_t>(std::floor(pos + 1e-9));
        const double frac = pos - static_cast<double>(l0);
        Eigen::MatrixXd v = at_index(l0);
        if (frac > 1e-9) v = (1.0 - frac) * v + frac * at_index(l0 + 1);
        out.values.push_back(v);
    }
    return out;
}

SufficientConditionReport sufficient_condition_checks(const ModelParams& params, const LimitOptions& options) {
    params.validate();
    SufficientConditionReport r;
    const auto m = static_cast<Eigen::Index>(params.m());
    const Eigen::MatrixXd& beta = params.beta;

    r.beta_norm2 = m > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(beta).singularValues()(0) : 0.0;
    r.kernel_l1_sum = 0.0;
    bool all_unbounded = true;
    bool any_singular = false;
    for (const auto& k : params.kernel.components) {
        r.kernel_l1_sum += k.total_integral();
        if (k.lambda() > 0.0) all_unbounded = false;
        if (k.singular()) any_singular = true;
    }
    r.condition_a = r.beta_norm2 == 0.0 || r.beta_norm2 * r.kernel_l1_sum < 1.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(beta.transpose() * beta, Eigen::EigenvaluesOnly);
    r.betaTbeta_min_eig = es.eigenvalues().minCoeff();
    r.kstar_nonintegrable = all_unbounded;
    r.condition_b = r.betaTbeta_min_eig > 1e-12 * std::max(1.0, r.beta_norm2 * r.beta_norm2) && r.kstar_nonintegrable;

    const ResolventPair pair = resolvent_second_kind(params.kernel, beta, options.resolvent_grid);
    const ResolventIntegrals& in = pair.integrals();
    r.numeric_status = in.status;
    r.numeric_integrable = in.integrable();
    const bool symmetric = (beta - beta.transpose()).norm() <= 1e-14 * std::max(1.0, beta.norm());
    if (!r.numeric_integrable) {
        r.numeric_identity_residual = std::numeric_limits<double>::quiet_NaN();
        r.limit_verdict = "not_integrable";
    } else {
        r.numeric_identity_residual = (in.R_integral - Eigen::MatrixXd::Identity(m, m)).norm();
        const double tol = in.status == TailStatus::Converged ? 1e-4 : 5e-2;
        if (all_unbounded && any_singular && !symmetric && !r.condition_b)
            r.limit_verdict = "undetermined";
        else
            r.limit_verdict = r.numeric_identity_residual <= tol ? "identity" : "not_identity";
    }
    r.consistent = (!r.condition_a || r.numeric_integrable) && (!r.condition_b || r.limit_verdict == "identity");
    return r;
}

SufficientConditionReport sufficient_condition_checks(const ModelParams& params) {
    return sufficient_condition_checks(params, default_limit_options(params));
}

}  // namespace vsq
