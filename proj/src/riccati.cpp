#include "vsq/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "detail.hpp"
#include "vsq/errors.hpp"
#include "vsq/resolvents.hpp"

namespace vsq {

Eigen::VectorXcd quadratic_map(const ModelParams& params, const Eigen::VectorXcd& u) {
    const auto m = static_cast<Eigen::Index>(params.m());
    if (u.size() != m) throw std::invalid_argument("quadratic_map: u must have length m");
    Eigen::VectorXcd r = params.beta.transpose().cast<cplx>() * u;
    for (Eigen::Index i = 0; i < m; ++i) r(i) += 0.5 * params.sigma(i) * params.sigma(i) * u(i) * u(i);
    return r;
}

Eigen::MatrixXcd quadratic_map_jacobian(const ModelParams& params, const Eigen::VectorXcd& u) {
    Eigen::MatrixXcd J = params.beta.transpose().cast<cplx>();
    for (Eigen::Index i = 0; i < u.size(); ++i) J(i, i) += params.sigma(i) * params.sigma(i) * u(i);
    return J;
}

namespace {

// Solves y = q + c∘R(y) on the branch that tends to q as c → 0. Each component is a quadratic
// in y_a once the others are frozen; its small root is taken in rationalized form, and the
// coupled system is closed by Gauss-Seidel sweeps followed by Newton polishing.
class ImplicitStep {
public:
    ImplicitStep(const ModelParams& p, Eigen::VectorXd c) : p_(p), c_(std::move(c)), m_(p.m()) {
        for (std::size_t a = 0; a < m_; ++a) {
            const double B = 1.0 - c_(a) * p_.beta(a, a);
            if (!(B > 1e-12))
                throw NumericalError("riccati: implicit step is ill-posed (1 - h·k_0·β_aa <= 0); reduce the step");
        }
    }

    Eigen::VectorXcd solve(const Eigen::VectorXcd& q, const Eigen::VectorXcd& guess) const {
        Eigen::VectorXcd y = guess;
        const int sweeps = m_ == 1 ? 1 : 400;
        for (int it = 0; it < sweeps; ++it) {
            double change = 0.0;
            for (std::size_t a = 0; a < m_; ++a) {
                cplx qa = q(a);
                for (std::size_t j = 0; j < m_; ++j)
                    if (j != a) qa += c_(a) * p_.beta(j, a) * y(j);
                const cplx ya = scalar_root(a, qa);
                change = std::max(change, std::abs(ya - y(a)));
                y(a) = ya;
            }
            if (change <= 1e-15 * (1.0 + y.cwiseAbs().maxCoeff())) break;
        }
        for (int it = 0; it < 3 && m_ > 1; ++it) {
            const Eigen::VectorXcd F = defect(q, y);
            if (F.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + y.cwiseAbs().maxCoeff())) break;
            Eigen::MatrixXcd J = -quadratic_map_jacobian(p_, y);
            for (std::size_t a = 0; a < m_; ++a) J.row(a) *= c_(a);
            J += Eigen::MatrixXcd::Identity(m_, m_);
            y -= J.partialPivLu().solve(F);
        }
        return y;
    }

    Eigen::VectorXcd defect(const Eigen::VectorXcd& q, const Eigen::VectorXcd& y) const {
        return y - q - c_.cast<cplx>().cwiseProduct(quadratic_map(p_, y));
    }

private:
    cplx scalar_root(std::size_t a, cplx qa) const {
        const double s = 0.5 * p_.sigma(a) * p_.sigma(a);
        const double A = c_(a) * s;
        const double B = 1.0 - c_(a) * p_.beta(a, a);
        if (A == 0.0) return qa / B;
        // A y² - B y + q = 0, small root 2q / (B + sqrt(B² - 4Aq))
        cplx root = std::sqrt(cplx(B * B) - 4.0 * A * qa);
        if (root.real() < 0.0) root = -root;
        return 2.0 * qa / (B + root);
    }

    const ModelParams& p_;
    Eigen::VectorXd c_;
    std::size_t m_;
};

void require_compatible(const ModelParams& params, const GridSpec& grid) {
    params.validate();
    grid.validate();
}

}  // namespace

RiccatiSolution::RiccatiSolution(ModelParams params, GridSpec grid, MeasureForcing forcing, Eigen::MatrixXcd psi,
                                 double residual, RiccatiOptions options)
    : params_(std::move(params)), grid_(grid), forcing_(std::move(forcing)), psi_(std::move(psi)),
      residual_(residual) {
    const std::size_t N = grid_.n_steps;
    const double h = grid_.step;
    const auto m = static_cast<Eigen::Index>(this->m());
    RiccatiTail& t = tail_;

    Eigen::VectorXcd I1 = integral_psi(N), I2 = integral_R(N), I3 = integral_psi_sq(N);
    const std::size_t half = N / 2;
    const Eigen::VectorXcd W1 = I1 - integral_psi(half), W2 = I2 - integral_R(half), W3 = I3 - integral_psi_sq(half);
    auto ratio = [](const Eigen::VectorXcd& w, const Eigen::VectorXcd& tot) {
        const double n = tot.norm();
        return n > 0.0 ? w.norm() / n : 0.0;
    };
    t.window_ratio = std::max({ratio(W1, I1), ratio(W2, I2), ratio(W3, I3)});
    t.int_psi = I1;
    t.int_R = I2;
    t.int_psi_sq = I3;
    if (t.window_ratio < options.tail_window_tol) {
        t.status = TailStatus::Converged;
        return;
    }

    const double p = resolvent_tail_power(params_.kernel);
    const double T = grid_.horizon();
    const std::size_t first = std::max<std::size_t>(1, N / 10);
    const std::size_t stride = std::max<std::size_t>(1, (N - first) / 400);
    std::vector<double> ts;
    for (std::size_t k = first; k <= N; k += stride) ts.push_back(grid_.node(k));

    bool ok = true;
    auto extrapolate = [&](auto&& value_at, double power) {
        cplx tail(0.0, 0.0);
        std::vector<double> re, im;
        double scale = 0.0;
        for (std::size_t k = first; k <= N; k += stride) {
            const cplx v = value_at(k);
            re.push_back(v.real());
            im.push_back(v.imag());
            scale = std::max(scale, std::abs(v));
        }
        if (scale == 0.0) return tail;
        for (int part = 0; part < 2; ++part) {
            const auto& vs = part == 0 ? re : im;
            double amax = 0.0;
            for (double v : vs) amax = std::max(amax, std::fabs(v));
            if (amax <= 1e-10 * scale) continue;
            const TailFit f = fit_tail(ts, vs, power, 0.0);
            if (!f.ok) {
                ok = false;
                continue;
            }
            const double v = tail_integral(f, T);
            tail += part == 0 ? cplx(v, 0.0) : cplx(0.0, v);
        }
        return tail;
    };
    Eigen::VectorXcd T1(m), T2(m), T3(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        T1(a) = extrapolate([&](std::size_t k) { return psi_(a, static_cast<Eigen::Index>(k)); }, p);
        T2(a) = extrapolate(
            [&](std::size_t k) { return quadratic_map(params_, psi_.col(static_cast<Eigen::Index>(k)))(a); }, p);
        T3(a) = extrapolate(
            [&](std::size_t k) {
                const cplx v = psi_(a, static_cast<Eigen::Index>(k));
                return v * v;
            },
            2.0 * p);
    }
    (void)h;
    if (ok) {
        t.int_psi += T1;
        t.int_R += T2;
        t.int_psi_sq += T3;
        t.status = TailStatus::Extrapolated;
    } else {
        t.status = TailStatus::NotConverged;
    }
}

Eigen::VectorXcd RiccatiSolution::integral_psi(std::size_t k) const {
    if (k == 0) return Eigen::VectorXcd::Zero(psi_.rows());
    return grid_.step * psi_.middleCols(1, static_cast<Eigen::Index>(k)).rowwise().sum();
}

Eigen::VectorXcd RiccatiSolution::integral_R(std::size_t k) const {
    Eigen::VectorXcd s = Eigen::VectorXcd::Zero(psi_.rows());
    for (std::size_t j = 1; j <= k; ++j) s += quadratic_map(params_, psi_.col(static_cast<Eigen::Index>(j)));
    return grid_.step * s;
}

Eigen::VectorXcd RiccatiSolution::integral_psi_sq(std::size_t k) const {
    if (k == 0) return Eigen::VectorXcd::Zero(psi_.rows());
    return grid_.step * psi_.middleCols(1, static_cast<Eigen::Index>(k)).array().square().matrix().rowwise().sum();
}

double RiccatiSolution::lp_norm(double p) const {
    double s = 0.0;
    for (Eigen::Index k = 1; k < psi_.cols(); ++k) s += std::pow(psi_.col(k).norm(), p);
    return std::pow(grid_.step * s, 1.0 / p);
}

RiccatiSolution solve_riccati(const ModelParams& params, const MeasureForcing& forcing, const GridSpec& grid,
                              const RiccatiOptions& options) {
    require_compatible(params, grid);
    const std::size_t m = params.m();
    const std::size_t N = grid.n_steps;
    const double h = grid.step;
    const Eigen::MatrixXcd mu = forcing.node_masses(grid, m);

    const CellWeights w(params.kernel, h, N);
    const detail::ReversedWeights rw(w);
    Eigen::VectorXd c(m);
    for (std::size_t a = 0; a < m; ++a) c(a) = h * w(a, 0);
    const ImplicitStep step(params, c);

    // mass_i = μ_i + h·R(ψ at step i), split into real and imaginary histories
    std::vector<std::vector<double>> mre(m, std::vector<double>(N)), mim(m, std::vector<double>(N));
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(N + 1));
    Eigen::VectorXcd q(m), y = Eigen::VectorXcd::Zero(m);
    double residual = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t a = 0; a < m; ++a) {
            q(a) = cplx(rw.lagged_dot(a, n, mre[a].data()), rw.lagged_dot(a, n, mim[a].data())) +
                   w(a, 0) * mu(a, static_cast<Eigen::Index>(n));
        }
        y = step.solve(q, y);
        residual = std::max(residual, step.defect(q, y).cwiseAbs().maxCoeff());
        if (!y.allFinite() || y.cwiseAbs().maxCoeff() > options.blowup_threshold)
            throw NumericalError("riccati: |psi| exceeded the blow-up guard at t = " + std::to_string(grid.node(n + 1)) +
                                 "; the forcing is likely inadmissible");
        psi.col(static_cast<Eigen::Index>(n + 1)) = y;
        const Eigen::VectorXcd mass = mu.col(static_cast<Eigen::Index>(n)) + h * quadratic_map(params, y);
        for (std::size_t a = 0; a < m; ++a) {
            mre[a][n] = mass(a).real();
            mim[a][n] = mass(a).imag();
        }
    }
    return {params, grid, forcing, std::move(psi), residual, options};
}

RiccatiTail tail_integrals(const RiccatiSolution& sol) { return sol.tail(); }

Eigen::MatrixXcd directional_derivative(const ModelParams& params, const MeasureForcing& base,
                                        const MeasureForcing& direction, const GridSpec& grid) {
    const RiccatiSolution sol = solve_riccati(params, base, grid);
    const std::size_t m = params.m();
    const std::size_t N = grid.n_steps;
    const double h = grid.step;
    const Eigen::MatrixXcd nu = direction.node_masses(grid, m);
    const CellWeights w(params.kernel, h, N);
    const detail::ReversedWeights rw(w);

    std::vector<std::vector<double>> mre(m, std::vector<double>(N)), mim(m, std::vector<double>(N));
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(N + 1));
    Eigen::VectorXcd q(m);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t a = 0; a < m; ++a) {
            q(a) = cplx(rw.lagged_dot(a, n, mre[a].data()), rw.lagged_dot(a, n, mim[a].data())) +
                   w(a, 0) * nu(a, static_cast<Eigen::Index>(n));
        }
        const Eigen::MatrixXcd J = quadratic_map_jacobian(params, sol.psi(n + 1));
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(m, m);
        for (std::size_t a = 0; a < m; ++a) M.row(a) -= h * w(a, 0) * J.row(a);
        const Eigen::VectorXcd dn = M.partialPivLu().solve(q);
        if (!dn.allFinite()) throw NumericalError("directional derivative: singular step system");
        d.col(static_cast<Eigen::Index>(n + 1)) = dn;
        const Eigen::VectorXcd mass = nu.col(static_cast<Eigen::Index>(n)) + h * (J * dn);
        for (std::size_t a = 0; a < m; ++a) {
            mre[a][n] = mass(a).real();
            mim[a][n] = mass(a).imag();
        }
    }
    return d;
}

}  // namespace vsq
