#include "vsq/resolvents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "detail.hpp"
#include "vsq/errors.hpp"

namespace vsq {

namespace {

struct RawSolve {
    std::vector<double> E, R, cumE, cumR;
};

RawSolve solve_raw(const KernelSpec& spec, const Eigen::MatrixXd& B, double h, std::size_t N) {
    const std::size_t m = spec.m();
    const std::size_t mm = m * m;
    const CellWeights w(spec, h, N);
    const detail::ReversedWeights rw(w);

    Eigen::MatrixXd M0 = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t a = 0; a < m; ++a) M0.row(a) -= h * w(a, 0) * B.row(a);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M0);
    if (!(lu.rcond() > 1e-13))
        throw NumericalError("resolvent: the implicit step system I - h·k_0·B is singular; reduce the step");

    RawSolve out;
    out.E.resize(N * mm);
    out.R.resize(N * mm);
    out.cumE.assign((N + 1) * mm, 0.0);
    out.cumR.assign((N + 1) * mm, 0.0);
    std::vector<std::vector<double>> G(mm, std::vector<double>(N));  // G(a,c) history of h·B·E

    Eigen::MatrixXd rhs(m, m), y(m, m), hB = h * B;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t a = 0; a < m; ++a) rhs(a, c) = rw.lagged_dot(a, n, G[a + c * m].data());
        for (std::size_t a = 0; a < m; ++a) rhs(a, a) += w(a, n);
        y = lu.solve(rhs);
        if (!y.allFinite() || y.cwiseAbs().maxCoeff() > 1e150)
            throw NumericalError("resolvent: values overflow; the resolvent grows too fast on this horizon");
        Eigen::Map<Eigen::MatrixXd>(out.E.data() + n * mm, m, m) = y;
        Eigen::Map<Eigen::MatrixXd>(out.R.data() + n * mm, m, m) = -y * B;
        const Eigen::MatrixXd g = hB * y;
        for (std::size_t k = 0; k < mm; ++k) G[k][n] = g(static_cast<Eigen::Index>(k));
        Eigen::Map<Eigen::MatrixXd>(out.cumE.data() + (n + 1) * mm, m, m) =
            Eigen::Map<const Eigen::MatrixXd>(out.cumE.data() + n * mm, m, m) + h * y;
        Eigen::Map<Eigen::MatrixXd>(out.cumR.data() + (n + 1) * mm, m, m) =
            Eigen::Map<const Eigen::MatrixXd>(out.cumR.data() + n * mm, m, m) - h * y * B;
    }
    return out;
}

}  // namespace

ResolventPair::ResolventPair(GridSpec grid, Eigen::MatrixXd B, bool richardson, std::vector<double> E,
                             std::vector<double> R, std::vector<double> cumE, std::vector<double> cumR,
                             double tail_power)
    : grid_(grid), B_(std::move(B)), richardson_(richardson), E_(std::move(E)), R_(std::move(R)),
      cumE_(std::move(cumE)), cumR_(std::move(cumR)) {
    const std::size_t N = grid_.n_steps;
    const std::size_t m = this->m();
    const double T = grid_.horizon();
    ResolventIntegrals& I = integrals_;
    I.E_grid = E_cumulative(N);
    I.R_grid = R_cumulative(N);

    const double total = I.E_grid.norm();
    const double window = (E_cumulative(N) - E_cumulative(N / 2)).norm();
    I.window_ratio = total > 0.0 ? window / total : 0.0;

    // Tail model fitted on the last decade of the grid, thinned to at most ~400 samples.
    const std::size_t first = std::max<std::size_t>(1, N / 10);
    const std::size_t stride = std::max<std::size_t>(1, (N - first) / 400);
    std::vector<double> ts;
    for (std::size_t k = first; k <= N; k += stride) ts.push_back(grid_.node(k));

    double scale = 0.0;
    for (std::size_t k = first; k <= N; ++k) scale = std::max(scale, this->E(k).cwiseAbs().maxCoeff());

    I.E_tail = Eigen::MatrixXd::Zero(m, m);
    I.E_fits.assign(m * m, TailFit{});
    bool fits_ok = true;
    std::vector<double> vs;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            vs.clear();
            double amax = 0.0;
            for (std::size_t k = first; k <= N; k += stride) {
                vs.push_back(this->E(k)(i, j));
                amax = std::max(amax, std::fabs(vs.back()));
            }
            if (amax <= 1e-13 * scale) continue;
            const TailFit fit = fit_tail(ts, vs, tail_power, 0.0);
            if (!fit.ok) {
                fits_ok = false;
                continue;
            }
            I.E_fits[i + j * m] = fit;
            I.E_tail(i, j) = tail_integral(fit, T);
        }
    }
    I.R_tail = -I.E_tail * B_;
    I.E_integral = I.E_grid + I.E_tail;
    I.R_integral = I.R_grid + I.R_tail;
    if (I.window_ratio < 1e-6) {
        I.status = TailStatus::Converged;
    } else if (fits_ok) {
        I.status = TailStatus::Extrapolated;
    } else {
        I.status = TailStatus::NotConverged;
    }
}

Eigen::Map<const Eigen::MatrixXd> ResolventPair::E(std::size_t k) const {
    if (k < 1 || k > size()) throw std::out_of_range("resolvent node index out of range");
    const std::size_t mm = m() * m();
    return {E_.data() + (k - 1) * mm, static_cast<Eigen::Index>(m()), static_cast<Eigen::Index>(m())};
}

Eigen::Map<const Eigen::MatrixXd> ResolventPair::R(std::size_t k) const {
    if (k < 1 || k > size()) throw std::out_of_range("resolvent node index out of range");
    const std::size_t mm = m() * m();
    return {R_.data() + (k - 1) * mm, static_cast<Eigen::Index>(m()), static_cast<Eigen::Index>(m())};
}

Eigen::Map<const Eigen::MatrixXd> ResolventPair::E_cumulative(std::size_t k) const {
    if (k > size()) throw std::out_of_range("resolvent node index out of range");
    const std::size_t mm = m() * m();
    return {cumE_.data() + k * mm, static_cast<Eigen::Index>(m()), static_cast<Eigen::Index>(m())};
}

Eigen::Map<const Eigen::MatrixXd> ResolventPair::R_cumulative(std::size_t k) const {
    if (k > size()) throw std::out_of_range("resolvent node index out of range");
    const std::size_t mm = m() * m();
    return {cumR_.data() + k * mm, static_cast<Eigen::Index>(m()), static_cast<Eigen::Index>(m())};
}

std::vector<double> ResolventPair::E_entry(std::size_t i, std::size_t j) const {
    std::vector<double> v(size());
    for (std::size_t k = 1; k <= size(); ++k) v[k - 1] = E(k)(i, j);
    return v;
}

double resolvent_tail_power(const KernelSpec& spec) {
    double lam = std::numeric_limits<double>::infinity();
    for (const auto& k : spec.components) lam = std::min(lam, k.lambda());
    double p = std::numeric_limits<double>::infinity();
    for (const auto& k : spec.components)
        if (k.lambda() == lam && k.H() < 0.5) p = std::min(p, k.H() + 1.5);
    return std::isinf(p) ? 0.0 : p;
}

ResolventPair resolvent_second_kind(const KernelSpec& spec, const Eigen::MatrixXd& B, const GridSpec& grid,
                                    const ResolventOptions& options) {
    spec.validate();
    grid.validate();
    const std::size_t m = spec.m();
    if (static_cast<std::size_t>(B.rows()) != m || static_cast<std::size_t>(B.cols()) != m)
        throw std::invalid_argument("resolvent: B must be m×m with m the kernel dimension");
    if (!B.allFinite()) throw std::invalid_argument("resolvent: B has non-finite entries");

    const std::size_t N = grid.n_steps;
    const double h = grid.step;
    const double p = resolvent_tail_power(spec);
    if (!options.richardson) {
        RawSolve s = solve_raw(spec, B, h, N);
        return {grid, B, false, std::move(s.E), std::move(s.R), std::move(s.cumE), std::move(s.cumR), p};
    }

    RawSolve coarse = solve_raw(spec, B, h, N);
    RawSolve fine = solve_raw(spec, B, 0.5 * h, 2 * N);
    const std::size_t mm = m * m;
    RawSolve out;
    out.E.resize(N * mm);
    out.R.resize(N * mm);
    out.cumE.resize((N + 1) * mm);
    out.cumR.resize((N + 1) * mm);
    for (std::size_t k = 1; k <= N; ++k) {
        for (std::size_t e = 0; e < mm; ++e) {
            out.E[(k - 1) * mm + e] = 2.0 * fine.E[(2 * k - 1) * mm + e] - coarse.E[(k - 1) * mm + e];
            out.R[(k - 1) * mm + e] = 2.0 * fine.R[(2 * k - 1) * mm + e] - coarse.R[(k - 1) * mm + e];
        }
    }
    for (std::size_t k = 0; k <= N; ++k) {
        for (std::size_t e = 0; e < mm; ++e) {
            out.cumE[k * mm + e] = 2.0 * fine.cumE[2 * k * mm + e] - coarse.cumE[k * mm + e];
            out.cumR[k * mm + e] = 2.0 * fine.cumR[2 * k * mm + e] - coarse.cumR[k * mm + e];
        }
    }
    return {grid, B, true, std::move(out.E), std::move(out.R), std::move(out.cumE), std::move(out.cumR), p};
}

ResolventIntegrals resolvent_integrals(const ResolventPair& pair) { return pair.integrals(); }

double closed_form_E_fractional(double H, double lambda, double beta, double t) {
    if (!(H > 0.0 && H <= 0.5)) throw std::invalid_argument("closed form E: H must lie in (0, 1/2]");
    if (!(lambda >= 0.0)) throw std::invalid_argument("closed form E: lambda must be >= 0");
    if (!(beta < 0.0)) throw std::invalid_argument("closed form E: beta must be negative");
    const double alpha = H + 0.5;
    if (t < 0.0 || (t == 0.0 && alpha < 1.0)) throw std::domain_error("closed form E: t must be positive");
    const double b = -beta;
    if (t == 0.0) return 1.0;
    return std::pow(b, -1.0 + 1.0 / alpha) * std::exp(-lambda * t) * e_alpha(alpha, std::pow(b, 1.0 / alpha) * t);
}

}  // namespace vsq
