#include "vsq/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vsq/fit.hpp"
#include "vsq/moments.hpp"

namespace vsq {

namespace {

double quantile(std::vector<double> v, double q) {
    const auto k = static_cast<std::size_t>(std::clamp(q * static_cast<double>(v.size() - 1), 0.0,
                                                       static_cast<double>(v.size() - 1)));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

double rho(const Eigen::MatrixXd& s, Eigen::Index row) {
    double r = 1.0;
    for (Eigen::Index i = 0; i < s.cols(); ++i) r = std::min(r, std::sqrt(std::max(s(row, i), 0.0)));
    return r;
}

}  // namespace

double WeightedDensity::cell_volume() const {
    double v = 1.0;
    for (double w : bin_width) v *= w;
    return v;
}

WeightedDensity weighted_density(const Eigen::MatrixXd& samples, const DensityOptions& options) {
    const auto n = static_cast<std::size_t>(samples.rows());
    const auto m = static_cast<std::size_t>(samples.cols());
    if (m < 1 || m > 2) throw std::invalid_argument("weighted_density: only m = 1 or m = 2 is supported");
    if (n < 1) throw std::invalid_argument("weighted_density: no samples");
    if (!samples.allFinite()) throw std::invalid_argument("weighted_density: non-finite samples");

    WeightedDensity wd;
    wd.dim = m;
    wd.n_samples = n;
    wd.few_samples = n < 10000;
    const double nd = static_cast<double>(n);

    bool all_constant = true;
    for (std::size_t a = 0; a < m; ++a) {
        std::vector<double> col(n);
        for (std::size_t r = 0; r < n; ++r) col[r] = std::max(samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)), 0.0);
        const double hi = *std::max_element(col.begin(), col.end());
        const double lo = *std::min_element(col.begin(), col.end());
        std::size_t nb;
        double w;
        if (hi == lo) {
            nb = 1;
            w = hi > 0.0 ? hi * (1.0 + 1e-12) : 1.0;
        } else {
            all_constant = false;
            if (options.bins > 0) {
                nb = options.bins;
                w = hi * (1.0 + 1e-12) / static_cast<double>(nb);
            } else {
                double iqr = quantile(col, 0.75) - quantile(col, 0.25);
                if (iqr <= 0.0) iqr = hi - lo;
                w = 2.0 * iqr * std::pow(nd, -1.0 / 3.0);
                nb = static_cast<std::size_t>(std::ceil(hi / w * (1.0 + 1e-12)));
            }
            if (nb > options.max_bins) {
                nb = options.max_bins;
                w = hi * (1.0 + 1e-12) / static_cast<double>(nb);
            }
            nb = std::max<std::size_t>(nb, 1);
        }
        wd.bins.push_back(nb);
        wd.bin_width.push_back(w);
        std::vector<double> e(nb + 1);
        for (std::size_t k = 0; k <= nb; ++k) e[k] = w * static_cast<double>(k);
        wd.edges.push_back(std::move(e));
        wd.epsilon.push_back(options.epsilon > 0.0 ? options.epsilon : w);
    }
    wd.degenerate = all_constant;

    const std::size_t n0 = wd.bins[0];
    const std::size_t cells = m == 1 ? n0 : n0 * wd.bins[1];
    wd.values.assign(cells, 0.0);
    std::size_t atoms = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto rr = static_cast<Eigen::Index>(r);
        bool in_atom = true;
        std::size_t idx = 0, stride = 1;
        for (std::size_t a = 0; a < m; ++a) {
            const double x = std::max(samples(rr, static_cast<Eigen::Index>(a)), 0.0);
            if (x >= wd.epsilon[a]) in_atom = false;
            const auto b = std::min(static_cast<std::size_t>(x / wd.bin_width[a]), wd.bins[a] - 1);
            idx += b * stride;
            stride *= wd.bins[a];
        }
        if (in_atom) ++atoms;
        wd.values[idx] += rho(samples, rr);
    }
    const double vol = wd.cell_volume();
    for (double& v : wd.values) v /= nd * vol;
    wd.atom_mass_at_zero = static_cast<double>(atoms) / nd;
    wd.histogram_mass = 1.0 - wd.atom_mass_at_zero;
    wd.weighted_mass = 0.0;
    for (double v : wd.values) wd.weighted_mass += v * vol;
    return wd;
}

WeightedDensity weighted_density(const std::vector<double>& samples, const DensityOptions& options) {
    const Eigen::MatrixXd s = Eigen::Map<const Eigen::VectorXd>(samples.data(), static_cast<Eigen::Index>(samples.size()));
    return weighted_density(s, options);
}

IncrementCurve besov_increment_curve(const WeightedDensity& wd, const std::vector<double>& shifts) {
    if (wd.degenerate) throw std::invalid_argument("increment curve: degenerate sample, regularity diagnostics do not apply");
    IncrementCurve c;
    const double vol = wd.cell_volume();
    const std::size_t n0 = wd.bins[0];
    const std::size_t n1 = wd.dim == 2 ? wd.bins[1] : 1;
    auto v = [&](long i0, long i1) -> double {
        if (i0 < 0 || i1 < 0 || i0 >= static_cast<long>(n0) || i1 >= static_cast<long>(n1)) return 0.0;
        return wd.values[static_cast<std::size_t>(i0) + n0 * static_cast<std::size_t>(i1)];
    };
    for (double s : shifts) {
        if (!(s > 0.0)) throw std::invalid_argument("increment curve: shifts must be positive");
        double worst = 0.0;
        std::size_t sb0 = 0;
        for (std::size_t a = 0; a < wd.dim; ++a) {
            const auto sb = static_cast<long>(std::llround(s / wd.bin_width[a]));
            if (sb < 4)
                throw std::invalid_argument("too few bins: shift " + std::to_string(s) + " spans " + std::to_string(sb) +
                                            " bins on axis " + std::to_string(a) + " (need >= 4)");
            if (a == 0) sb0 = static_cast<std::size_t>(sb);
            double acc = 0.0;
            for (long i1 = (a == 1 ? -sb : 0); i1 < static_cast<long>(n1); ++i1)
                for (long i0 = (a == 0 ? -sb : 0); i0 < static_cast<long>(n0); ++i0)
                    acc += std::fabs(a == 0 ? v(i0 + sb, i1) - v(i0, i1) : v(i0, i1 + sb) - v(i0, i1));
            worst = std::max(worst, acc * vol);
        }
        c.shift_bins.push_back(sb0);
        c.shifts.push_back(wd.dim == 1 ? static_cast<double>(sb0) * wd.bin_width[0] : s);
        c.increments.push_back(worst);
    }
    bool positive = c.shifts.size() >= 2;
    for (double x : c.increments) positive = positive && x > 0.0;
    if (positive) {
        const LinearFit f = fit_loglog(c.shifts, c.increments);
        c.exponent = f.slope;
        c.exponent_stderr = f.slope_stderr;
        c.exponent_lo = f.slope - 1.96 * f.slope_stderr;
        c.exponent_hi = f.slope + 1.96 * f.slope_stderr;
        c.constant = std::exp(f.intercept);
        for (std::size_t k = 0; k < c.shifts.size(); ++k)
            c.max_ratio = std::max(c.max_ratio, c.increments[k] / (c.constant * std::pow(c.shifts[k], c.exponent)));
    }
    return c;
}

LimitDensityDiagnostics limit_density_diagnostics(const ModelParams& params, const PathEnsemble& ens, double burn_in,
                                                  const std::vector<double>& shifts, const DensityOptions& options) {
    LimitDensityDiagnostics d;
    d.stationary_mean = limit_summary(params).A;
    d.density = weighted_density(ens.marginal(burn_in), options);
    d.applicable = !d.density.degenerate;
    if (d.applicable) d.increments = besov_increment_curve(d.density, shifts);
    return d;
}

}  // namespace vsq
