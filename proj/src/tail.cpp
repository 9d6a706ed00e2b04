#include "vsq/tail.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "vsq/fit.hpp"

namespace vsq {

std::string to_string(TailStatus s) {
    switch (s) {
        case TailStatus::Converged: return "converged";
        case TailStatus::Extrapolated: return "extrapolated";
        case TailStatus::NotConverged: return "not_converged";
    }
    return "unknown";
}

TailStatus worst(TailStatus a, TailStatus b) { return static_cast<int>(a) > static_cast<int>(b) ? a : b; }

TailFit fit_tail(std::span<const double> t, std::span<const double> v, double power, double t_lo) {
    TailFit out;
    out.power = power;
    std::vector<double> x, y;
    int sign = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo) continue;
        if (v[i] == 0.0) return out;
        const int s = v[i] > 0.0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign) return out;
        x.push_back(t[i]);
        y.push_back(std::log(std::fabs(v[i])) + power * std::log(t[i]));
    }
    if (x.size() < 4) return out;
    const LinearFit f = fit_line(x, y);
    double rate = -f.slope;
    const double T = x.back();
    if (rate < 0.0) {
        // Mild apparent growth is pre-asymptotic curvature; genuine growth is not integrable.
        if (-rate * T > 0.05) return out;
        rate = 0.0;
    }
    if (rate == 0.0 && power <= 1.0) return out;
    out.rate = rate;
    out.amplitude = sign * std::exp(f.intercept);
    out.rms_log_residual = f.rms_residual;
    out.ok = f.rms_residual < 0.05;
    return out;
}

double tail_integral(const TailFit& fit, double T) {
    if (!fit.ok || fit.amplitude == 0.0) return 0.0;
    const double p = fit.power;
    if (fit.rate == 0.0) return fit.amplitude * std::pow(T, 1.0 - p) / (p - 1.0);
    // t = T(1+s): T^{1-p} e^{-rT} ∫_0^∞ (1+s)^{-p} e^{-rTs} ds
    const double rT = fit.rate * T;
    if (rT > 700.0) return 0.0;
    auto g = [&](double s) { return std::pow(1.0 + s, -p) * std::exp(-rT * s); };
    boost::math::quadrature::exp_sinh<double> es;
    const double I = es.integrate(g, 0.0, std::numeric_limits<double>::infinity(), 1e-12);
    return fit.amplitude * std::pow(T, 1.0 - p) * std::exp(-rT) * I;
}

}  // namespace vsq
