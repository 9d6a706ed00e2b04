#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vsq/kernels.hpp"

namespace vsq {

namespace {

constexpr double kQuadTol = 1e-14;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("Mittag-Leffler order must lie in (0, 1]");
}

double series(double alpha, double z) {
    // Terms are formed in log space so that Γ(αn+α) never overflows.
    const double lz = std::log(std::fabs(z));
    const bool negative = z < 0.0;
    double sum = 0.0;
    double largest = 0.0;
    for (int n = 0; n < 100000; ++n) {
        const double mag = std::exp(n * lz - std::lgamma(alpha * n + alpha));
        const double term = (negative && (n & 1)) ? -mag : mag;
        sum += term;
        largest = std::max(largest, mag);
        if (n > 2 && mag < 1e-17 * std::max(std::fabs(sum), 1e-300) && mag < largest) break;
    }
    return sum;
}

// Completely monotone representation of e_α valid for α ∈ (0,1):
// e_α(t) = (1/π) ∫_0^∞ e^{-rt} r^α sin(απ) / (r^{2α} + 2 r^α cos(απ) + 1) dr.
double spectral_integral(double alpha, double t) {
    const double pi = boost::math::constants::pi<double>();
    const double s = std::sin(alpha * pi);
    const double c = std::cos(alpha * pi);
    auto f = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double ra = std::pow(r, alpha);
        const double den = ra * ra + 2.0 * ra * c + 1.0;
        return std::exp(-r * t) * ra * s / den;
    };
    // The integrand peaks near r = 1 as α → 1, so r = 1 is a breakpoint.
    boost::math::quadrature::tanh_sinh<double> inner;
    boost::math::quadrature::exp_sinh<double> outer;
    const double lo = inner.integrate(f, 0.0, 1.0, kQuadTol);
    const double hi = outer.integrate(f, 1.0, std::numeric_limits<double>::infinity(), kQuadTol);
    return (lo + hi) / pi;
}

}  // namespace

double mittag_leffler(double alpha, double z) {
    check_alpha(alpha);
    if (std::isnan(z)) throw std::invalid_argument("Mittag-Leffler argument is NaN");
    if (alpha == 1.0) {
        if (z > 709.0) throw std::overflow_error("Mittag-Leffler overflow for large positive argument");
        return std::exp(z);
    }
    if (z == 0.0) return 1.0 / boost::math::tgamma(alpha);
    if (z > 0.0) {
        // Growth is exp(z^{1/α}); refuse before the double range is exhausted.
        if (std::pow(z, 1.0 / alpha) > 700.0)
            throw std::overflow_error("Mittag-Leffler overflow for large positive argument");
        return series(alpha, z);
    }
    if (z >= -1.0) return series(alpha, z);
    const double t = std::pow(-z, 1.0 / alpha);
    return std::pow(t, 1.0 - alpha) * spectral_integral(alpha, t);
}

double e_alpha(double alpha, double t) {
    check_alpha(alpha);
    if (!(t > 0.0)) throw std::domain_error("e_alpha requires t > 0");
    if (alpha == 1.0) return std::exp(-t);
    const double ta = std::pow(t, alpha);
    if (ta <= 1.0) return std::pow(t, alpha - 1.0) * series(alpha, -ta);
    return spectral_integral(alpha, t);
}

}  // namespace vsq
