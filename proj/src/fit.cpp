#include "vsq/fit.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace vsq {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("fit_line needs two equally sized samples of size >= 2");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / static_cast<double>(n));
    f.slope_stderr = n > 2 ? std::sqrt(ss / static_cast<double>(n - 2) / sxx) : 0.0;
    return f;
}

LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw std::invalid_argument("fit_loglog: abscissae must be positive");
        lx[i] = std::log(x[i]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw std::invalid_argument("fit_loglog: ordinates must be positive");
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

}  // namespace vsq
