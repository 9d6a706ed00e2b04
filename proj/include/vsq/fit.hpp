#pragma once

#include <span>

namespace vsq {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double rms_residual = 0.0;
};

// Ordinary least squares y ≈ intercept + slope·x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Least squares in log-log coordinates; all inputs must be positive.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace vsq
