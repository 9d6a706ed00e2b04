#pragma once

#include <span>
#include <string>

namespace vsq {

enum class TailStatus {
    Converged,     // trailing-window criterion met on the grid
    Extrapolated,  // window criterion missed, but a decaying tail model fits and was integrated
    NotConverged,  // neither: the integral over [0, ∞) is not trustworthy
};

std::string to_string(TailStatus s);
TailStatus worst(TailStatus a, TailStatus b);

// |v(t)| ≈ c·t^{-p}·e^{-r t} with the power p fixed by the caller.
struct TailFit {
    double amplitude = 0.0;  // signed c
    double rate = 0.0;       // r >= 0
    double power = 0.0;      // p
    double rms_log_residual = 0.0;
    bool ok = false;
};

// Fits on samples with t in [t_lo, ∞). A sign change or a growing tail gives ok = false.
TailFit fit_tail(std::span<const double> t, std::span<const double> v, double power, double t_lo);

// ∫_T^∞ c t^{-p} e^{-rt} dt for a fitted model (0 when the model is not ok).
double tail_integral(const TailFit& fit, double T);

}  // namespace vsq
