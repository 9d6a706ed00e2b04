#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vsq/model.hpp"
#include "vsq/moments.hpp"
#include "vsq/tail.hpp"

namespace vsq {

// All pairings below are bilinear: ⟨z, w⟩ = Σ z_i w_i without complex conjugation.

struct LogCf {
    cplx exponent;     // ⟨x0, μ([0,t])⟩ + ∫_0^t ⟨x0, R(ψ)⟩ + ∫_0^t ⟨b, ψ⟩
    cplx moment_form;  // ∫⟨E[X_{t−s}], μ(ds)⟩ + Σ_i (σ_i²/2) ∫ E[X_{i,t−s}] ψ_i(s)² ds
    double relative_gap = 0.0;
    double riccati_residual = 0.0;
};

// log E[exp(∫_{[0,t]} ⟨X_{t−s}, μ(ds)⟩)] on the grid {k·step}; t must be a node and μ must be
// supported in [0, t]. Throws NumericalError if the two forms differ by more than 1e-4 relative.
LogCf log_cf(const ModelParams& params, double t, const MeasureForcing& forcing, double step);

struct LimitExponent {
    cplx exponent;     // Σ_j ⟨A, u_j⟩ + Σ_i (σ_i²/2) A_i ∫_0^∞ ψ_i²
    cplx direct_form;  // Σ_j ⟨x0, u_j⟩ + ∫_0^∞ ⟨x0, R(ψ)⟩ + ∫_0^∞ ⟨b, ψ⟩
    double relative_gap = 0.0;
    TailStatus status = TailStatus::NotConverged;  // worst of the resolvent and Riccati tails
    double riccati_window_ratio = 0.0;
    LimitSummary summary;
};

// Laplace/Fourier exponent of the limiting law π_{x0} at u ∈ C_-^m.
LimitExponent limit_log_laplace(const ModelParams& params, const Eigen::VectorXcd& u, const LimitOptions& options);
LimitExponent limit_log_laplace(const ModelParams& params, const Eigen::VectorXcd& u);

// Exponent of the stationary finite-dimensional law at t_1 < … < t_n, built from
// μ = Σ_j u_j δ_{t_n − t_j}. The differences t_n − t_j must be multiples of the Riccati step.
LimitExponent stationary_fdd_log_cf(const ModelParams& params, const std::vector<double>& times,
                                    const std::vector<Eigen::VectorXcd>& weights, const LimitOptions& options);
LimitExponent stationary_fdd_log_cf(const ModelParams& params, const std::vector<double>& times,
                                    const std::vector<Eigen::VectorXcd>& weights);

}  // namespace vsq
