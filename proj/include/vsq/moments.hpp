#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vsq/model.hpp"
#include "vsq/resolvents.hpp"
#include "vsq/tail.hpp"

namespace vsq {

// Grids used for quantities over [0, ∞): the resolvent grid yields ∫R_β and ∫E_β, the
// Riccati grid is marched until ψ has decayed.
struct LimitOptions {
    GridSpec resolvent_grid;
    GridSpec riccati_grid;
};

LimitOptions default_limit_options(const ModelParams& params);

struct LimitSummary {
    Eigen::VectorXd A;           // limiting mean (I − ∫R_β)x0 + (∫E_β)b
    Eigen::MatrixXd R_integral;  // ∫_0^∞ R_β
    Eigen::MatrixXd E_integral;  // ∫_0^∞ E_β
    Eigen::MatrixXd N_basis;     // orthonormal columns spanning ker(∫R_β − I)
    Eigen::MatrixXd P;           // orthogonal projector onto the complement of N
    bool independent_of_x0 = false;
    double identity_residual = 0.0;  // ‖∫R_β − I‖_F
    double C_beta = 0.0;             // (1 + ‖R_β‖_{L¹})√m + ‖E_β‖_{L¹}
    TailStatus status = TailStatus::NotConverged;
    double window_ratio = 0.0;
};

// E[X_{t_k}] for k = 0..N as columns, read off the cumulative integrals of the pair for β.
Eigen::MatrixXd mean_curve(const ModelParams& params, const ResolventPair& pair_beta);

struct MeanAt {
    Eigen::VectorXd mean;            // (I − ∫_0^t R_β)x0 + (∫_0^t E_β)b
    Eigen::VectorXd transpose_form;  // (I + ∫(E_{β^T})^Tβ)x0 + (∫(E_{β^T})^T)b
    double relative_gap = 0.0;
};

// t must be a multiple of step. Throws NumericalError when the two forms differ by more
// than 1e-6 relative.
MeanAt mean_at(const ModelParams& params, double t, double step);

// Throws NumericalError ("no limiting distribution certified") if the E_β tail has not converged.
LimitSummary limit_summary(const ModelParams& params, const ResolventPair& pair_beta);
LimitSummary limit_summary(const ModelParams& params, const LimitOptions& options);
LimitSummary limit_summary(const ModelParams& params);

struct AutocovOptions {
    GridSpec grid;  // step 0 selects a default from the largest lag and the damping rates
};

struct Autocovariance {
    std::vector<double> lags;
    std::vector<Eigen::MatrixXd> values;  // one m×m matrix per lag
    LimitSummary summary;
    TailStatus tail_status = TailStatus::NotConverged;
    GridSpec grid;
};

// ∫_0^∞ E_β(ℓ+u)·diag(σ_i²A_i)·E_β(u)^T du by cell quadrature on the grid plus the fitted tails.
// Lags off the grid are interpolated linearly.
Autocovariance stationary_autocov(const ModelParams& params, const std::vector<double>& lags,
                                  const AutocovOptions& options = {});

struct SufficientConditionReport {
    double beta_norm2 = 0.0;         // ‖β‖₂
    double kernel_l1_sum = 0.0;      // Σ_j ∫K_j, +∞ when some λ_j = 0
    bool condition_a = false;        // ‖β‖₂·Σ∫K_j < 1, predicts R_β ∈ L¹
    double betaTbeta_min_eig = 0.0;  // smallest eigenvalue of β^Tβ
    bool kstar_nonintegrable = false;
    bool condition_b = false;        // predicts ∫R_β = I
    bool numeric_integrable = false;
    TailStatus numeric_status = TailStatus::NotConverged;
    double numeric_identity_residual = 0.0;  // ‖∫R_β − I‖_F, NaN when not integrable
    std::string limit_verdict;  // "identity", "not_identity", "undetermined" or "not_integrable"
    bool consistent = true;     // predictions that fired are confirmed numerically
};

SufficientConditionReport sufficient_condition_checks(const ModelParams& params, const LimitOptions& options);
SufficientConditionReport sufficient_condition_checks(const ModelParams& params);

}  // namespace vsq
