#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vsq/kernels.hpp"
#include "vsq/model.hpp"
#include "vsq/tail.hpp"

namespace vsq {

// R_i(u) = Σ_j u_j β_{ji} + (σ_i²/2) u_i², with the bilinear pairing (no conjugation).
Eigen::VectorXcd quadratic_map(const ModelParams& params, const Eigen::VectorXcd& u);

// Analytic Jacobian of quadratic_map: β^T + diag(σ_i² u_i).
Eigen::MatrixXcd quadratic_map_jacobian(const ModelParams& params, const Eigen::VectorXcd& u);

struct RiccatiOptions {
    double blowup_threshold = 1e8;
    double tail_window_tol = 1e-8;
};

struct RiccatiTail {
    Eigen::VectorXcd int_psi;     // ∫_0^∞ ψ
    Eigen::VectorXcd int_R;       // ∫_0^∞ R(ψ)
    Eigen::VectorXcd int_psi_sq;  // ∫_0^∞ ψ_i² per component
    TailStatus status = TailStatus::NotConverged;
    double window_ratio = 0.0;
};

class RiccatiSolution {
public:
    RiccatiSolution(ModelParams params, GridSpec grid, MeasureForcing forcing, Eigen::MatrixXcd psi,
                    double residual, RiccatiOptions options);

    const GridSpec& grid() const { return grid_; }
    const ModelParams& params() const { return params_; }
    const MeasureForcing& forcing() const { return forcing_; }
    std::size_t m() const { return static_cast<std::size_t>(psi_.rows()); }

    // ψ(t_k) for k = 0..N; ψ(t_0) = 0 because atoms at t are excluded from ψ(t).
    Eigen::VectorXcd psi(std::size_t k) const { return psi_.col(static_cast<Eigen::Index>(k)); }
    const Eigen::MatrixXcd& values() const { return psi_; }

    // Largest absolute defect of the discrete fixed-point equation over all steps.
    double residual() const { return residual_; }

    // ∫_0^{t_k} g(ψ) by the right-endpoint rule that matches the discretization.
    Eigen::VectorXcd integral_psi(std::size_t k) const;
    Eigen::VectorXcd integral_R(std::size_t k) const;
    Eigen::VectorXcd integral_psi_sq(std::size_t k) const;

    // ‖ψ_i‖ in L^p([0,T]) of the Euclidean modulus.
    double lp_norm(double p) const;

    const RiccatiTail& tail() const { return tail_; }

private:
    ModelParams params_;
    GridSpec grid_;
    MeasureForcing forcing_;
    Eigen::MatrixXcd psi_;
    double residual_;
    RiccatiTail tail_;
};

RiccatiSolution solve_riccati(const ModelParams& params, const MeasureForcing& forcing, const GridSpec& grid,
                              const RiccatiOptions& options = {});

RiccatiTail tail_integrals(const RiccatiSolution& sol);

// D_νψ(·, μ) at the nodes t_0..t_N (columns), solving the linearized equation with the same scheme.
Eigen::MatrixXcd directional_derivative(const ModelParams& params, const MeasureForcing& base,
                                        const MeasureForcing& direction, const GridSpec& grid);

}  // namespace vsq
