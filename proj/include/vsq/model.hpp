#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vsq/kernels.hpp"

namespace vsq {

using cplx = std::complex<double>;

// Admissible tuple (b, β, σ, K) with initial state x0.
struct ModelParams {
    Eigen::VectorXd b;
    Eigen::MatrixXd beta;
    Eigen::VectorXd sigma;
    KernelSpec kernel;
    Eigen::VectorXd x0;

    std::size_t m() const { return kernel.m(); }

    // Throws std::invalid_argument on dimension mismatch, negative b, σ, x0, negative
    // off-diagonal β, or non-finite entries.
    void validate() const;
};

struct Atom {
    double time = 0.0;
    Eigen::VectorXcd weight;
};

// μ = Σ_j u_j δ_{s_j} + f(t)dt with Re u_j ≤ 0 and Re f ≤ 0 componentwise. The density is
// sampled on the nodes of the grid used by the solvers (density[k] = f(t_k)).
struct MeasureForcing {
    std::vector<Atom> atoms;
    std::vector<Eigen::VectorXcd> density;

    static MeasureForcing point(double time, const Eigen::VectorXcd& weight);
    bool empty() const;
    void validate(std::size_t m) const;

    // Per-node masses μ({t_j}) + h·f(t_j) on the nodes t_0..t_N of the grid; atoms are snapped
    // to the nearest node and rejected when further than 1e-6·h/2 from it.
    Eigen::MatrixXcd node_masses(const GridSpec& grid, std::size_t m) const;

    // |μ|([0,T]) = Σ|u_j| + ∫|f| (Euclidean modulus per atom, left-point rule for f).
    double total_variation(const GridSpec& grid) const;
};

}  // namespace vsq
