#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vsq/kernels.hpp"
#include "vsq/tail.hpp"

namespace vsq {

struct ResolventOptions {
    // Combine the solutions on h and h/2 as 2·E_{h/2} − E_h (second-order node values).
    bool richardson = false;
};

struct ResolventIntegrals {
    Eigen::MatrixXd R_integral;  // ∫_0^∞ R_B: grid part plus tail
    Eigen::MatrixXd E_integral;  // ∫_0^∞ E_B: grid part plus tail
    Eigen::MatrixXd R_grid;      // ∫_0^T R_B
    Eigen::MatrixXd E_grid;      // ∫_0^T E_B
    Eigen::MatrixXd R_tail;      // extrapolated ∫_T^∞ R_B
    Eigen::MatrixXd E_tail;      // extrapolated ∫_T^∞ E_B
    TailStatus status = TailStatus::NotConverged;
    double window_ratio = 0.0;   // ‖∫_{T/2}^T E‖ / ‖∫_0^T E‖
    std::vector<TailFit> E_fits; // per entry, column-major; ok = false for negligible or unfit entries

    bool integrable() const { return status != TailStatus::NotConverged; }
};

// Grid samples of R_B and E_B at the nodes t_1..t_N (t_0 is omitted because E_B(0) = K(0)
// is infinite for singular kernels). E_B solves E = K + K∗(B E) and R_B = E_B·(−B).
class ResolventPair {
public:
    // Node values and cumulative integrals are column-major m×m blocks; tail_power feeds the
    // extrapolation model c·t^{-p}·e^{-rt}.
    ResolventPair(GridSpec grid, Eigen::MatrixXd B, bool richardson, std::vector<double> E, std::vector<double> R,
                  std::vector<double> cumE, std::vector<double> cumR, double tail_power);

    const GridSpec& grid() const { return grid_; }
    const Eigen::MatrixXd& B() const { return B_; }
    std::size_t m() const { return static_cast<std::size_t>(B_.rows()); }
    std::size_t size() const { return grid_.n_steps; }
    bool richardson() const { return richardson_; }

    // k ∈ [1, n_steps]
    Eigen::Map<const Eigen::MatrixXd> E(std::size_t k) const;
    Eigen::Map<const Eigen::MatrixXd> R(std::size_t k) const;

    // ∫_0^{t_k} E_B and ∫_0^{t_k} R_B, k ∈ [0, n_steps]
    Eigen::Map<const Eigen::MatrixXd> E_cumulative(std::size_t k) const;
    Eigen::Map<const Eigen::MatrixXd> R_cumulative(std::size_t k) const;

    // Entry (i, j) of E_B at every node t_1..t_N.
    std::vector<double> E_entry(std::size_t i, std::size_t j) const;

    // Extrapolated tail and convergence flag, computed once at construction.
    const ResolventIntegrals& integrals() const { return integrals_; }

private:
    GridSpec grid_;
    Eigen::MatrixXd B_;
    bool richardson_;
    std::vector<double> E_, R_, cumE_, cumR_;
    ResolventIntegrals integrals_;
};

// Power p of the fitted tail model used for extrapolation: the slowest H+3/2 among the
// components with the smallest damping rate, or 0 when all of those have H = 1/2 and the
// resolvent decays exponentially.
double resolvent_tail_power(const KernelSpec& spec);

ResolventPair resolvent_second_kind(const KernelSpec& spec, const Eigen::MatrixXd& B, const GridSpec& grid,
                                    const ResolventOptions& options = {});

ResolventIntegrals resolvent_integrals(const ResolventPair& pair);

// Scalar E_β for K(t) = t^{H-1/2}e^{-λt}/Γ(H+1/2) and β < 0 via the Mittag-Leffler function.
double closed_form_E_fractional(double H, double lambda, double beta, double t);

}  // namespace vsq
