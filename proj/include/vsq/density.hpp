#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vsq/model.hpp"
#include "vsq/simulate.hpp"

namespace vsq {

// Histogram of ρ(x)·(law of X) with ρ(x) = min{1, √x_1, …, √x_m}, m ≤ 2. Cells are indexed
// i_0 + n_0·i_1 and values are weighted mass divided by the cell volume.
struct WeightedDensity {
    std::size_t dim = 1;
    std::vector<std::size_t> bins;           // per axis
    std::vector<double> bin_width;           // per axis
    std::vector<std::vector<double>> edges;  // per axis, starting at 0
    std::vector<double> values;
    double atom_mass_at_zero = 0.0;  // share of samples in [0, ε)^m
    std::vector<double> epsilon;     // per axis, one bin width by default
    double weighted_mass = 0.0;      // ∫ values
    double histogram_mass = 0.0;     // share of samples outside [0, ε)^m
    std::size_t n_samples = 0;
    bool degenerate = false;  // zero spread: regularity diagnostics do not apply
    bool few_samples = false; // fewer than 1e4 samples

    double cell_volume() const;
    double value(std::size_t i0, std::size_t i1 = 0) const { return values[i0 + bins[0] * i1]; }
};

struct DensityOptions {
    std::size_t bins = 0;   // per axis; 0 selects Freedman–Diaconis
    double epsilon = 0.0;   // 0 selects one bin width per axis
    std::size_t max_bins = 4000;
};

// samples: n × m with m ∈ {1, 2}.
WeightedDensity weighted_density(const Eigen::MatrixXd& samples, const DensityOptions& options = {});
WeightedDensity weighted_density(const std::vector<double>& samples, const DensityOptions& options = {});

struct IncrementCurve {
    std::vector<double> shifts;      // in state units, rounded to whole bins
    std::vector<std::size_t> shift_bins;
    std::vector<double> increments;  // max over axes of ∫|p*(x + s·e_k) − p*(x)| dx
    double exponent = 0.0;           // fitted λ̂
    double exponent_stderr = 0.0;
    double exponent_lo = 0.0;        // λ̂ ± 1.96 standard errors
    double exponent_hi = 0.0;
    double constant = 0.0;           // fitted C in I(s) ≈ C·s^λ̂
    double max_ratio = 0.0;          // max_s I(s) / (C·s^λ̂)
};

// Each shift must span at least 4 bins on every axis, else std::invalid_argument ("too few bins").
IncrementCurve besov_increment_curve(const WeightedDensity& wd, const std::vector<double>& shifts);

struct LimitDensityDiagnostics {
    WeightedDensity density;
    IncrementCurve increments;
    Eigen::VectorXd stationary_mean;  // A from the limit summary
    bool applicable = true;           // false for degenerate samples
};

// Post-burn-in marginal of an ensemble simulated from params; shifts are in state units.
LimitDensityDiagnostics limit_density_diagnostics(const ModelParams& params, const PathEnsemble& ens, double burn_in,
                                                  const std::vector<double>& shifts, const DensityOptions& options = {});

}  // namespace vsq
