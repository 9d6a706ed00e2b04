#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vsq/kernels.hpp"
#include "vsq/model.hpp"

namespace vsq {

enum class Scheme { Direct, Resolvent };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

// Standard normal keyed by (seed, path, counter); the same key always gives the same draw.
double keyed_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t counter);

struct SimulationOptions {
    Scheme scheme = Scheme::Direct;
    unsigned threads = 1;
    std::size_t record_stride = 1;  // keep every record_stride-th node; must divide n_steps
    std::size_t batch_size = 256;   // paths advanced together
};

// Paths are stored path-major: values[(p·n_records + r)·m + i].
struct PathEnsemble {
    GridSpec grid;  // simulation grid
    std::size_t n_paths = 0;
    std::size_t m = 0;
    std::size_t stride = 1;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::Direct;
    double negativity_fraction = 0.0;  // share of proposals clipped to 0
    std::vector<double> values;

    std::size_t n_records() const { return grid.n_steps / stride + 1; }
    double record_step() const { return grid.step * static_cast<double>(stride); }
    double at(std::size_t path, std::size_t record, std::size_t comp) const {
        return values[(path * n_records() + record) * m + comp];
    }

    // Record index of time t; throws unless t is a recorded node.
    std::size_t record_index(double t) const;

    // n_paths × m sample of X at time t.
    Eigen::MatrixXd marginal(double t) const;
};

PathEnsemble simulate_paths(const ModelParams& params, const GridSpec& grid, std::size_t n_paths, std::uint64_t seed,
                            const SimulationOptions& options = {});

struct McEstimate {
    cplx estimate;            // log of the sample mean of exp(∫⟨X_{t−s}, μ(ds)⟩)
    double standard_error = 0.0;  // delta method: sd(Y)/(√n·|mean Y|)
    bool degenerate = false;  // all samples identical
};

McEstimate mc_log_cf(const PathEnsemble& ens, const MeasureForcing& forcing, double t);

struct HolderCurve {
    std::vector<double> lags;
    std::vector<double> moments;  // time- and path-averaged |X_{t+δ} − X_t|^p
    double slope = 0.0;
    double slope_stderr = 0.0;
};

HolderCurve holder_moment_curve(const PathEnsemble& ens, double p, const std::vector<double>& lags);

// Samples of X at burn_in + t_j for each t_j.
std::vector<Eigen::MatrixXd> shifted_marginals(const PathEnsemble& ens, double burn_in, const std::vector<double>& times);

struct SampleMean {
    Eigen::VectorXd mean;
    Eigen::VectorXd standard_error;
};

SampleMean sample_mean(const Eigen::MatrixXd& samples);

// E|X_t|^p per record (Euclidean norm), the moment cache of an ensemble.
std::vector<double> moment_curve(const PathEnsemble& ens, double p);

// Little-endian dump: "VSQR1", then u64 m, u64 n_steps, u64 n_paths, f64 h, u64 seed, then the
// values in path-major order. n_steps and h describe the recorded grid.
void write_ensemble(const std::string& path, const PathEnsemble& ens);
PathEnsemble read_ensemble(const std::string& path);

}  // namespace vsq
