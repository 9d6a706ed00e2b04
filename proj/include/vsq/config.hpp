#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "vsq/kernels.hpp"
#include "vsq/model.hpp"
#include "vsq/moments.hpp"
#include "vsq/simulate.hpp"

namespace vsq {

// JSON ⇄ library types. Every object is parsed strictly: unknown keys, wrong types and
// out-of-range values raise std::invalid_argument naming the offending path.

KernelSpec kernel_from_json(const nlohmann::json& j, const std::string& where = "kernel");
nlohmann::json kernel_to_json(const KernelSpec& spec);

ModelParams model_from_json(const nlohmann::json& j, const std::string& where = "model");
nlohmann::json model_to_json(const ModelParams& params);

// {"step": h, "horizon": T}; T must be a whole number of steps.
GridSpec grid_from_json(const nlohmann::json& j, const std::string& where = "grid");

// A complex scalar is a number or a two-element array [re, im].
cplx complex_from_json(const nlohmann::json& j, const std::string& where);
Eigen::VectorXcd complex_vector_from_json(const nlohmann::json& j, std::size_t m, const std::string& where);

// {"atoms": [{"time": s, "weight": [...]}, …], "density": [[...], …]}
MeasureForcing forcing_from_json(const nlohmann::json& j, std::size_t m, const std::string& where = "forcing");

struct ResolventBlock {
    bool richardson = false;
    bool transpose = false;  // use β^T instead of β
};

struct RiccatiBlock {
    MeasureForcing forcing;
};

struct CfBlock {
    double t = 0.0;
    MeasureForcing forcing;
};

struct LimitBlock {
    std::vector<Eigen::VectorXcd> u;
    std::optional<GridSpec> resolvent_grid;
    std::optional<GridSpec> riccati_grid;
};

struct StationaryBlock {
    std::vector<double> times;
    std::vector<Eigen::VectorXcd> weights;
    std::optional<GridSpec> resolvent_grid;
    std::optional<GridSpec> riccati_grid;
};

struct AcovBlock {
    std::vector<double> lags;
    std::optional<GridSpec> grid;
};

struct SimulationBlock {
    std::size_t paths = 10000;
    Scheme scheme = Scheme::Direct;
    unsigned threads = 1;
    std::size_t record_stride = 1;
    bool dump = true;
    std::vector<Eigen::VectorXcd> cf_u;  // atoms u·δ_0 evaluated by Monte Carlo at cf_time
    double cf_time = 0.0;
    std::vector<double> holder_lags;
    double holder_p = 2.0;
};

struct DensityBlock {
    double time = 0.0;  // marginal time, or burn-in when limit is true
    bool limit = false;
    std::size_t bins = 0;
    double epsilon = 0.0;
    std::vector<double> shifts;
};

struct CheckBlock {
    std::size_t trials = 20;
};

struct RunConfig {
    ModelParams model;
    std::optional<GridSpec> grid;
    std::uint64_t seed = 0;
    std::string output = "out";
    std::optional<ResolventBlock> resolvent;
    std::optional<RiccatiBlock> riccati;
    std::optional<CfBlock> cf;
    std::optional<LimitBlock> limit;
    std::optional<StationaryBlock> stationary;
    std::optional<AcovBlock> acov;
    std::optional<SimulationBlock> simulation;
    std::optional<DensityBlock> density;
    std::optional<CheckBlock> check;
};

RunConfig parse_config(const nlohmann::json& j);

}  // namespace vsq
