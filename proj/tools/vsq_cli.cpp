#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "manifest.hpp"
#include "vsq/affine.hpp"
#include "vsq/config.hpp"
#include "vsq/csv.hpp"
#include "vsq/density.hpp"
#include "vsq/errors.hpp"
#include "vsq/kernels.hpp"
#include "vsq/moments.hpp"
#include "vsq/resolvents.hpp"
#include "vsq/riccati.hpp"
#include "vsq/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vsq::cli {
namespace {

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(M.row(r).transpose())));
    return rows;
}

json to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const Eigen::VectorXcd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

json to_json(const GridSpec& g) { return {{"step", g.step}, {"n_steps", g.n_steps}, {"horizon", g.horizon()}}; }

json to_json(const LimitSummary& s) {
    return {{"A", to_json(s.A)},
            {"R_integral", to_json(s.R_integral)},
            {"E_integral", to_json(s.E_integral)},
            {"N_basis", to_json(s.N_basis)},
            {"P", to_json(s.P)},
            {"independent_of_x0", s.independent_of_x0},
            {"identity_residual", s.identity_residual},
            {"C_beta", s.C_beta},
            {"tail_status", to_string(s.status)},
            {"window_ratio", s.window_ratio}};
}

json to_json(const LimitExponent& e) {
    return {{"exponent_re", e.exponent.real()},
            {"exponent_im", e.exponent.imag()},
            {"forms", {{"moment", to_json(e.exponent)}, {"direct", to_json(e.direct_form)}}},
            {"relative_gap", e.relative_gap},
            {"tail_status", to_string(e.status)},
            {"riccati_window_ratio", e.riccati_window_ratio}};
}

const GridSpec& need_grid(const RunConfig& c, const char* command) {
    if (!c.grid) throw std::invalid_argument(std::string("config: '") + command + "' needs a grid block");
    return *c.grid;
}

LimitOptions limit_options(const ModelParams& p, const std::optional<GridSpec>& rg, const std::optional<GridSpec>& qg) {
    LimitOptions o = default_limit_options(p);
    if (rg) o.resolvent_grid = *rg;
    if (qg) o.riccati_grid = *qg;
    return o;
}

std::string matrix_header(const char* name, std::size_t i, std::size_t j) {
    return std::string(name) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

class Run {
public:
    Run(std::string command, json config, RunConfig cfg, unsigned threads)
        : command_(std::move(command)), config_(std::move(config)), cfg_(std::move(cfg)), threads_(threads) {
        fs::create_directories(cfg_.output);
        fs::remove(fs::path(cfg_.output) / "error.json");
    }

    // Returns the process exit status.
    int execute() {
        int status = 0;
        if (command_ == "resolvent") resolvent();
        else if (command_ == "riccati") riccati();
        else if (command_ == "cf") cf();
        else if (command_ == "limit") limit();
        else if (command_ == "stationary-cf") stationary();
        else if (command_ == "moments") moments();
        else if (command_ == "acov") acov();
        else if (command_ == "simulate") simulate();
        else if (command_ == "density") density();
        else if (command_ == "check") status = check();
        else throw std::invalid_argument("unknown command " + command_);
        artifacts_.push_back("manifest.json");
        json hashed = config_;
        hashed.erase("output");
        write_json(path("manifest.json"), make_manifest(command_, hashed, cfg_.seed, artifacts_));
        return status;
    }

private:
    std::string path(const std::string& name) const { return (fs::path(cfg_.output) / name).string(); }

    void emit_json(const std::string& name, const json& j) {
        write_json(path(name), j);
        artifacts_.push_back(name);
    }

    CsvWriter csv(const std::string& name, std::vector<std::string> header) {
        artifacts_.push_back(name);
        return CsvWriter(path(name), std::move(header));
    }

    void resolvent() {
        const GridSpec& grid = need_grid(cfg_, "resolvent");
        const ResolventBlock block = cfg_.resolvent.value_or(ResolventBlock{});
        const ModelParams& p = cfg_.model;
        const Eigen::MatrixXd B = block.transpose ? Eigen::MatrixXd(p.beta.transpose()) : p.beta;
        const ResolventPair pair = resolvent_second_kind(p.kernel, B, grid, ResolventOptions{block.richardson});
        const std::size_t m = p.m();
        std::vector<std::string> header{"t"};
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) header.push_back(matrix_header("R", i, j));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) header.push_back(matrix_header("E", i, j));
        CsvWriter w = csv("resolvent.csv", header);
        std::vector<double> row(1 + 2 * m * m);
        for (std::size_t k = 1; k <= pair.size(); ++k) {
            row[0] = grid.node(k);
            std::size_t c = 1;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) row[c++] = pair.R(k)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) row[c++] = pair.E(k)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            w.row(row);
        }
        w.close();
        const ResolventIntegrals& in = pair.integrals();
        emit_json("resolvent.json", {{"grid", to_json(grid)},
                                     {"matrix", block.transpose ? "beta_transpose" : "beta"},
                                     {"richardson", block.richardson},
                                     {"R_integral", to_json(in.R_integral)},
                                     {"E_integral", to_json(in.E_integral)},
                                     {"R_grid", to_json(in.R_grid)},
                                     {"E_grid", to_json(in.E_grid)},
                                     {"R_tail", to_json(in.R_tail)},
                                     {"E_tail", to_json(in.E_tail)},
                                     {"tail_status", to_string(in.status)},
                                     {"window_ratio", in.window_ratio},
                                     {"integrable", in.integrable()}});
    }

    void riccati() {
        const GridSpec& grid = need_grid(cfg_, "riccati");
        if (!cfg_.riccati) throw std::invalid_argument("config: 'riccati' needs a riccati block with a forcing");
        const RiccatiSolution sol = solve_riccati(cfg_.model, cfg_.riccati->forcing, grid);
        const std::size_t m = cfg_.model.m();
        std::vector<std::string> header{"t"};
        for (std::size_t i = 0; i < m; ++i) {
            header.push_back("re_psi[" + std::to_string(i) + "]");
            header.push_back("im_psi[" + std::to_string(i) + "]");
        }
        CsvWriter w = csv("riccati.csv", header);
        std::vector<double> row(1 + 2 * m);
        double max_re = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= grid.n_steps; ++k) {
            const Eigen::VectorXcd v = sol.psi(k);
            row[0] = grid.node(k);
            for (std::size_t i = 0; i < m; ++i) {
                row[1 + 2 * i] = v(static_cast<Eigen::Index>(i)).real();
                row[2 + 2 * i] = v(static_cast<Eigen::Index>(i)).imag();
                max_re = std::max(max_re, row[1 + 2 * i]);
            }
            w.row(row);
        }
        w.close();
        const RiccatiTail& t = sol.tail();
        emit_json("riccati.json", {{"grid", to_json(grid)},
                                   {"residual", sol.residual()},
                                   {"max_re_psi", max_re},
                                   {"l1_norm", sol.lp_norm(1.0)},
                                   {"l2_norm", sol.lp_norm(2.0)},
                                   {"tail",
                                    {{"int_psi", to_json(t.int_psi)},
                                     {"int_R", to_json(t.int_R)},
                                     {"int_psi_sq", to_json(t.int_psi_sq)},
                                     {"status", to_string(t.status)},
                                     {"window_ratio", t.window_ratio}}}});
    }

    void cf() {
        const GridSpec& grid = need_grid(cfg_, "cf");
        if (!cfg_.cf) throw std::invalid_argument("config: 'cf' needs a cf block");
        const LogCf r = log_cf(cfg_.model, cfg_.cf->t, cfg_.cf->forcing, grid.step);
        emit_json("cf.json", {{"exponent_re", r.exponent.real()},
                              {"exponent_im", r.exponent.imag()},
                              {"forms", {{"direct", to_json(r.exponent)}, {"moment", to_json(r.moment_form)}}},
                              {"relative_gap", r.relative_gap},
                              {"diagnostics", {{"riccati_residual", r.riccati_residual}, {"step", grid.step}, {"t", cfg_.cf->t}}}});
    }

    void limit() {
        const LimitBlock block = cfg_.limit.value_or(LimitBlock{});
        const LimitOptions o = limit_options(cfg_.model, block.resolvent_grid, block.riccati_grid);
        const LimitSummary s = limit_summary(cfg_.model, o);
        json ex = json::array();
        for (const auto& u : block.u) {
            json e = to_json(limit_log_laplace(cfg_.model, u, o));
            e["u"] = to_json(u);
            ex.push_back(e);
        }
        emit_json("limit.json", {{"summary", to_json(s)},
                                 {"resolvent_grid", to_json(o.resolvent_grid)},
                                 {"riccati_grid", to_json(o.riccati_grid)},
                                 {"exponents", ex}});
    }

    void stationary() {
        if (!cfg_.stationary) throw std::invalid_argument("config: 'stationary-cf' needs a stationary block");
        const StationaryBlock& b = *cfg_.stationary;
        const LimitOptions o = limit_options(cfg_.model, b.resolvent_grid, b.riccati_grid);
        const LimitExponent e = stationary_fdd_log_cf(cfg_.model, b.times, b.weights, o);
        json out = to_json(e);
        out["summary"] = to_json(e.summary);
        out["times"] = b.times;
        emit_json("stationary_cf.json", out);
    }

    void moments() {
        const GridSpec& grid = need_grid(cfg_, "moments");
        const ModelParams& p = cfg_.model;
        const ResolventPair pair = resolvent_second_kind(p.kernel, p.beta, grid);
        const Eigen::MatrixXd M = mean_curve(p, pair);
        const std::size_t m = p.m();
        std::vector<std::string> header{"t"};
        for (std::size_t i = 0; i < m; ++i) header.push_back("mean[" + std::to_string(i) + "]");
        CsvWriter w = csv("moments.csv", header);
        std::vector<double> row(1 + m);
        for (std::size_t k = 0; k <= grid.n_steps; ++k) {
            row[0] = grid.node(k);
            for (std::size_t i = 0; i < m; ++i) row[1 + i] = M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
            w.row(row);
        }
        w.close();
        const MeanAt at = mean_at(p, grid.horizon(), grid.step);
        json lim;
        try {
            lim = to_json(limit_summary(p));
            lim["certified"] = true;
        } catch (const NumericalError& e) {
            lim = {{"certified", false}, {"reason", e.what()}};
        }
        emit_json("moments.json", {{"grid", to_json(grid)},
                                   {"mean_at_horizon", to_json(at.mean)},
                                   {"transpose_form_at_horizon", to_json(at.transpose_form)},
                                   {"relative_gap", at.relative_gap},
                                   {"limit_summary", lim}});
    }

    void acov() {
        if (!cfg_.acov) throw std::invalid_argument("config: 'acov' needs an acov block with lags");
        AutocovOptions o;
        if (cfg_.acov->grid) o.grid = *cfg_.acov->grid;
        const Autocovariance a = stationary_autocov(cfg_.model, cfg_.acov->lags, o);
        const std::size_t m = cfg_.model.m();
        std::vector<std::string> header{"lag"};
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) header.push_back(matrix_header("C", i, j));
        CsvWriter w = csv("acov.csv", header);
        std::vector<double> row(1 + m * m);
        for (std::size_t k = 0; k < a.lags.size(); ++k) {
            row[0] = a.lags[k];
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    row[1 + i * m + j] = a.values[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            w.row(row);
        }
        w.close();
        emit_json("acov.json", {{"grid", to_json(a.grid)}, {"tail_status", to_string(a.tail_status)}, {"summary", to_json(a.summary)}});
    }

    PathEnsemble run_simulation(const SimulationBlock& s, const GridSpec& grid) const {
        SimulationOptions o;
        o.scheme = s.scheme;
        o.threads = threads_ ? threads_ : s.threads;
        o.record_stride = s.record_stride;
        return simulate_paths(cfg_.model, grid, s.paths, cfg_.seed, o);
    }

    void simulate() {
        const GridSpec& grid = need_grid(cfg_, "simulate");
        const SimulationBlock s = cfg_.simulation.value_or(SimulationBlock{});
        const PathEnsemble ens = run_simulation(s, grid);
        if (s.dump) {
            write_ensemble(path("ensemble.bin"), ens);
            artifacts_.push_back("ensemble.bin");
        }
        const std::size_t m = ens.m;
        std::vector<std::string> header{"t"};
        for (std::size_t i = 0; i < m; ++i) header.push_back("mean[" + std::to_string(i) + "]");
        for (std::size_t i = 0; i < m; ++i) header.push_back("se[" + std::to_string(i) + "]");
        CsvWriter w = csv("simulate_summary.csv", header);
        std::vector<double> row(1 + 2 * m);
        for (std::size_t r = 0; r < ens.n_records(); ++r) {
            const double t = ens.record_step() * static_cast<double>(r);
            const SampleMean sm = sample_mean(ens.marginal(t));
            row[0] = t;
            for (std::size_t i = 0; i < m; ++i) {
                row[1 + i] = sm.mean(static_cast<Eigen::Index>(i));
                row[1 + m + i] = sm.standard_error(static_cast<Eigen::Index>(i));
            }
            w.row(row);
        }
        w.close();
        json mc = json::array();
        for (const auto& u : s.cf_u) {
            const McEstimate e = mc_log_cf(ens, MeasureForcing::point(0.0, u), s.cf_time);
            mc.push_back({{"u", to_json(u)},
                          {"t", s.cf_time},
                          {"estimate", to_json(e.estimate)},
                          {"standard_error", e.standard_error},
                          {"degenerate", e.degenerate}});
        }
        json holder = nullptr;
        if (!s.holder_lags.empty()) {
            const HolderCurve h = holder_moment_curve(ens, s.holder_p, s.holder_lags);
            holder = {{"p", s.holder_p}, {"lags", h.lags}, {"moments", h.moments}, {"slope", h.slope}, {"slope_stderr", h.slope_stderr}};
        }
        emit_json("simulate.json", {{"grid", to_json(grid)},
                                    {"n_paths", ens.n_paths},
                                    {"seed", ens.seed},
                                    {"scheme", to_string(ens.scheme)},
                                    {"record_stride", ens.stride},
                                    {"negativity_fraction", ens.negativity_fraction},
                                    {"mc_log_cf", mc},
                                    {"holder", holder}});
    }

    void density() {
        const GridSpec& grid = need_grid(cfg_, "density");
        if (!cfg_.density) throw std::invalid_argument("config: 'density' needs a density block");
        const DensityBlock& d = *cfg_.density;
        const SimulationBlock s = cfg_.simulation.value_or(SimulationBlock{});
        const PathEnsemble ens = run_simulation(s, grid);
        DensityOptions o;
        o.bins = d.bins;
        o.epsilon = d.epsilon;
        WeightedDensity wd;
        IncrementCurve ic;
        bool applicable = true;
        json extra = json::object();
        if (d.limit) {
            const LimitDensityDiagnostics diag = limit_density_diagnostics(cfg_.model, ens, d.time, d.shifts, o);
            wd = diag.density;
            ic = diag.increments;
            applicable = diag.applicable;
            extra["stationary_mean"] = to_json(diag.stationary_mean);
        } else {
            wd = weighted_density(ens.marginal(d.time), o);
            applicable = !wd.degenerate;
            if (applicable && !d.shifts.empty()) ic = besov_increment_curve(wd, d.shifts);
        }
        std::vector<std::string> header;
        for (std::size_t a = 0; a < wd.dim; ++a) header.push_back(wd.dim == 1 ? "bin_center" : "bin_center[" + std::to_string(a) + "]");
        header.push_back("weighted_density");
        CsvWriter w = csv("density.csv", header);
        const std::size_t n1 = wd.dim == 2 ? wd.bins[1] : 1;
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            for (std::size_t i0 = 0; i0 < wd.bins[0]; ++i0) {
                std::vector<double> row{(static_cast<double>(i0) + 0.5) * wd.bin_width[0]};
                if (wd.dim == 2) row.push_back((static_cast<double>(i1) + 0.5) * wd.bin_width[1]);
                row.push_back(wd.value(i0, i1));
                w.row(row);
            }
        }
        w.close();
        CsvWriter wi = csv("increments.csv", {"shift", "increment_integral"});
        for (std::size_t k = 0; k < ic.shifts.size(); ++k) wi.row({ic.shifts[k], ic.increments[k]});
        wi.close();
        json out = {{"time", d.time},
                    {"limit", d.limit},
                    {"n_samples", wd.n_samples},
                    {"bins", wd.bins},
                    {"bin_width", wd.bin_width},
                    {"epsilon", wd.epsilon},
                    {"atom_mass_at_zero", wd.atom_mass_at_zero},
                    {"weighted_mass", wd.weighted_mass},
                    {"histogram_mass", wd.histogram_mass},
                    {"degenerate", wd.degenerate},
                    {"few_samples", wd.few_samples},
                    {"regularity_applicable", applicable},
                    {"lambda_hat", ic.exponent},
                    {"lambda_stderr", ic.exponent_stderr},
                    {"lambda_band", {ic.exponent_lo, ic.exponent_hi}},
                    {"increment_constant", ic.constant},
                    {"max_ratio_to_fit", ic.max_ratio},
                    {"negativity_fraction", ens.negativity_fraction}};
        out.update(extra);
        emit_json("density.json", out);
    }

    int check() {
        const ModelParams& p = cfg_.model;
        const std::size_t trials = cfg_.check ? cfg_.check->trials : 20;
        const GridSpec probe = cfg_.grid && cfg_.grid->horizon() >= 1.0 ? *cfg_.grid : GridSpec{0.01, 1000};
        const AdmissibilityReport adm = check_admissibility(p.kernel, probe);
        const SufficientConditionReport sc = sufficient_condition_checks(p);

        json invariants = json::array();
        bool all = true;
        auto record = [&](const std::string& name, bool ok, const std::string& detail) {
            invariants.push_back({{"name", name}, {"passed", ok}, {"detail", detail}});
            all = all && ok;
        };

        json limit;
        bool independent = false;
        try {
            const LimitSummary s = limit_summary(p);
            independent = s.independent_of_x0;
            limit = to_json(s);
            limit["certified"] = true;
            const Eigen::MatrixXd PP = s.P * s.P - s.P;
            record("projector idempotent and symmetric", PP.norm() <= 1e-10 && (s.P - s.P.transpose()).norm() <= 1e-10,
                   "‖P²−P‖ = " + format_number(PP.norm()));
            record("limiting mean nonnegative", s.A.minCoeff() >= -1e-8, "min A = " + format_number(s.A.minCoeff()));
        } catch (const NumericalError& e) {
            limit = {{"certified", false}, {"reason", e.what()}};
        }

        const GridSpec small{0.01, 500};
        {
            const ResolventPair a = resolvent_second_kind(p.kernel, p.beta, small);
            const ResolventPair b = resolvent_second_kind(p.kernel, p.beta.transpose(), small);
            double gap = 0.0, scale = 0.0;
            for (std::size_t k = 1; k <= small.n_steps; ++k) {
                gap = std::max(gap, (a.E(k) - b.E(k).transpose()).cwiseAbs().maxCoeff());
                scale = std::max(scale, a.E(k).cwiseAbs().maxCoeff());
            }
            record("transpose identity E_beta = (E_beta^T)^T", gap <= 1e-10 * std::max(1.0, scale), "max gap = " + format_number(gap));
        }
        try {
            const MeanAt at = mean_at(p, small.horizon(), small.step);
            record("first-moment forms agree", true, "relative gap = " + format_number(at.relative_gap));
            record("mean nonnegative", at.mean.minCoeff() >= -1e-8, "min mean = " + format_number(at.mean.minCoeff()));
        } catch (const NumericalError& e) {
            record("first-moment forms agree", false, e.what());
        }

        std::mt19937_64 rng(cfg_.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const auto m = static_cast<Eigen::Index>(p.m());
        double worst_re = -std::numeric_limits<double>::infinity(), worst_gap = 0.0, worst_mod = -1.0;
        bool forms_ok = true;
        std::string forms_detail;
        for (std::size_t k = 0; k < trials; ++k) {
            Eigen::VectorXcd u(m);
            for (Eigen::Index i = 0; i < m; ++i) u(i) = cplx(-3.0 * unif(rng), 4.0 * unif(rng) - 2.0);
            const double s = 0.01 * std::floor(300.0 * unif(rng));
            MeasureForcing f;
            f.atoms.push_back({0.0, u});
            f.atoms.push_back({s, 0.5 * u});
            const RiccatiSolution sol = solve_riccati(p, f, small);
            worst_re = std::max(worst_re, sol.values().real().maxCoeff());
            try {
                const LogCf c = log_cf(p, small.horizon(), f, small.step);
                worst_gap = std::max(worst_gap, c.relative_gap);
                worst_mod = std::max(worst_mod, c.exponent.real());
            } catch (const NumericalError& e) {
                forms_ok = false;
                forms_detail = e.what();
            }
        }
        record("sign invariant Re psi <= 1e-10", worst_re <= 1e-10, "max Re psi = " + format_number(worst_re));
        record("dual affine forms agree", forms_ok, forms_ok ? "max relative gap = " + format_number(worst_gap) : forms_detail);
        record("modulus bound Re log_cf <= 1e-8", trials == 0 || worst_mod <= 1e-8, "max Re exponent = " + format_number(worst_mod));

        json comps = json::array();
        for (const auto& c : adm.components)
            comps.push_back({{"gamma_estimate", c.gamma_estimate}, {"alpha_estimate", c.alpha_estimate}, {"C1", c.C1},
                             {"C2", c.C2}, {"C3", c.C3}, {"C_star", c.C_star}, {"monotone_ok", c.monotone_ok},
                             {"nonneg_ok", c.nonneg_ok}});
        emit_json("check.json",
                  {{"admissibility",
                    {{"gamma_estimate", adm.gamma_estimate}, {"alpha_estimate", adm.alpha_estimate}, {"C1", adm.C1},
                     {"C2", adm.C2}, {"C3", adm.C3}, {"C_star", adm.C_star}, {"monotone_ok", adm.monotone_ok},
                     {"nonneg_ok", adm.nonneg_ok}, {"condition_v_ok", adm.condition_v_ok},
                     {"condition_K_ok", adm.condition_K_ok}, {"condition_R_ok", adm.condition_R_ok},
                     {"components", comps}}},
                   {"sufficient_conditions",
                    {{"beta_norm2", sc.beta_norm2}, {"kernel_l1_sum", sc.kernel_l1_sum}, {"condition_a", sc.condition_a},
                     {"betaTbeta_min_eig", sc.betaTbeta_min_eig}, {"kstar_nonintegrable", sc.kstar_nonintegrable},
                     {"condition_b", sc.condition_b}, {"numeric_integrable", sc.numeric_integrable},
                     {"numeric_status", to_string(sc.numeric_status)},
                     {"numeric_identity_residual", sc.numeric_identity_residual}, {"limit_verdict", sc.limit_verdict},
                     {"consistent", sc.consistent}}},
                   {"limit", limit},
                   {"independence_criterion", independent},
                   {"invariants", invariants},
                   {"all_invariants_passed", all}});
        return all ? 0 : 2;
    }

    std::string command_;
    json config_;
    RunConfig cfg_;
    unsigned threads_;
    std::vector<std::string> artifacts_;
};

void write_error(const std::string& dir, const std::string& command, const char* kind, const std::string& message) {
    if (dir.empty()) return;
    try {
        fs::create_directories(dir);
        write_json((fs::path(dir) / "error.json").string(), {{"command", command}, {"error", kind}, {"message", message}});
    } catch (...) {
    }
}

}  // namespace
}  // namespace vsq::cli

int main(int argc, char** argv) {
    using namespace vsq;
    CLI::App app{"Volterra square-root process toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir, scheme;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> step, horizon;
    unsigned threads = 0;
    app.add_option("-c,--config", config_path, "JSON run configuration")->required();
    app.add_option("-o,--out", out_dir, "output directory (overrides config.output)");
    app.add_option("--seed", seed, "override the random seed");
    app.add_option("--paths", paths, "override simulation.paths");
    app.add_option("--step", step, "override grid.step");
    app.add_option("--horizon", horizon, "override grid.horizon");
    app.add_option("--scheme", scheme, "override simulation.scheme (direct or resolvent)");
    app.add_option("--threads", threads, "worker threads for simulation (results do not depend on it)");
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"resolvent", "resolvent R_B and E_B on the grid with tail integrals"},
        {"riccati", "Riccati-Volterra solution for a measure forcing"},
        {"cf", "exponential-affine transform exponent at time t"},
        {"limit", "limiting mean, projector and limit Laplace exponents"},
        {"stationary-cf", "stationary finite-dimensional transform exponent"},
        {"moments", "first-moment curve and limit summary"},
        {"acov", "stationary autocovariance at the given lags"},
        {"simulate", "Monte Carlo ensemble with summaries and estimators"},
        {"density", "weighted density histogram and increment diagnostics"},
        {"check", "admissibility, sufficient conditions and invariant suite"},
    };
    for (const auto& [name, desc] : commands) app.add_subcommand(name, desc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    nlohmann::json config;
    std::string dir = out_dir;
    try {
        std::ifstream is(config_path);
        if (!is) throw std::invalid_argument("cannot read config file " + config_path);
        config = nlohmann::json::parse(is);
        if (!config.is_object()) throw std::invalid_argument("config: top level must be an object");
        if (!out_dir.empty()) config["output"] = out_dir;
        if (seed) config["seed"] = *seed;
        if (paths) config["simulation"]["paths"] = *paths;
        if (!scheme.empty()) config["simulation"]["scheme"] = scheme;
        if (step) config["grid"]["step"] = *step;
        if (horizon) config["grid"]["horizon"] = *horizon;
        if (dir.empty()) dir = config.value("output", std::string("out"));
        RunConfig cfg = parse_config(config);
        dir = cfg.output;
        cli::Run run(command, config, std::move(cfg), threads);
        return run.execute();
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        cli::write_error(dir, command, "numerical", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        cli::write_error(dir, command, "validation", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        cli::write_error(dir, command, "validation", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        cli::write_error(dir, command, "validation", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        cli::write_error(dir, command, "numerical", e.what());
        return 2;
    }
}
