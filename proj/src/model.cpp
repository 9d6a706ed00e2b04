#include "vsq/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vsq {

void ModelParams::validate() const {
    kernel.validate();
    const auto m = static_cast<Eigen::Index>(kernel.m());
    if (b.size() != m || sigma.size() != m || x0.size() != m || beta.rows() != m || beta.cols() != m)
        throw std::invalid_argument("model: b, sigma, x0 must have length m and beta must be m×m, m = " +
                                    std::to_string(m));
    if (!b.allFinite() || !sigma.allFinite() || !x0.allFinite() || !beta.allFinite())
        throw std::invalid_argument("model: non-finite parameter");
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b(i) < 0.0) throw std::invalid_argument("model: b must be componentwise >= 0");
        if (sigma(i) < 0.0) throw std::invalid_argument("model: sigma must be componentwise >= 0");
        if (x0(i) < 0.0) throw std::invalid_argument("model: x0 must be componentwise >= 0");
        for (Eigen::Index j = 0; j < m; ++j)
            if (i != j && beta(i, j) < 0.0)
                throw std::invalid_argument("model: off-diagonal entries of beta must be >= 0");
    }
}

MeasureForcing MeasureForcing::point(double time, const Eigen::VectorXcd& weight) {
    MeasureForcing f;
    f.atoms.push_back({time, weight});
    return f;
}

bool MeasureForcing::empty() const {
    for (const auto& a : atoms)
        if (a.weight.cwiseAbs().maxCoeff() > 0.0) return false;
    for (const auto& d : density)
        if (d.size() > 0 && d.cwiseAbs().maxCoeff() > 0.0) return false;
    return true;
}

void MeasureForcing::validate(std::size_t m) const {
    const auto mi = static_cast<Eigen::Index>(m);
    for (const auto& a : atoms) {
        if (!std::isfinite(a.time) || a.time < 0.0) throw std::invalid_argument("forcing: atom times must be >= 0");
        if (a.weight.size() != mi) throw std::invalid_argument("forcing: atom weight must have length m");
        if (!a.weight.allFinite()) throw std::invalid_argument("forcing: non-finite atom weight");
        if (a.weight.real().maxCoeff() > 0.0)
            throw std::invalid_argument("forcing: atom weights must have nonpositive real part");
    }
    for (const auto& d : density) {
        if (d.size() != mi) throw std::invalid_argument("forcing: density values must have length m");
        if (!d.allFinite()) throw std::invalid_argument("forcing: non-finite density value");
        if (d.real().maxCoeff() > 0.0) throw std::invalid_argument("forcing: density must have nonpositive real part");
    }
}

Eigen::MatrixXcd MeasureForcing::node_masses(const GridSpec& grid, std::size_t m) const {
    validate(m);
    const std::size_t N = grid.n_steps;
    const double h = grid.step;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(N + 1));
    for (const auto& a : atoms) {
        const double pos = a.time / h;
        const double j = std::round(pos);
        if (std::fabs(a.time - j * h) > 0.5e-6 * h)
            throw std::invalid_argument("forcing: atom at t = " + std::to_string(a.time) + " is not on a grid node");
        if (j > static_cast<double>(N)) throw std::invalid_argument("forcing: atom beyond the grid horizon");
        out.col(static_cast<Eigen::Index>(j)) += a.weight;
    }
    if (!density.empty()) {
        if (density.size() < N) throw std::invalid_argument("forcing: density must be sampled on every grid node");
        for (std::size_t j = 0; j < N; ++j) out.col(static_cast<Eigen::Index>(j)) += h * density[j];
    }
    return out;
}

double MeasureForcing::total_variation(const GridSpec& grid) const {
    const double T = grid.horizon();
    double tv = 0.0;
    for (const auto& a : atoms)
        if (a.time <= T + 0.5e-6 * grid.step) tv += a.weight.norm();
    const std::size_t n = std::min(density.size(), grid.n_steps);
    for (std::size_t j = 0; j < n; ++j) tv += grid.step * density[j].norm();
    return tv;
}

}  // namespace vsq
