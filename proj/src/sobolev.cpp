#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vsq/kernels.hpp"

namespace vsq {

namespace {

double matrix_norm(const KernelSpec& spec, double t) {
    double v = 0.0;
    for (const auto& k : spec.components) v = std::max(v, k.eval(t));
    return v;
}

double matrix_increment(const KernelSpec& spec, double t, double s) {
    double v = 0.0;
    for (const auto& k : spec.components) v = std::max(v, std::fabs(k.eval(t) - k.eval(s)));
    return v;
}

bool all_constant(const KernelSpec& spec) {
    return std::all_of(spec.components.begin(), spec.components.end(),
                       [](const ScalarKernel& k) { return !k.singular() && k.lambda() == 0.0; });
}

}  // namespace

SobolevSeminorm kernel_sobolev_seminorm(const KernelSpec& spec, double eta, double p, double T) {
    spec.validate();
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
    if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("p must be >= 2");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be positive");

    const double ep = eta * p;
    const bool flat = all_constant(spec);
    boost::math::quadrature::tanh_sinh<double> ts;

    auto first = [&](double t) { return std::pow(t, -ep) * std::pow(matrix_norm(spec, t), p); };
    auto second_inner = [&](double t) {
        if (flat) return 0.0;
        auto g = [&](double r) {
            if (r <= 0.0 || r >= t) return 0.0;
            const double d = matrix_increment(spec, t, t - r);
            return d == 0.0 ? 0.0 : std::pow(d, p) / std::pow(r, 1.0 + ep);
        };
        return 2.0 * ts.integrate(g, 0.0, t, 1e-10);
    };

    // Integrate decade by decade towards t = 0 and watch how fast the
    // contributions shrink; geometric decay means convergence.
    constexpr int kMaxDecades = 60;
    std::vector<double> c1, c2;
    for (int k = 0; k < kMaxDecades; ++k) {
        const double b = T * std::pow(10.0, -k);
        const double a = b / 10.0;
        c1.push_back(boost::math::quadrature::gauss_kronrod<double, 31>::integrate(first, a, b, 6, 1e-11));
        c2.push_back(flat ? 0.0
                          : boost::math::quadrature::gauss_kronrod<double, 15>::integrate(second_inner, a, b, 3, 1e-9));
    }

    SobolevSeminorm out;
    auto accumulate = [&](const std::vector<double>& c, double& total) {
        total = 0.0;
        for (double v : c) total += v;
        const double last = c.back();
        if (last == 0.0) return true;
        const double prev = c[c.size() - 2];
        const double ratio = prev > 0.0 ? last / prev : std::numeric_limits<double>::infinity();
        if (!(ratio < 0.9)) return false;
        total += last * ratio / (1.0 - ratio);
        return true;
    };
    const bool ok1 = accumulate(c1, out.first_term);
    const bool ok2 = accumulate(c2, out.second_term);
    if (!ok1 || !ok2) {
        out.divergent = true;
        out.value = std::numeric_limits<double>::infinity();
        if (!ok1) out.first_term = out.value;
        if (!ok2) out.second_term = out.value;
        return out;
    }
    out.value = std::pow(out.first_term + out.second_term, 1.0 / p);
    return out;
}

}  // namespace vsq
