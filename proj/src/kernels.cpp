#include "vsq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vsq/fit.hpp"

namespace vsq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Fractional: return "fractional";
        case KernelKind::Gamma: return "gamma";
        case KernelKind::Constant: return "constant";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "fractional") return KernelKind::Fractional;
    if (name == "gamma") return KernelKind::Gamma;
    if (name == "constant") return KernelKind::Constant;
    throw std::invalid_argument("unknown kernel kind '" + name + "'");
}

ScalarKernel::ScalarKernel(KernelKind kind, double H, double lambda)
    : kind_(kind), H_(H), lambda_(lambda) {
    if (!(H > 0.0 && H <= 0.5)) throw std::invalid_argument("kernel: H must lie in (0, 1/2]");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("kernel: lambda must be finite and >= 0");
    inv_gamma_alpha_ = 1.0 / boost::math::tgamma(H + 0.5);
}

ScalarKernel ScalarKernel::fractional(double H) { return {KernelKind::Fractional, H, 0.0}; }
ScalarKernel ScalarKernel::gamma(double H, double lambda) { return {KernelKind::Gamma, H, lambda}; }
ScalarKernel ScalarKernel::constant() { return {KernelKind::Constant, 0.5, 0.0}; }

double ScalarKernel::eval(double t) const {
    if (std::isnan(t) || t < 0.0) throw std::domain_error("kernel evaluated at negative time");
    if (t == 0.0) {
        if (singular()) throw std::domain_error("singular kernel evaluated at t = 0");
        return inv_gamma_alpha_;
    }
    const double a = alpha();
    double v = (a == 1.0) ? 1.0 : std::pow(t, a - 1.0);
    if (lambda_ > 0.0) v *= std::exp(-lambda_ * t);
    return v * inv_gamma_alpha_;
}

double ScalarKernel::cell_integral(double a, double b) const {
    if (!(a >= 0.0) || std::isnan(b) || b < a)
        throw std::invalid_argument("cell_integral requires 0 <= a <= b");
    if (a == b) return 0.0;
    const double al = alpha();
    if (lambda_ == 0.0) {
        if (std::isinf(b)) return kInf;
        if (al == 1.0) return b - a;
        const double g = inv_gamma_alpha_ / al;  // 1/Γ(α+1)
        if (a == 0.0) return std::pow(b, al) * g;
        return std::pow(a, al) * std::expm1(al * std::log1p((b - a) / a)) * g;
    }
    const double lam = lambda_;
    if (al == 1.0) {
        if (std::isinf(b)) return std::exp(-lam * a) / lam;
        return std::exp(-lam * a) * (-std::expm1(-lam * (b - a))) / lam;
    }
    const double scale = std::pow(lam, -al);
    const double xa = lam * a;
    if (std::isinf(b)) return scale * boost::math::gamma_q(al, xa);
    const double xb = lam * b;
    // Past the mode the upper tail is small and differences of Q keep their
    // relative accuracy; before it differences of P do.
    if (xa > al + 1.0) return scale * (boost::math::gamma_q(al, xa) - boost::math::gamma_q(al, xb));
    return scale * (boost::math::gamma_p(al, xb) - boost::math::gamma_p(al, xa));
}

double ScalarKernel::total_integral() const {
    if (lambda_ == 0.0) return kInf;
    return std::pow(lambda_, -alpha());
}

double ScalarKernel::integral_squared(double h) const {
    if (!(h >= 0.0)) throw std::invalid_argument("integral_squared requires h >= 0");
    if (h == 0.0) return 0.0;
    const double g2 = inv_gamma_alpha_ * inv_gamma_alpha_;
    const double e = 2.0 * H_;  // exponent of t in the antiderivative
    if (lambda_ == 0.0) {
        if (std::isinf(h)) return kInf;
        return std::pow(h, e) / e * g2;
    }
    const double two_lam = 2.0 * lambda_;
    if (std::isinf(h)) return boost::math::tgamma(e) * std::pow(two_lam, -e) * g2;
    return boost::math::tgamma(e) * std::pow(two_lam, -e) * boost::math::gamma_p(e, two_lam * h) * g2;
}

KernelSpec KernelSpec::uniform(std::size_t m, const ScalarKernel& k) {
    KernelSpec s;
    s.components.assign(m, k);
    return s;
}

void KernelSpec::validate() const {
    if (components.empty()) throw std::invalid_argument("kernel spec needs at least one component");
}

void GridSpec::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("grid step must be positive");
    if (n_steps < 1) throw std::invalid_argument("grid needs at least one step");
}

GridSpec GridSpec::covering(double step, double T) {
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("grid step must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("grid horizon must be positive");
    const double n = std::ceil(T / step - 1e-9);
    return {step, static_cast<std::size_t>(std::max(1.0, n))};
}

CellWeights::CellWeights(const KernelSpec& spec, double h, std::size_t n_cells) : h_(h), n_(n_cells) {
    if (!(h > 0.0)) throw std::invalid_argument("cell weights need h > 0");
    avg_.resize(spec.m());
    for (std::size_t i = 0; i < spec.m(); ++i) {
        const ScalarKernel& k = spec[i];
        auto& w = avg_[i];
        w.resize(n_cells);
        for (std::size_t d = 0; d < n_cells; ++d)
            w[d] = k.cell_integral(h * static_cast<double>(d), h * static_cast<double>(d + 1)) / h;
    }
}

namespace {

// ∫_0^T |K(r+h) - K(r)|^2 dr, T may be infinite.
double shift_energy(const ScalarKernel& k, double h, double T) {
    if (!k.singular() && k.lambda() == 0.0) return 0.0;
    auto f = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double d = k.eval(r + h) - k.eval(r);
        return d * d;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    double total = ts.integrate(f, 0.0, std::min(h, T));
    double a = h;
    while (a < T) {
        const double b = std::min(2.0 * a, T);
        const double piece = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-13);
        total += piece;
        a = b;
        if (std::isinf(T) && (piece < 1e-15 * total || a > 1e14)) break;
    }
    return total;
}

bool sampled_monotone_nonneg(const ScalarKernel& k, double T, bool& nonneg) {
    bool monotone = true;
    nonneg = true;
    double prev = k.eval(1e-6);
    const int n = 400;
    for (int i = 1; i <= n; ++i) {
        const double t = 1e-6 * std::pow(T / 1e-6, static_cast<double>(i) / n);
        const double v = k.eval(t);
        if (!(v >= 0.0)) nonneg = false;
        if (v > prev * (1.0 + 1e-13)) monotone = false;
        prev = v;
    }
    return monotone;
}

}  // namespace

AdmissibilityReport check_admissibility(const KernelSpec& spec, const GridSpec& probe) {
    spec.validate();
    probe.validate();
    const double T = probe.horizon();
    if (T < 1.0) throw std::invalid_argument("admissibility probe horizon must be >= 1");

    AdmissibilityReport rep;
    constexpr int kLadder = 12;
    constexpr int kFitFrom = 4;  // fit on the finest 8 rungs
    for (int j = 0; j < kLadder; ++j) rep.ladder.push_back(std::ldexp(1.0, -j));

    const std::size_t m = spec.m();
    std::vector<double> S(kLadder, 0.0), Sh(kLadder, 0.0), Sinf(kLadder, 0.0);

    auto exponent_fit = [&](const std::vector<double>& v) {
        std::vector<double> x, y;
        for (int j = kFitFrom; j < kLadder; ++j) {
            if (v[j] > 0.0) {
                x.push_back(rep.ladder[j]);
                y.push_back(v[j]);
            }
        }
        return x.size() >= 2 ? fit_loglog(x, y).slope : 0.0;
    };
    auto sup_ratio = [&](const std::vector<double>& v, double e) {
        double c = 0.0;
        for (int j = 0; j < kLadder; ++j) c = std::max(c, v[j] / std::pow(rep.ladder[j], e));
        return c;
    };
    auto inf_ratio = [&](const std::vector<double>& v, double e) {
        double c = kInf;
        for (int j = 0; j < kLadder; ++j) c = std::min(c, v[j] / std::pow(rep.ladder[j], e));
        return c;
    };
    auto gamma_from = [](double small_ball, double shift) {
        double g = small_ball;
        if (shift > 0.0) g = std::min(g, shift);
        return std::clamp(g, 1e-12, 2.0);
    };

    for (std::size_t i = 0; i < m; ++i) {
        const ScalarKernel& k = spec[i];
        AdmissibilityComponent c;
        std::vector<double> s(kLadder), sh(kLadder), sinf(kLadder);
        for (int j = 0; j < kLadder; ++j) {
            const double h = rep.ladder[j];
            s[j] = k.integral_squared(h);
            sh[j] = shift_energy(k, h, T);
            sinf[j] = shift_energy(k, h, kInf);
            S[j] += s[j];
            Sh[j] += sh[j];
            Sinf[j] += sinf[j];
        }
        c.small_ball_slope = exponent_fit(s);
        c.shift_slope = exponent_fit(sh);
        c.gamma_estimate = gamma_from(c.small_ball_slope, c.shift_slope);
        c.alpha_estimate = std::clamp(std::max(c.small_ball_slope, c.gamma_estimate), c.gamma_estimate, 2.0);
        c.C1 = sup_ratio(s, c.gamma_estimate);
        c.C2 = sup_ratio(sh, c.gamma_estimate);
        c.C3 = sup_ratio(sinf, c.gamma_estimate);
        c.C_star = inf_ratio(s, c.alpha_estimate);
        c.monotone_ok = sampled_monotone_nonneg(k, T, c.nonneg_ok);
        rep.components.push_back(c);
    }

    const double small_ball = exponent_fit(S);
    const double shift = exponent_fit(Sh);
    rep.gamma_estimate = gamma_from(small_ball, shift);
    for (const auto& c : rep.components) rep.gamma_estimate = std::min(rep.gamma_estimate, c.gamma_estimate);
    rep.alpha_estimate = std::clamp(std::max(small_ball, rep.gamma_estimate), rep.gamma_estimate, 2.0);
    rep.C1 = sup_ratio(S, rep.gamma_estimate);
    rep.C2 = sup_ratio(Sh, rep.gamma_estimate);
    rep.C3 = sup_ratio(Sinf, rep.gamma_estimate);
    rep.C_star = inf_ratio(S, rep.alpha_estimate);
    for (const auto& c : rep.components) {
        rep.monotone_ok = rep.monotone_ok && c.monotone_ok;
        rep.nonneg_ok = rep.nonneg_ok && c.nonneg_ok;
    }
    rep.condition_v_ok = rep.gamma_estimate > 0.0 && std::isfinite(rep.C1) && std::isfinite(rep.C2);
    rep.condition_K_ok = std::isfinite(rep.C3);
    rep.condition_R_ok = rep.C_star > 0.0 && rep.alpha_estimate >= rep.gamma_estimate && rep.alpha_estimate <= 2.0;
    return rep;
}

}  // namespace vsq
