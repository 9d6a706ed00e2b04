#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace vsq {

enum class KernelKind { Fractional, Gamma, Constant };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

// K(t) = t^{H-1/2} e^{-λt} / Γ(H+1/2). Fractional is λ = 0, Constant is H = 1/2, λ = 0.
class ScalarKernel {
public:
    static ScalarKernel fractional(double H);
    static ScalarKernel gamma(double H, double lambda);
    static ScalarKernel constant();

    KernelKind kind() const { return kind_; }
    double H() const { return H_; }
    double lambda() const { return lambda_; }
    double alpha() const { return H_ + 0.5; }
    bool singular() const { return H_ < 0.5; }

    double eval(double t) const;

    // ∫_a^b K(r) dr; b may be +infinity.
    double cell_integral(double a, double b) const;

    // ∫_0^∞ K, +infinity when λ = 0.
    double total_integral() const;

    // ∫_0^h K(r)^2 dr in closed form.
    double integral_squared(double h) const;

private:
    ScalarKernel(KernelKind kind, double H, double lambda);

    KernelKind kind_;
    double H_;
    double lambda_;
    double inv_gamma_alpha_;
};

struct KernelSpec {
    std::vector<ScalarKernel> components;

    std::size_t m() const { return components.size(); }
    const ScalarKernel& operator[](std::size_t i) const { return components[i]; }

    static KernelSpec uniform(std::size_t m, const ScalarKernel& k);
    void validate() const;
};

struct GridSpec {
    double step = 0.0;
    std::size_t n_steps = 0;

    double horizon() const { return step * static_cast<double>(n_steps); }
    double node(std::size_t k) const { return step * static_cast<double>(k); }
    void validate() const;

    // Smallest grid with the given step whose horizon reaches T (up to rounding).
    static GridSpec covering(double step, double T);
};

// Cell-averaged product-integration weights k_i[d] = (1/h) ∫_{dh}^{(d+1)h} K_i.
class CellWeights {
public:
    CellWeights(const KernelSpec& spec, double h, std::size_t n_cells);

    std::size_t m() const { return avg_.size(); }
    std::size_t size() const { return n_; }
    double step() const { return h_; }
    const std::vector<double>& component(std::size_t i) const { return avg_[i]; }
    double operator()(std::size_t i, std::size_t d) const { return avg_[i][d]; }

private:
    double h_;
    std::size_t n_;
    std::vector<std::vector<double>> avg_;
};

struct AdmissibilityComponent {
    double gamma_estimate = 0.0;
    double alpha_estimate = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double C_star = 0.0;
    double small_ball_slope = 0.0;  // slope of log ∫_0^h K^2
    double shift_slope = 0.0;       // slope of log ∫_0^T |K(r+h)-K(r)|^2, 0 if identically zero
    bool monotone_ok = true;
    bool nonneg_ok = true;
};

struct AdmissibilityReport {
    double gamma_estimate = 0.0;
    double alpha_estimate = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double C_star = 0.0;
    bool monotone_ok = true;
    bool nonneg_ok = true;
    bool condition_v_ok = true;
    bool condition_K_ok = true;
    bool condition_R_ok = true;
    std::vector<double> ladder;  // the dyadic h values used
    std::vector<AdmissibilityComponent> components;
};

AdmissibilityReport check_admissibility(const KernelSpec& spec, const GridSpec& probe);

// M_α(z) = Σ z^n / Γ(αn+α), the two-parameter function E_{α,α}(z).
double mittag_leffler(double alpha, double z);

// e_α(t) = t^{α-1} M_α(-t^α) for t > 0.
double e_alpha(double alpha, double t);

struct SobolevSeminorm {
    double value = 0.0;          // [K]_{η,p,T}, +infinity when divergent
    double first_term = 0.0;     // ∫_0^T t^{-ηp} ‖K(t)‖^p dt
    double second_term = 0.0;    // ∫∫ ‖K(t)-K(s)‖^p / |t-s|^{1+ηp} ds dt
    bool divergent = false;
};

SobolevSeminorm kernel_sobolev_seminorm(const KernelSpec& spec, double eta, double p, double T);

}  // namespace vsq
