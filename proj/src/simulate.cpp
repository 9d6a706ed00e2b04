#include "vsq/simulate.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "vsq/errors.hpp"
#include "vsq/fit.hpp"
#include "vsq/moments.hpp"
#include "vsq/resolvents.hpp"

namespace vsq {

std::string to_string(Scheme s) { return s == Scheme::Direct ? "direct" : "resolvent"; }

Scheme scheme_from_string(const std::string& name) {
    if (name == "direct") return Scheme::Direct;
    if (name == "resolvent") return Scheme::Resolvent;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected direct or resolvent)");
}

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t require_node(double t, double h, std::size_t n_max, const char* what) {
    const double pos = t / h;
    const double k = std::round(pos);
    if (!(t >= 0.0) || std::fabs(pos - k) > 1e-6 || k > static_cast<double>(n_max))
        throw std::invalid_argument(fmt::format("{}: time {} is not a recorded node", what, t));
    return static_cast<std::size_t>(k);
}

// Advances one batch of paths [first, first + P) and writes the recorded states.
class BatchSimulator {
public:
    BatchSimulator(const ModelParams& params, const GridSpec& grid, std::uint64_t seed, const SimulationOptions& opt,
                   const CellWeights* weights, const ResolventPair* pair, const Eigen::MatrixXd* mean, PathEnsemble& out)
        : p_(params), grid_(grid), seed_(seed), opt_(opt), w_(weights), pair_(pair), mean_(mean), out_(out),
          m_(params.m()), N_(grid.n_steps) {}

    std::uint64_t run(std::size_t first, std::size_t P) {
        const double h = grid_.step;
        const double sqh = std::sqrt(h);
        const std::size_t m = m_, N = N_;
        std::vector<double> Z(m * N * P, 0.0);  // Z[(i·N + j)·P + q]
        std::vector<double> X(m * P), Xn(m * P), acc(P);
        std::vector<double> S(m * P, 0.0);  // running sums for exponential components
        std::uint64_t clipped = 0;
        for (std::size_t q = 0; q < P; ++q)
            for (std::size_t i = 0; i < m; ++i) X[i * P + q] = p_.x0(static_cast<Eigen::Index>(i));
        record(first, P, 0, X);

        std::vector<bool> exponential(m, false);
        std::vector<double> decay(m, 0.0);
        if (opt_.scheme == Scheme::Direct) {
            for (std::size_t i = 0; i < m; ++i) {
                exponential[i] = p_.kernel[i].H() == 0.5;
                decay[i] = std::exp(-p_.kernel[i].lambda() * h);
            }
        }

        for (std::size_t k = 1; k <= N; ++k) {
            const std::size_t j = k - 1;
            for (std::size_t i = 0; i < m; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const double sig = p_.sigma(ii) * sqh;
                for (std::size_t q = 0; q < P; ++q) {
                    const double xi = keyed_normal(seed_, first + q, j * m + i);
                    const double noise = sig * std::sqrt(std::max(X[i * P + q], 0.0)) * xi;
                    double z = noise;
                    if (opt_.scheme == Scheme::Direct) {
                        double drift = p_.b(ii);
                        for (std::size_t c = 0; c < m; ++c) drift += p_.beta(ii, static_cast<Eigen::Index>(c)) * X[c * P + q];
                        z += drift * h;
                    }
                    Z[(i * N + j) * P + q] = z;
                }
            }
            for (std::size_t i = 0; i < m; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                if (opt_.scheme == Scheme::Direct) {
                    const double* zj = &Z[(i * N + j) * P];
                    if (exponential[i]) {
                        const double w0 = (*w_)(i, 0);
                        for (std::size_t q = 0; q < P; ++q) S[i * P + q] = decay[i] * S[i * P + q] + w0 * zj[q];
                        for (std::size_t q = 0; q < P; ++q) acc[q] = S[i * P + q];
                    } else {
                        std::fill(acc.begin(), acc.end(), 0.0);
                        const std::vector<double>& wi = w_->component(i);
                        double* __restrict a = acc.data();
                        for (std::size_t l = 0; l < k; ++l) {
                            const double w = wi[k - 1 - l];
                            const double* __restrict z = &Z[(i * N + l) * P];
                            for (std::size_t q = 0; q < P; ++q) a[q] += w * z[q];
                        }
                    }
                    const double x0 = p_.x0(ii);
                    for (std::size_t q = 0; q < P; ++q) Xn[i * P + q] = x0 + acc[q];
                } else {
                    std::fill(acc.begin(), acc.end(), 0.0);
                    for (std::size_t l = 0; l < k; ++l) {
                        const auto E = pair_->E(k - l);
                        for (std::size_t c = 0; c < m; ++c) {
                            const double w = E(ii, static_cast<Eigen::Index>(c));
                            if (w == 0.0) continue;
                            const double* z = &Z[(c * N + l) * P];
                            for (std::size_t q = 0; q < P; ++q) acc[q] += w * z[q];
                        }
                    }
                    const double mk = (*mean_)(ii, static_cast<Eigen::Index>(k));
                    for (std::size_t q = 0; q < P; ++q) Xn[i * P + q] = mk + acc[q];
                }
            }
            for (std::size_t idx = 0; idx < m * P; ++idx) {
                const double v = Xn[idx];
                if (!(std::fabs(v) <= 1e10))
                    throw NumericalError(fmt::format("simulate: explosion on path {} at t = {} (|X| = {:.3g} > 1e10)",
                                                     first + idx % P, grid_.node(k), v));
                if (v < 0.0) {
                    ++clipped;
                    Xn[idx] = 0.0;
                }
            }
            std::swap(X, Xn);
            if (k % opt_.record_stride == 0) record(first, P, k / opt_.record_stride, X);
        }
        return clipped;
    }

private:
    void record(std::size_t first, std::size_t P, std::size_t r, const std::vector<double>& X) {
        const std::size_t nr = out_.n_records();
        for (std::size_t q = 0; q < P; ++q)
            for (std::size_t i = 0; i < m_; ++i) out_.values[((first + q) * nr + r) * m_ + i] = X[i * P + q];
    }

    const ModelParams& p_;
    const GridSpec& grid_;
    std::uint64_t seed_;
    const SimulationOptions& opt_;
    const CellWeights* w_;
    const ResolventPair* pair_;
    const Eigen::MatrixXd* mean_;
    PathEnsemble& out_;
    std::size_t m_, N_;
};

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int k = 0; k < 8; ++k) b[static_cast<std::size_t>(k)] = static_cast<char>((v >> (8 * k)) & 0xff);
    os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 8);
    if (!is) throw std::runtime_error("ensemble file truncated");
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | b[static_cast<std::size_t>(k)];
    return v;
}

}  // namespace

double keyed_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t counter) {
    const std::uint64_t key = splitmix(seed ^ splitmix(path ^ 0x632be59bd9b4e019ULL));
    const std::uint64_t a = splitmix(key + (2 * counter) * kGolden);
    const std::uint64_t b = splitmix(key + (2 * counter + 1) * kGolden);
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t PathEnsemble::record_index(double t) const { return require_node(t, record_step(), n_records() - 1, "ensemble"); }

Eigen::MatrixXd PathEnsemble::marginal(double t) const {
    const std::size_t r = record_index(t);
    Eigen::MatrixXd s(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(m));
    for (std::size_t p = 0; p < n_paths; ++p)
        for (std::size_t i = 0; i < m; ++i) s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) = at(p, r, i);
    return s;
}

PathEnsemble simulate_paths(const ModelParams& params, const GridSpec& grid, std::size_t n_paths, std::uint64_t seed,
                            const SimulationOptions& options) {
    params.validate();
    grid.validate();
    if (n_paths < 1) throw std::invalid_argument("simulate: n_paths must be >= 1");
    if (options.record_stride < 1 || grid.n_steps % options.record_stride != 0)
        throw std::invalid_argument("simulate: record_stride must divide n_steps");
    if (options.batch_size < 1) throw std::invalid_argument("simulate: batch_size must be >= 1");

    PathEnsemble ens;
    ens.grid = grid;
    ens.n_paths = n_paths;
    ens.m = params.m();
    ens.stride = options.record_stride;
    ens.seed = seed;
    ens.scheme = options.scheme;
    ens.values.assign(n_paths * ens.n_records() * ens.m, 0.0);

    std::optional<CellWeights> weights;
    std::optional<ResolventPair> pair;
    Eigen::MatrixXd mean;
    if (options.scheme == Scheme::Direct) {
        weights.emplace(params.kernel, grid.step, grid.n_steps);
    } else {
        pair.emplace(resolvent_second_kind(params.kernel, params.beta, grid));
        mean = mean_curve(params, *pair);
    }

    const std::size_t B = options.batch_size;
    const std::size_t n_batches = (n_paths + B - 1) / B;
    std::vector<std::uint64_t> clipped(n_batches, 0);
    std::vector<std::exception_ptr> errors(n_batches);
    auto worker = [&](std::size_t t, std::size_t T) {
        BatchSimulator sim(params, grid, seed, options, weights ? &*weights : nullptr, pair ? &*pair : nullptr, &mean, ens);
        for (std::size_t b = t; b < n_batches; b += T) {
            try {
                const std::size_t first = b * B;
                clipped[b] = sim.run(first, std::min(B, n_paths - first));
            } catch (...) {
                errors[b] = std::current_exception();
            }
        }
    };
    const std::size_t T = std::clamp<std::size_t>(options.threads, 1, n_batches);
    if (T == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < T; ++t) pool.emplace_back(worker, t, T);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::uint64_t total = 0;
    for (auto c : clipped) total += c;
    ens.negativity_fraction = static_cast<double>(total) / (static_cast<double>(n_paths) * static_cast<double>(grid.n_steps) *
                                                           static_cast<double>(ens.m));
    return ens;
}

McEstimate mc_log_cf(const PathEnsemble& ens, const MeasureForcing& forcing, double t) {
    const double rh = ens.record_step();
    const std::size_t n = require_node(t, rh, ens.n_records() - 1, "mc_log_cf");
    const Eigen::MatrixXcd mass = forcing.node_masses(GridSpec{rh, n}, ens.m);
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j <= n; ++j)
        if (mass.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff() > 0.0) cols.push_back(j);

    McEstimate out;
    if (cols.empty()) {
        out.estimate = 0.0;
        out.degenerate = true;
        return out;
    }
    std::vector<cplx> Y(ens.n_paths);
    cplx sum = 0.0;
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        cplx e = 0.0;
        for (std::size_t j : cols)
            for (std::size_t i = 0; i < ens.m; ++i)
                e += mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * ens.at(p, n - j, i);
        Y[p] = std::exp(e);
        sum += Y[p];
    }
    const double np = static_cast<double>(ens.n_paths);
    const cplx mean = sum / np;
    double var = 0.0;
    for (const cplx& y : Y) var += std::norm(y - mean);
    out.estimate = std::log(mean);
    if (var == 0.0 || ens.n_paths < 2) {
        out.degenerate = true;
        return out;
    }
    var /= np - 1.0;
    out.standard_error = std::sqrt(var / np) / std::abs(mean);
    return out;
}

HolderCurve holder_moment_curve(const PathEnsemble& ens, double p, const std::vector<double>& lags) {
    if (!(p >= 2.0)) throw std::invalid_argument("holder_moment_curve: p must be >= 2");
    HolderCurve c;
    c.lags = lags;
    const std::size_t nr = ens.n_records();
    for (double lag : lags) {
        if (!(lag > 0.0) || lag > 1.0 + 1e-12) throw std::invalid_argument("holder_moment_curve: lags must lie in (0, 1]");
        const std::size_t d = require_node(lag, ens.record_step(), nr - 1, "holder_moment_curve");
        double acc = 0.0;
        for (std::size_t path = 0; path < ens.n_paths; ++path) {
            for (std::size_t r = 0; r + d < nr; ++r) {
                double s2 = 0.0;
                for (std::size_t i = 0; i < ens.m; ++i) {
                    const double dv = ens.at(path, r + d, i) - ens.at(path, r, i);
                    s2 += dv * dv;
                }
                acc += std::pow(s2, 0.5 * p);
            }
        }
        c.moments.push_back(acc / (static_cast<double>(ens.n_paths) * static_cast<double>(nr - d)));
    }
    bool positive = lags.size() >= 2;
    for (double v : c.moments) positive = positive && v > 0.0;
    if (positive) {
        const LinearFit f = fit_loglog(c.lags, c.moments);
        c.slope = f.slope;
        c.slope_stderr = f.slope_stderr;
    }
    return c;
}

std::vector<Eigen::MatrixXd> shifted_marginals(const PathEnsemble& ens, double burn_in, const std::vector<double>& times) {
    std::vector<Eigen::MatrixXd> out;
    for (double t : times) out.push_back(ens.marginal(burn_in + t));
    return out;
}

SampleMean sample_mean(const Eigen::MatrixXd& samples) {
    SampleMean s;
    const double n = static_cast<double>(samples.rows());
    s.mean = samples.colwise().mean().transpose();
    s.standard_error.resize(samples.cols());
    for (Eigen::Index i = 0; i < samples.cols(); ++i) {
        const double var = n > 1.0 ? (samples.col(i).array() - s.mean(i)).square().sum() / (n - 1.0) : 0.0;
        s.standard_error(i) = std::sqrt(var / n);
    }
    return s;
}

std::vector<double> moment_curve(const PathEnsemble& ens, double p) {
    std::vector<double> out(ens.n_records(), 0.0);
    for (std::size_t r = 0; r < ens.n_records(); ++r) {
        double acc = 0.0;
        for (std::size_t path = 0; path < ens.n_paths; ++path) {
            double s2 = 0.0;
            for (std::size_t i = 0; i < ens.m; ++i) s2 += ens.at(path, r, i) * ens.at(path, r, i);
            acc += std::pow(s2, 0.5 * p);
        }
        out[r] = acc / static_cast<double>(ens.n_paths);
    }
    return out;
}

void write_ensemble(const std::string& path, const PathEnsemble& ens) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write("VSQR1", 5);
    put_u64(os, ens.m);
    put_u64(os, ens.n_records() - 1);
    put_u64(os, ens.n_paths);
    put_u64(os, std::bit_cast<std::uint64_t>(ens.record_step()));
    put_u64(os, ens.seed);
    for (double v : ens.values) put_u64(os, std::bit_cast<std::uint64_t>(v));
    if (!os) throw std::runtime_error("write failed for " + path);
}

PathEnsemble read_ensemble(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::array<char, 5> magic{};
    is.read(magic.data(), 5);
    if (!is || std::string(magic.data(), 5) != "VSQR1") throw std::runtime_error(path + " is not a VSQR1 ensemble");
    PathEnsemble e;
    e.m = get_u64(is);
    const std::uint64_t n_steps = get_u64(is);
    e.n_paths = get_u64(is);
    const double h = std::bit_cast<double>(get_u64(is));
    e.seed = get_u64(is);
    e.grid = GridSpec{h, n_steps};
    e.stride = 1;
    const std::size_t count = e.n_paths * (n_steps + 1) * e.m;
    e.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) e.values[k] = std::bit_cast<double>(get_u64(is));
    return e;
}

}  // namespace vsq
