#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vsq/kernels.hpp"

namespace vsq::detail {

// Cell-average weights stored back to front so that Σ_{i<n} k[n-i]·g[i] is a contiguous dot
// product: rev[N-n+i] = k[n-i].
struct ReversedWeights {
    std::size_t N = 0;
    std::vector<std::vector<double>> rev;  // per component, length N+1

    ReversedWeights(const CellWeights& w) : N(w.size() - 1), rev(w.m()) {
        for (std::size_t a = 0; a < w.m(); ++a) {
            const auto& k = w.component(a);
            rev[a].resize(N + 1);
            for (std::size_t j = 0; j <= N; ++j) rev[a][j] = k[N - j];
        }
    }

    // Σ_{i<n} k_a[n-i]·g[i]
    double lagged_dot(std::size_t a, std::size_t n, const double* g) const {
        if (n == 0) return 0.0;
        Eigen::Map<const Eigen::VectorXd> kv(rev[a].data() + (N - n), static_cast<Eigen::Index>(n));
        Eigen::Map<const Eigen::VectorXd> gv(g, static_cast<Eigen::Index>(n));
        return kv.dot(gv);
    }
};

}  // namespace vsq::detail
