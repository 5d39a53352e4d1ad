#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "sls/lti.hpp"

// Deterministic random sources. The uniform mapping is fixed by hand (top 53 bits of a
// mersenne-twister draw) so that streams are bit-identical across platforms and standard
// library versions; distributions from <random> are implementation-defined and avoided.

namespace sls {

class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    [[nodiscard]] double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    [[nodiscard]] std::uint64_t integer(std::uint64_t bound) {
        // Rejection-free modulo is fine here: bound is tiny relative to 2^64, and the
        // resulting bias (< bound / 2^64) is irrelevant for test-case generation.
        return engine_() % bound;
    }

    [[nodiscard]] Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                                         double hi = 1.0) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
        return m;
    }

    [[nodiscard]] Eigen::VectorXd vector(Eigen::Index n, double lo = -1.0, double hi = 1.0) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
        return v;
    }

    // Random system with spectral radius rescaled to `rho` (when the raw draw is not
    // nilpotent-degenerate), guaranteeing Schur stability for rho < 1.
    [[nodiscard]] LtiSystem schur_system(Eigen::Index nx, Eigen::Index nu, double rho) {
        Eigen::MatrixXd a = matrix(nx, nx);
        const double r = spectral_radius(a);
        if (r > 1e-12) a *= rho / r;
        Eigen::MatrixXd b = matrix(nx, nu);
        return LtiSystem(a, b);
    }

   private:
    std::mt19937_64 engine_;
};

}  // namespace sls
