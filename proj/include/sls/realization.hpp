#pragma once

#include <concepts>
#include <deque>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sls/errors.hpp"
#include "sls/lti.hpp"
#include "sls/synthesis.hpp"
#include "sls/trace.hpp"

// Controller implementations of a synthesized response. Both keep a ring of the last T
// disturbance estimates delta and form u[t] = sum_{tau=1..T} Phi_u[tau] delta[t+1-tau],
// accumulated in ascending tau (newest estimate first) so traces are reproducible
// bit-for-bit across implementations.

namespace sls {

namespace detail {

inline void check_phi_u(const LtiSystem& sys, const std::vector<Eigen::MatrixXd>& phi_u) {
    if (phi_u.empty()) throw DimensionError("realization: Phi_u must have at least one block");
    for (const auto& m : phi_u)
        if (m.rows() != sys.nu() || m.cols() != sys.nx())
            throw DimensionError("realization: Phi_u block has wrong shape");
}

// Newest-first history of the last T delta vectors, zero-initialized (rest state).
class DeltaRing {
public:
    DeltaRing(int T, Eigen::Index nx) : hist_(T, Eigen::VectorXd::Zero(nx)) {}

    void push(Eigen::VectorXd v) {
        hist_.pop_back();
        hist_.push_front(std::move(v));
    }

    // delta[t + 1 - tau] for tau = 1..T once delta[t] has been pushed.
    [[nodiscard]] const Eigen::VectorXd& at_tau(int tau) const { return hist_[tau - 1]; }

    [[nodiscard]] const Eigen::VectorXd& newest() const { return hist_.front(); }

private:
    std::deque<Eigen::VectorXd> hist_;
};

}  // namespace detail

// Disturbance-feedback form that only needs Phi_u and the plant matrices:
//   delta[t] = x[t] - A x[t-1] - B u[t-1]
//   u[t]     = sum_tau Phi_u[tau] delta[t+1-tau]
// Requires a Schur-stable A for its closed-loop guarantees; the recursion itself runs for
// any plant. Starts at rest (all internal state zero).
class SimplifiedRealization {
public:
    SimplifiedRealization(LtiSystem sys, std::vector<Eigen::MatrixXd> phi_u)
        : sys_(std::move(sys)),
          phi_u_(std::move(phi_u)),
          ring_(static_cast<int>(phi_u_.size()), sys_.nx()),
          x_prev_(Eigen::VectorXd::Zero(sys_.nx())),
          u_prev_(Eigen::VectorXd::Zero(sys_.nu())) {
        detail::check_phi_u(sys_, phi_u_);
    }

    [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& x_t) {
        if (x_t.size() != sys_.nx()) throw DimensionError("step: x has wrong size");
        // The parenthesization mirrors the plant update (A x + B u) + d coefficient
        // for coefficient, so with a zero disturbance the subtraction cancels exactly
        // and the recovered delta is bit-for-bit zero, not merely small.
        ring_.push(x_t - (sys_.A * x_prev_ + sys_.B * u_prev_));
        Eigen::VectorXd u = Eigen::VectorXd::Zero(sys_.nu());
        for (int tau = 1; tau <= static_cast<int>(phi_u_.size()); ++tau)
            u.noalias() += phi_u_[tau - 1] * ring_.at_tau(tau);
        x_prev_ = x_t;
        u_prev_ = u;
        return u;
    }

    [[nodiscard]] const Eigen::VectorXd& last_delta() const { return ring_.newest(); }
    [[nodiscard]] const LtiSystem& system() const { return sys_; }

private:
    LtiSystem sys_;
    std::vector<Eigen::MatrixXd> phi_u_;
    detail::DeltaRing ring_;
    Eigen::VectorXd x_prev_;
    Eigen::VectorXd u_prev_;
};

// Reference-model form that also stores Phi_x:
//   delta[t]  = x[t] - xhat[t]
//   u[t]      = sum_{tau=1..T} Phi_u[tau] delta[t+1-tau]
//   xhat[t+1] = sum_{tau=2..T} Phi_x[tau] delta[t+2-tau]
class StandardRealization {
public:
    StandardRealization(LtiSystem sys, SystemResponse resp)
        : sys_(std::move(sys)),
          resp_(std::move(resp)),
          ring_(resp_.T, sys_.nx()),
          xhat_(Eigen::VectorXd::Zero(sys_.nx())) {
        resp_.validate(sys_.nx(), sys_.nu());
    }

    [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& x_t) {
        if (x_t.size() != sys_.nx()) throw DimensionError("step: x has wrong size");
        ring_.push(x_t - xhat_);
        Eigen::VectorXd u = Eigen::VectorXd::Zero(sys_.nu());
        for (int tau = 1; tau <= resp_.T; ++tau)
            u.noalias() += resp_.phi_u[tau - 1] * ring_.at_tau(tau);
        xhat_.setZero();
        for (int tau = 2; tau <= resp_.T; ++tau)
            xhat_.noalias() += resp_.phi_x[tau - 1] * ring_.at_tau(tau - 1);
        return u;
    }

    [[nodiscard]] const Eigen::VectorXd& last_delta() const { return ring_.newest(); }

private:
    LtiSystem sys_;
    SystemResponse resp_;
    detail::DeltaRing ring_;
    Eigen::VectorXd xhat_;
};

template <typename C>
concept Controller = requires(C c, const Eigen::VectorXd& x) {
    { c.step(x) } -> std::convertible_to<Eigen::VectorXd>;
    { c.last_delta() } -> std::convertible_to<const Eigen::VectorXd&>;
};

// Close the loop of `ctrl` around `sys` for H steps under the disturbance sequence d_x
// (zero-padded past its end). Convention: x[0] = d_x[0], then
// x[t+1] = A x[t] + B u[t] + d_x[t+1], so an impulse at t = 0 makes x[t] trace the
// Phi_x[t+1] column. Controller and plant may be built from different system matrices
// (model mismatch is allowed; stability guarantees then rest on the robustness margin).
template <Controller C>
[[nodiscard]] SimTrace run_closed_loop(const LtiSystem& sys, C& ctrl,
                                       const std::vector<Eigen::VectorXd>& d_x, int H) {
    if (H < 1) throw DimensionError("run_closed_loop: H must be >= 1");
    for (const auto& d : d_x)
        if (d.size() != sys.nx()) throw DimensionError("run_closed_loop: d_x entry wrong size");
    auto dist = [&](int t) -> Eigen::VectorXd {
        if (t < static_cast<int>(d_x.size())) return d_x[t];
        return Eigen::VectorXd::Zero(sys.nx());
    };

    SimTrace tr;
    if (!is_schur_stable(sys.A))
        tr.notes.push_back("plant A is not Schur-stable; closed-loop guarantees void");
    Eigen::VectorXd x = dist(0);
    for (int t = 0; t < H; ++t) {
        Eigen::VectorXd u = ctrl.step(x);
        tr.x.push_back(x);
        tr.u.push_back(u);
        tr.delta.push_back(ctrl.last_delta());
        x = step_plant(sys, x, u, dist(t + 1));
    }
    return tr;
}

// Loop of the simplified realization with injection points exposed for stability probing:
// d_u adds to the controller output after the convolution, d_delta adds at the delta
// junction. The internal feedback u-term taps the convolution output before d_u joins.
class SimplifiedHarness {
public:
    SimplifiedHarness(LtiSystem sys, std::vector<Eigen::MatrixXd> phi_u)
        : sys_(std::move(sys)),
          phi_u_(std::move(phi_u)),
          ring_(static_cast<int>(phi_u_.size()), sys_.nx()),
          x_prev_(Eigen::VectorXd::Zero(sys_.nx())),
          conv_prev_(Eigen::VectorXd::Zero(sys_.nu())) {
        detail::check_phi_u(sys_, phi_u_);
    }

    struct Output {
        Eigen::VectorXd u;
        Eigen::VectorXd delta;
    };

    [[nodiscard]] Output step(const Eigen::VectorXd& x_t, const Eigen::VectorXd& d_u,
                              const Eigen::VectorXd& d_delta) {
        ring_.push(x_t - (sys_.A * x_prev_ + sys_.B * conv_prev_) + d_delta);
        Eigen::VectorXd conv = Eigen::VectorXd::Zero(sys_.nu());
        for (int tau = 1; tau <= static_cast<int>(phi_u_.size()); ++tau)
            conv.noalias() += phi_u_[tau - 1] * ring_.at_tau(tau);
        x_prev_ = x_t;
        conv_prev_ = conv;
        return {conv + d_u, ring_.newest()};
    }

private:
    LtiSystem sys_;
    std::vector<Eigen::MatrixXd> phi_u_;
    detail::DeltaRing ring_;
    Eigen::VectorXd x_prev_;
    Eigen::VectorXd conv_prev_;
};

}  // namespace sls
