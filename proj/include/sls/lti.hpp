#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "sls/detail/json.hpp"
#include "sls/errors.hpp"

// Discrete-time LTI plant x[t+1] = A x[t] + B u[t] + d_x[t] with one sensor per state
// entry and one actuator per input entry.

namespace sls {

// Schur stability margin: rho(A) must fall below 1 by at least this much.
inline constexpr double kSchurEps = 1e-9;

struct LtiSystem {
    Eigen::MatrixXd A;  // Nx x Nx
    Eigen::MatrixXd B;  // Nx x Nu

    LtiSystem(Eigen::MatrixXd A_, Eigen::MatrixXd B_) : A(std::move(A_)), B(std::move(B_)) {
        if (A.rows() != A.cols()) throw DimensionError("LtiSystem: A must be square");
        if (A.rows() == 0) throw DimensionError("LtiSystem: A must be non-empty");
        if (B.rows() != A.rows()) throw DimensionError("LtiSystem: B must have A's row count");
        if (B.cols() == 0) throw DimensionError("LtiSystem: B must have at least one column");
    }

    [[nodiscard]] Eigen::Index nx() const { return A.rows(); }
    [[nodiscard]] Eigen::Index nu() const { return B.cols(); }
};

[[nodiscard]] inline double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DimensionError("spectral_radius: matrix must be square");
    if (m.rows() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericError("spectral_radius: eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

[[nodiscard]] inline bool is_schur_stable(const Eigen::MatrixXd& m) {
    return spectral_radius(m) < 1.0 - kSchurEps;
}

// One plant step. d is the state disturbance entering this transition.
[[nodiscard]] inline Eigen::VectorXd step_plant(const LtiSystem& sys, const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& u,
                                                const Eigen::VectorXd& d) {
    if (x.size() != sys.nx()) throw DimensionError("step_plant: x has wrong size");
    if (u.size() != sys.nu()) throw DimensionError("step_plant: u has wrong size");
    if (d.size() != sys.nx()) throw DimensionError("step_plant: d has wrong size");
    return sys.A * x + sys.B * u + d;
}

inline void to_json(nlohmann::json& j, const LtiSystem& sys) {
    j = nlohmann::json{{"A", detail::matrix_to_json(sys.A)}, {"B", detail::matrix_to_json(sys.B)}};
}

inline LtiSystem lti_from_json(const nlohmann::json& j) {
    if (!j.contains("A") || !j.contains("B"))
        throw SpecError("LtiSystem: JSON needs \"A\" and \"B\"");
    return LtiSystem(detail::matrix_from_json(j.at("A"), "A"),
                     detail::matrix_from_json(j.at("B"), "B"));
}

}  // namespace sls
