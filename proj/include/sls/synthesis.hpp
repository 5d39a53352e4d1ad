#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sls/detail/json.hpp"
#include "sls/errors.hpp"
#include "sls/lti.hpp"

// Finite-horizon closed-loop response design. The design variables are the maps
// {Phi_x[tau], Phi_u[tau]}, tau = 1..T, taking past disturbances to state and input:
//
//   x[t] = sum_tau Phi_x[tau] d[t - tau],   u[t] = sum_tau Phi_u[tau] d[t - tau].
//
// A pair is achievable as a closed loop for (A, B) iff
//   (i)   Phi_x[1] = I
//   (ii)  Phi_x[tau+1] = A Phi_x[tau] + B Phi_u[tau],  tau = 1..T-1
//   (iii) A Phi_x[T] + B Phi_u[T] = 0                  (finite-response closure)

namespace sls {

// Constraint satisfaction threshold for synthesis feasibility checks.
inline constexpr double kFeasEps = 1e-8;

using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct SystemResponse {
    int T = 0;
    std::vector<Eigen::MatrixXd> phi_x;  // T blocks, each Nx x Nx
    std::vector<Eigen::MatrixXd> phi_u;  // T blocks, each Nu x Nx

    void validate(Eigen::Index nx, Eigen::Index nu) const {
        if (T < 1) throw DimensionError("SystemResponse: T must be >= 1");
        if (static_cast<int>(phi_x.size()) != T || static_cast<int>(phi_u.size()) != T)
            throw DimensionError("SystemResponse: block count must equal T");
        for (const auto& m : phi_x)
            if (m.rows() != nx || m.cols() != nx)
                throw DimensionError("SystemResponse: Phi_x block has wrong shape");
        for (const auto& m : phi_u)
            if (m.rows() != nu || m.cols() != nx)
                throw DimensionError("SystemResponse: Phi_u block has wrong shape");
    }
};

inline void to_json(nlohmann::json& j, const SystemResponse& r) {
    nlohmann::json px = nlohmann::json::array();
    nlohmann::json pu = nlohmann::json::array();
    for (const auto& m : r.phi_x) px.push_back(detail::matrix_to_json(m));
    for (const auto& m : r.phi_u) pu.push_back(detail::matrix_to_json(m));
    j = nlohmann::json{{"T", r.T}, {"phi_x", std::move(px)}, {"phi_u", std::move(pu)}};
}

inline SystemResponse response_from_json(const nlohmann::json& j) {
    SystemResponse r;
    if (!j.contains("T") || !j.contains("phi_x") || !j.contains("phi_u"))
        throw SpecError("SystemResponse: JSON needs \"T\", \"phi_x\", \"phi_u\"");
    r.T = j.at("T").get<int>();
    for (const auto& m : j.at("phi_x")) r.phi_x.push_back(detail::matrix_from_json(m, "phi_x"));
    for (const auto& m : j.at("phi_u")) r.phi_u.push_back(detail::matrix_from_json(m, "phi_u"));
    if (static_cast<int>(r.phi_x.size()) != r.T || static_cast<int>(r.phi_u.size()) != r.T)
        throw SpecError("SystemResponse: block count does not match T");
    return r;
}

// ============================================================================
// Achievability
// ============================================================================

struct AchievabilityReport {
    double initial = 0.0;                // max-abs of Phi_x[1] - I
    std::vector<double> recursion;       // per tau = 1..T-1, max-abs of (ii) residual
    double closure = 0.0;                // max-abs of (iii)

    [[nodiscard]] double residual() const {
        double r = std::max(initial, closure);
        for (double v : recursion) r = std::max(r, v);
        return r;
    }
};

inline void to_json(nlohmann::json& j, const AchievabilityReport& rep) {
    j = nlohmann::json{{"residual", rep.residual()},
                       {"initial", rep.initial},
                       {"recursion", rep.recursion},
                       {"closure", rep.closure}};
}

[[nodiscard]] inline AchievabilityReport achievability_residual(const LtiSystem& sys,
                                                                const SystemResponse& resp) {
    resp.validate(sys.nx(), sys.nu());
    AchievabilityReport rep;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(sys.nx(), sys.nx());
    rep.initial = (resp.phi_x[0] - eye).cwiseAbs().maxCoeff();
    rep.recursion.reserve(resp.T - 1);
    for (int tau = 1; tau < resp.T; ++tau) {
        const Eigen::MatrixXd res =
            resp.phi_x[tau] - sys.A * resp.phi_x[tau - 1] - sys.B * resp.phi_u[tau - 1];
        rep.recursion.push_back(res.cwiseAbs().maxCoeff());
    }
    rep.closure =
        (sys.A * resp.phi_x[resp.T - 1] + sys.B * resp.phi_u[resp.T - 1]).cwiseAbs().maxCoeff();
    return rep;
}

// ============================================================================
// H2 synthesis
// ============================================================================

struct SynthesisProblem {
    LtiSystem sys;
    int T = 1;
    Eigen::MatrixXd Q;  // Nx x Nx, symmetric PSD state weight
    Eigen::MatrixXd R;  // Nu x Nu, symmetric PD input weight
    // Optional time-invariant support masks; false entries are pinned to exactly zero.
    std::optional<MaskMatrix> mask_x;  // Nx x Nx, diagonal must be true
    std::optional<MaskMatrix> mask_u;  // Nu x Nx

    void validate() const {
        if (T < 1) throw DimensionError("SynthesisProblem: T must be >= 1");
        if (Q.rows() != sys.nx() || Q.cols() != sys.nx())
            throw DimensionError("SynthesisProblem: Q must be Nx x Nx");
        if (R.rows() != sys.nu() || R.cols() != sys.nu())
            throw DimensionError("SynthesisProblem: R must be Nu x Nu");
        const double q_scale = 1.0 + Q.cwiseAbs().maxCoeff();
        const double r_scale = 1.0 + R.cwiseAbs().maxCoeff();
        if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-9 * q_scale)
            throw NumericError("SynthesisProblem: Q must be symmetric");
        if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-9 * r_scale)
            throw NumericError("SynthesisProblem: R must be symmetric");
        if (mask_x) {
            if (mask_x->rows() != sys.nx() || mask_x->cols() != sys.nx())
                throw DimensionError("SynthesisProblem: mask_x must be Nx x Nx");
            for (Eigen::Index i = 0; i < sys.nx(); ++i)
                if (!(*mask_x)(i, i))
                    throw SpecError("SynthesisProblem: mask_x diagonal must be true");
        }
        if (mask_u && (mask_u->rows() != sys.nu() || mask_u->cols() != sys.nx()))
            throw DimensionError("SynthesisProblem: mask_u must be Nu x Nx");
    }
};

struct SynthesisResult {
    SystemResponse response;
    AchievabilityReport achievability;
    double objective = 0.0;        // H2 cost of the returned response
    bool ill_conditioned = false;  // some column KKT system was near-singular or rank-deficient
    double min_rcond = 1.0;        // worst reciprocal condition estimate across columns
};

// Sum over tau of trace(Phi_x' Q Phi_x) + trace(Phi_u' R Phi_u).
[[nodiscard]] inline double h2_cost(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                    const SystemResponse& resp) {
    double c = 0.0;
    for (const auto& m : resp.phi_x) c += (m.transpose() * Q * m).trace();
    for (const auto& m : resp.phi_u) c += (m.transpose() * R * m).trace();
    return c;
}

namespace detail {

// Symmetric PSD projection used for the weights: eigenvalues in [-1e-10, 0) are clamped to
// zero, anything more negative is rejected.
inline Eigen::MatrixXd clamp_psd(const Eigen::MatrixXd& w, const char* name,
                                 bool require_pd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
    if (es.info() != Eigen::Success)
        throw NumericError(std::string("synthesize_h2: eigendecomposition of ") + name +
                           " failed");
    Eigen::VectorXd lam = es.eigenvalues();
    constexpr double kClamp = 1e-10;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < -kClamp)
            throw NumericError(std::string("synthesize_h2: ") + name +
                               (require_pd ? " must be positive definite"
                                           : " must be positive semidefinite"));
        if (lam(i) < 0.0) lam(i) = 0.0;
    }
    if (require_pd && lam.minCoeff() <= kClamp)
        throw NumericError(std::string("synthesize_h2: ") + name +
                           " must be positive definite");
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

// Minimize sum_tau ||Q^{1/2} Phi_x[tau]||_F^2 + ||R^{1/2} Phi_u[tau]||_F^2 subject to
// achievability (i)-(iii) and the optional support masks.
//
// The problem separates by disturbance column j: with phi_x[1] = e_j fixed, recursion (ii)
// makes every phi_x[tau] affine in the stacked free entries of phi_u[1..T], so each column
// reduces to an equality-constrained least-squares problem whose constraints are closure
// (iii) plus the masked-out Phi_x entries. Each is solved through its KKT system by dense
// LU, falling back to a complete-orthogonal (pseudo-inverse) solve when masks make the
// system rank-deficient. Masked entries of the returned blocks are exactly zero.
[[nodiscard]] inline SynthesisResult synthesize_h2(const SynthesisProblem& prob) {
    prob.validate();
    const Eigen::Index nx = prob.sys.nx();
    const Eigen::Index nu = prob.sys.nu();
    const int T = prob.T;
    const Eigen::MatrixXd& A = prob.sys.A;
    const Eigen::MatrixXd& B = prob.sys.B;
    const Eigen::MatrixXd Qc = detail::clamp_psd(prob.Q, "Q", /*require_pd=*/false);
    const Eigen::MatrixXd Rc = detail::clamp_psd(prob.R, "R", /*require_pd=*/true);

    SynthesisResult out;
    out.response.T = T;
    out.response.phi_x.assign(T, Eigen::MatrixXd::Zero(nx, nx));
    out.response.phi_u.assign(T, Eigen::MatrixXd::Zero(nu, nx));

    for (Eigen::Index j = 0; j < nx; ++j) {
        // Free variables: unmasked entries of phi_u[tau](k, j), tau-major.
        std::vector<std::pair<int, Eigen::Index>> vars;  // (tau, input row k)
        for (int tau = 1; tau <= T; ++tau)
            for (Eigen::Index k = 0; k < nu; ++k)
                if (!prob.mask_u || (*prob.mask_u)(k, j)) vars.emplace_back(tau, k);
        const Eigen::Index nv = static_cast<Eigen::Index>(vars.size());

        // One pass builds the objective and constraints incrementally:
        //   phi_x[tau] (this column) = a + G v, with a <- A a and G <- A G + B-columns
        // advancing tau. After tau = T the advanced pair is the closure expression.
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nx, nv);
        Eigen::VectorXd a = Eigen::VectorXd::Unit(nx, j);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nv, nv);
        Eigen::VectorXd f = Eigen::VectorXd::Zero(nv);
        std::vector<Eigen::RowVectorXd> c_rows;
        std::vector<double> c_rhs;

        for (int tau = 1; tau <= T; ++tau) {
            if (tau >= 2) {
                H.noalias() += G.transpose() * Qc * G;
                f.noalias() += G.transpose() * (Qc * a);
                if (prob.mask_x) {
                    for (Eigen::Index i = 0; i < nx; ++i) {
                        if ((*prob.mask_x)(i, j)) continue;
                        c_rows.emplace_back(G.row(i));
                        c_rhs.push_back(-a(i));
                    }
                }
            }
            for (Eigen::Index v = 0; v < nv; ++v)
                if (vars[v].first == tau) {
                    const Eigen::Index k = vars[v].second;
                    H(v, v) += Rc(k, k);
                    for (Eigen::Index w = 0; w < nv; ++w)
                        if (w != v && vars[w].first == tau) H(v, w) += Rc(k, vars[w].second);
                }
            G = A * G;
            for (Eigen::Index v = 0; v < nv; ++v)
                if (vars[v].first == tau) G.col(v) += B.col(vars[v].second);
            a = A * a;
        }
        for (Eigen::Index i = 0; i < nx; ++i) {  // closure rows: G v + a = 0
            c_rows.emplace_back(G.row(i));
            c_rhs.push_back(-a(i));
        }

        const Eigen::Index nc = static_cast<Eigen::Index>(c_rows.size());
        Eigen::MatrixXd C(nc, nv);
        Eigen::VectorXd d(nc);
        for (Eigen::Index r = 0; r < nc; ++r) {
            C.row(r) = c_rows[r];
            d(r) = c_rhs[r];
        }

        Eigen::VectorXd v_sol = Eigen::VectorXd::Zero(nv);
        if (nv > 0) {
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + nc, nv + nc);
            kkt.topLeftCorner(nv, nv) = H;
            kkt.topRightCorner(nv, nc) = C.transpose();
            kkt.bottomLeftCorner(nc, nv) = C;
            Eigen::VectorXd rhs(nv + nc);
            rhs.head(nv) = -f;
            rhs.tail(nc) = d;

            Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
            Eigen::VectorXd sol;
            if (lu.isInvertible()) {
                sol = lu.solve(rhs);
                const double rc = lu.rcond();
                out.min_rcond = std::min(out.min_rcond, rc);
                if (rc < 1e-12) out.ill_conditioned = true;
            } else {
                // Redundant masks make the KKT singular; take the minimum-norm solution.
                sol = kkt.completeOrthogonalDecomposition().solve(rhs);
                out.ill_conditioned = true;
                out.min_rcond = 0.0;
            }
            v_sol = sol.head(nv);
        }
        const double violation =
            nc == 0 ? 0.0 : (C * v_sol - d).cwiseAbs().maxCoeff();
        if (violation > kFeasEps)
            throw InfeasibleError("synthesize_h2: constraints unsatisfiable for disturbance "
                                  "column " + std::to_string(j) +
                                  " (masks too tight or closure unreachable)", violation);

        for (Eigen::Index v = 0; v < nv; ++v)
            out.response.phi_u[vars[v].first - 1](vars[v].second, j) = v_sol(v);
    }

    // Rebuild Phi_x through recursion (ii); masked entries are pinned to exact zero, which
    // perturbs the recursion residual only by the (feasible-by-construction) solve error.
    out.response.phi_x[0] = Eigen::MatrixXd::Identity(nx, nx);
    for (int tau = 1; tau < T; ++tau) {
        out.response.phi_x[tau] =
            A * out.response.phi_x[tau - 1] + B * out.response.phi_u[tau - 1];
        if (prob.mask_x) {
            for (Eigen::Index i = 0; i < nx; ++i)
                for (Eigen::Index j = 0; j < nx; ++j)
                    if (!(*prob.mask_x)(i, j)) out.response.phi_x[tau](i, j) = 0.0;
        }
    }

    out.achievability = achievability_residual(prob.sys, out.response);
    out.objective = h2_cost(Qc, Rc, out.response);
    return out;
}

// ============================================================================
// Response reconstruction and robustness
// ============================================================================

struct PhiXReconstruction {
    std::vector<Eigen::MatrixXd> phi_x;  // blocks 1..T_out
    double tail_norm = 0.0;              // max-abs of the would-be block T_out + 1
};

// Rebuild the state response implied by an input response: Phi_x[1] = I and
// Phi_x[tau+1] = A Phi_x[tau] + B Phi_u[tau], with Phi_u[tau] = 0 past its horizon.
// For a closed (achievable) pair the tail vanishes; tail_norm reports the leftover.
[[nodiscard]] inline PhiXReconstruction phi_x_from_phi_u(
    const LtiSystem& sys, const std::vector<Eigen::MatrixXd>& phi_u, int t_out) {
    if (t_out < 1) throw DimensionError("phi_x_from_phi_u: T_out must be >= 1");
    for (const auto& m : phi_u)
        if (m.rows() != sys.nu() || m.cols() != sys.nx())
            throw DimensionError("phi_x_from_phi_u: Phi_u block has wrong shape");
    const int t_in = static_cast<int>(phi_u.size());
    PhiXReconstruction rec;
    rec.phi_x.reserve(t_out);
    Eigen::MatrixXd cur = Eigen::MatrixXd::Identity(sys.nx(), sys.nx());
    for (int tau = 1; tau <= t_out; ++tau) {
        rec.phi_x.push_back(cur);
        Eigen::MatrixXd next = sys.A * cur;
        if (tau <= t_in) next.noalias() += sys.B * phi_u[tau - 1];
        cur = std::move(next);
    }
    rec.tail_norm = cur.cwiseAbs().maxCoeff();
    return rec;
}

// Certified margin for additive uncertainty: the induced linf -> linf norm of the FIR map
// A_u * Phi_x, i.e. the largest row absolute sum across all blocks A_u Phi_x[tau]. A value
// below 1 certifies that the controller synthesized for (A_s, B) stabilizes (A_s + A_u, B).
[[nodiscard]] inline double robust_stability_margin(const Eigen::MatrixXd& A_s,
                                                    const Eigen::MatrixXd& A_u,
                                                    const std::vector<Eigen::MatrixXd>& phi_x) {
    if (A_s.rows() != A_s.cols() || A_u.rows() != A_u.cols() || A_s.rows() != A_u.rows())
        throw DimensionError("robust_stability_margin: A_s and A_u must be square, same size");
    if (phi_x.empty()) throw DimensionError("robust_stability_margin: phi_x must be non-empty");
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(A_u.rows());
    for (const auto& m : phi_x) {
        if (m.rows() != A_s.rows() || m.cols() != A_s.cols())
            throw DimensionError("robust_stability_margin: Phi_x block has wrong shape");
        row_sums += (A_u * m).cwiseAbs().rowwise().sum();
    }
    return row_sums.maxCoeff();
}

}  // namespace sls
