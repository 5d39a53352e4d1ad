#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sls/errors.hpp"
#include "sls/lti.hpp"
#include "sls/rng.hpp"
#include "sls/synthesis.hpp"

using Catch::Matchers::WithinAbs;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

// Independent reference solver. It never eliminates anything: every response entry of a
// column is a decision variable, every structural requirement is an explicit constraint
// row, and the full KKT system is solved by a complete orthogonal decomposition. Slow and
// simple on purpose; the production solver must agree with it.
struct BruteForce {
    sls::SystemResponse resp;
    double objective = 0.0;
    bool feasible = true;
};

BruteForce brute_force_h2(const sls::SynthesisProblem& p) {
    const Eigen::Index nx = p.sys.nx();
    const Eigen::Index nu = p.sys.nu();
    const int T = p.T;
    const Eigen::Index nv = static_cast<Eigen::Index>(T) * (nx + nu);
    const auto xoff = [&](int tau) { return static_cast<Eigen::Index>(tau - 1) * nx; };
    const auto uoff = [&](int tau) {
        return static_cast<Eigen::Index>(T) * nx + static_cast<Eigen::Index>(tau - 1) * nu;
    };

    BruteForce out;
    out.resp.T = T;
    out.resp.phi_x.assign(static_cast<size_t>(T), MatrixXd::Zero(nx, nx));
    out.resp.phi_u.assign(static_cast<size_t>(T), MatrixXd::Zero(nu, nx));

    MatrixXd H = MatrixXd::Zero(nv, nv);
    for (int tau = 1; tau <= T; ++tau) {
        H.block(xoff(tau), xoff(tau), nx, nx) = p.Q;
        H.block(uoff(tau), uoff(tau), nu, nu) = p.R;
    }

    for (Eigen::Index j = 0; j < nx; ++j) {
        std::vector<RowVectorXd> rows;
        std::vector<double> rhs;
        const auto add = [&](const RowVectorXd& r, double d) {
            rows.push_back(r);
            rhs.push_back(d);
        };
        for (Eigen::Index i = 0; i < nx; ++i) {  // first block pinned to the identity
            RowVectorXd r = RowVectorXd::Zero(nv);
            r(xoff(1) + i) = 1.0;
            add(r, i == j ? 1.0 : 0.0);
        }
        for (int tau = 1; tau <= T - 1; ++tau)  // state recursion
            for (Eigen::Index i = 0; i < nx; ++i) {
                RowVectorXd r = RowVectorXd::Zero(nv);
                r(xoff(tau + 1) + i) = 1.0;
                for (Eigen::Index m = 0; m < nx; ++m) r(xoff(tau) + m) -= p.sys.A(i, m);
                for (Eigen::Index m = 0; m < nu; ++m) r(uoff(tau) + m) -= p.sys.B(i, m);
                add(r, 0.0);
            }
        for (Eigen::Index i = 0; i < nx; ++i) {  // finite-response closure
            RowVectorXd r = RowVectorXd::Zero(nv);
            for (Eigen::Index m = 0; m < nx; ++m) r(xoff(T) + m) += p.sys.A(i, m);
            for (Eigen::Index m = 0; m < nu; ++m) r(uoff(T) + m) += p.sys.B(i, m);
            add(r, 0.0);
        }
        if (p.mask_x)
            for (Eigen::Index i = 0; i < nx; ++i)
                if (!(*p.mask_x)(i, j))
                    for (int tau = 1; tau <= T; ++tau) {
                        RowVectorXd r = RowVectorXd::Zero(nv);
                        r(xoff(tau) + i) = 1.0;
                        add(r, 0.0);
                    }
        if (p.mask_u)
            for (Eigen::Index k = 0; k < nu; ++k)
                if (!(*p.mask_u)(k, j))
                    for (int tau = 1; tau <= T; ++tau) {
                        RowVectorXd r = RowVectorXd::Zero(nv);
                        r(uoff(tau) + k) = 1.0;
                        add(r, 0.0);
                    }

        const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
        MatrixXd C(m, nv);
        VectorXd d(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            C.row(r) = rows[static_cast<size_t>(r)];
            d(r) = rhs[static_cast<size_t>(r)];
        }

        MatrixXd K = MatrixXd::Zero(nv + m, nv + m);
        K.topLeftCorner(nv, nv) = 2.0 * H;
        K.topRightCorner(nv, m) = C.transpose();
        K.bottomLeftCorner(m, nv) = C;
        VectorXd b = VectorXd::Zero(nv + m);
        b.tail(m) = d;
        const VectorXd sol = K.completeOrthogonalDecomposition().solve(b);
        const VectorXd v = sol.head(nv);
        if ((C * v - d).lpNorm<Eigen::Infinity>() > 1e-8) {
            out.feasible = false;
            return out;
        }
        for (int tau = 1; tau <= T; ++tau) {
            out.resp.phi_x[static_cast<size_t>(tau - 1)].col(j) = v.segment(xoff(tau), nx);
            out.resp.phi_u[static_cast<size_t>(tau - 1)].col(j) = v.segment(uoff(tau), nu);
        }
    }
    out.objective = sls::h2_cost(p.Q, p.R, out.resp);
    return out;
}

double max_block_diff(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return m;
}

sls::SynthesisProblem scalar_problem(double a, double b, int T) {
    return sls::SynthesisProblem{sls::LtiSystem(MatrixXd::Constant(1, 1, a),
                                                MatrixXd::Constant(1, 1, b)),
                                 T,
                                 MatrixXd::Identity(1, 1),
                                 MatrixXd::Identity(1, 1),
                                 std::nullopt,
                                 std::nullopt};
}

}  // namespace

TEST_CASE("hand-solved scalar instance is reproduced exactly") {
    // x+ = 0.5 x + u, two-step response, unit weights. Eliminating the equality
    // constraints by hand gives phi_x = [1, 2/9], phi_u = [-5/18, -1/9] and a cost of
    // 1 + 5/36 = 41/36.
    const auto res = sls::synthesize_h2(scalar_problem(0.5, 1.0, 2));
    CHECK_THAT(res.response.phi_x[0](0, 0), WithinAbs(1.0, 1e-14));
    CHECK_THAT(res.response.phi_x[1](0, 0), WithinAbs(2.0 / 9.0, 1e-12));
    CHECK_THAT(res.response.phi_u[0](0, 0), WithinAbs(-5.0 / 18.0, 1e-12));
    CHECK_THAT(res.response.phi_u[1](0, 0), WithinAbs(-1.0 / 9.0, 1e-12));
    CHECK_THAT(res.objective, WithinAbs(41.0 / 36.0, 1e-12));
    CHECK(res.achievability.residual() < 1e-12);
    CHECK_FALSE(res.ill_conditioned);
}

TEST_CASE("one-step horizon forces the deadbeat gain") {
    const auto res = sls::synthesize_h2(scalar_problem(0.5, 1.0, 1));
    CHECK_THAT(res.response.phi_u[0](0, 0), WithinAbs(-0.5, 1e-14));
    CHECK_THAT(res.objective, WithinAbs(1.0 + 0.25, 1e-14));
}

TEST_CASE("solver agrees with the brute-force reference on random instances") {
    sls::Rng rng(7);
    for (int trial = 0; trial < 14; ++trial) {
        const Eigen::Index nx = 1 + static_cast<Eigen::Index>(rng.integer(4));
        const Eigen::Index nu = 1 + static_cast<Eigen::Index>(rng.integer(3));
        // Closing the response in T steps needs T*nu >= nx on a generic plant (the final
        // state must be reachable through the input maps), so draw T from that range.
        const int t_min = static_cast<int>((nx + nu - 1) / nu);
        const int T = t_min + static_cast<int>(rng.integer(5));
        // Stability is not required for synthesis; cover both sides of the unit circle.
        const double rho = trial % 3 == 2 ? 1.3 : 0.8;
        const sls::LtiSystem sys = rng.schur_system(nx, nu, rho);

        MatrixXd lq = rng.matrix(nx, nx);
        MatrixXd lr = rng.matrix(nu, nu);
        sls::SynthesisProblem prob{sys,
                                   T,
                                   MatrixXd(lq * lq.transpose() + 0.1 * MatrixXd::Identity(nx, nx)),
                                   MatrixXd(lr * lr.transpose() + 0.2 * MatrixXd::Identity(nu, nu)),
                                   std::nullopt,
                                   std::nullopt};

        const auto oracle = brute_force_h2(prob);
        REQUIRE(oracle.feasible);
        const auto res = sls::synthesize_h2(prob);

        CHECK(max_block_diff(res.response.phi_x, oracle.resp.phi_x) < 1e-8);
        CHECK(max_block_diff(res.response.phi_u, oracle.resp.phi_u) < 1e-8);
        CHECK_THAT(res.objective, WithinAbs(oracle.objective, 1e-9 * (1.0 + oracle.objective)));
        CHECK(res.achievability.residual() < 1e-8);
        CHECK_THAT(res.objective, WithinAbs(sls::h2_cost(prob.Q, prob.R, res.response), 1e-10));
    }
}

TEST_CASE("support masks pin entries to exact zeros without breaking achievability") {
    sls::Rng rng(11);

    SECTION("decoupled diagonal system with diagonal supports") {
        MatrixXd a = MatrixXd::Zero(3, 3);
        a.diagonal() << 0.5, -0.4, 0.3;
        const sls::LtiSystem sys(a, MatrixXd::Identity(3, 3));
        sls::MaskMatrix diag = sls::MaskMatrix::Constant(3, 3, false);
        for (Eigen::Index i = 0; i < 3; ++i) diag(i, i) = true;
        sls::SynthesisProblem prob{sys, 3, MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3),
                                   diag, diag};

        const auto res = sls::synthesize_h2(prob);
        const auto oracle = brute_force_h2(prob);
        REQUIRE(oracle.feasible);
        CHECK(max_block_diff(res.response.phi_u, oracle.resp.phi_u) < 1e-8);
        for (const auto& blk : res.response.phi_x)
            for (Eigen::Index i = 0; i < 3; ++i)
                for (Eigen::Index j = 0; j < 3; ++j)
                    if (i != j) CHECK(blk(i, j) == 0.0);  // exactly zero, not just small
        for (const auto& blk : res.response.phi_u)
            for (Eigen::Index i = 0; i < 3; ++i)
                for (Eigen::Index j = 0; j < 3; ++j)
                    if (i != j) CHECK(blk(i, j) == 0.0);
        CHECK(res.achievability.residual() < 1e-10);

        // The decoupled problem is three independent scalar problems.
        const auto s0 = sls::synthesize_h2(scalar_problem(0.5, 1.0, 3));
        const auto s1 = sls::synthesize_h2(scalar_problem(-0.4, 1.0, 3));
        const auto s2 = sls::synthesize_h2(scalar_problem(0.3, 1.0, 3));
        CHECK_THAT(res.objective, WithinAbs(s0.objective + s1.objective + s2.objective, 1e-10));
    }

    SECTION("banded supports on a chain system still match the reference") {
        MatrixXd a = MatrixXd::Zero(4, 4);
        for (Eigen::Index i = 0; i + 1 < 4; ++i) a(i + 1, i) = 0.45;
        a.diagonal().setConstant(0.3);
        const sls::LtiSystem sys(a, MatrixXd::Identity(4, 4));
        const int T = 3;
        sls::MaskMatrix band = sls::MaskMatrix::Constant(4, 4, false);
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 4; ++j)
                if (i - j >= -1 && i - j <= 2) band(i, j) = true;  // wide enough for T = 3
        sls::SynthesisProblem prob{sys, T, MatrixXd::Identity(4, 4), MatrixXd::Identity(4, 4),
                                   band, band};
        const auto oracle = brute_force_h2(prob);
        REQUIRE(oracle.feasible);
        const auto res = sls::synthesize_h2(prob);
        CHECK(max_block_diff(res.response.phi_x, oracle.resp.phi_x) < 1e-8);
        CHECK(max_block_diff(res.response.phi_u, oracle.resp.phi_u) < 1e-8);
        CHECK(res.achievability.residual() < 1e-8);
        for (const auto& blk : res.response.phi_u)
            for (Eigen::Index i = 0; i < 4; ++i)
                for (Eigen::Index j = 0; j < 4; ++j)
                    if (!band(i, j)) CHECK(blk(i, j) == 0.0);
    }
}

TEST_CASE("unsatisfiable supports are reported infeasible with a residual") {
    // Input column 2 is forced to zero while A keeps pushing energy into it: the closure
    // constraint A^T e_2 = 0 cannot hold, so no finite response exists.
    MatrixXd a(2, 2);
    a << 0.6, 0.3, 0.2, 0.5;
    MatrixXd b(2, 1);
    b << 1.0, 0.4;
    sls::MaskMatrix mu(1, 2);
    mu << true, false;
    sls::SynthesisProblem prob{sls::LtiSystem(a, b), 3, MatrixXd::Identity(2, 2),
                               MatrixXd::Identity(1, 1), std::nullopt, mu};
    const auto oracle = brute_force_h2(prob);
    CHECK_FALSE(oracle.feasible);
    try {
        (void)sls::synthesize_h2(prob);
        FAIL("expected infeasibility to be reported");
    } catch (const sls::InfeasibleError& e) {
        CHECK(e.residual > 1e-8);
        CHECK(std::string(e.what()).find("unsatisfiable") != std::string::npos);
    }
}

TEST_CASE("weight validation") {
    auto prob = scalar_problem(0.5, 1.0, 2);
    prob.Q = MatrixXd::Constant(1, 1, -0.5);
    CHECK_THROWS_AS(sls::synthesize_h2(prob), sls::NumericError);

    auto prob2 = scalar_problem(0.5, 1.0, 2);
    prob2.R = MatrixXd::Constant(1, 1, 0.0);  // PSD but not PD
    CHECK_THROWS_AS(sls::synthesize_h2(prob2), sls::NumericError);

    MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    sls::SynthesisProblem prob3{sls::LtiSystem(MatrixXd::Identity(2, 2) * 0.5,
                                               MatrixXd::Identity(2, 2)),
                                2, asym, MatrixXd::Identity(2, 2), std::nullopt, std::nullopt};
    CHECK_THROWS_AS(sls::synthesize_h2(prob3), sls::NumericError);

    // Zero Q is a valid PSD weight; the optimum stays unique through R.
    sls::Rng rng(23);
    const sls::LtiSystem sys = rng.schur_system(3, 2, 0.7);
    sls::SynthesisProblem prob4{sys, 3, MatrixXd::Zero(3, 3), MatrixXd::Identity(2, 2),
                                std::nullopt, std::nullopt};
    const auto oracle = brute_force_h2(prob4);
    REQUIRE(oracle.feasible);
    const auto res = sls::synthesize_h2(prob4);
    CHECK(max_block_diff(res.response.phi_u, oracle.resp.phi_u) < 1e-8);
}

TEST_CASE("degenerate columns take the rank-revealing fallback and are flagged") {
    // State 1 is dead: its row of A and of B are zero, so one closure row degenerates to
    // 0 = 0 and the column KKT system is singular. The solve must fall back to the
    // minimum-norm path, flag the conditioning, and still return the optimum.
    MatrixXd a(2, 2);
    a << 0.5, 0.3, 0.0, 0.0;
    MatrixXd b(2, 1);
    b << 1.0, 0.0;
    sls::SynthesisProblem prob{sls::LtiSystem(a, b), 2, MatrixXd::Identity(2, 2),
                               MatrixXd::Identity(1, 1), std::nullopt, std::nullopt};
    const auto res = sls::synthesize_h2(prob);
    CHECK(res.ill_conditioned);
    CHECK(res.min_rcond < 1e-12);
    CHECK(res.achievability.residual() < 1e-8);
    const auto oracle = brute_force_h2(prob);
    REQUIRE(oracle.feasible);
    CHECK(max_block_diff(res.response.phi_u, oracle.resp.phi_u) < 1e-8);
    CHECK(max_block_diff(res.response.phi_x, oracle.resp.phi_x) < 1e-8);

    const auto clean = sls::synthesize_h2(scalar_problem(0.5, 1.0, 2));
    CHECK_FALSE(clean.ill_conditioned);
    CHECK(clean.min_rcond > 1e-12);
}

TEST_CASE("synthesis is deterministic") {
    sls::Rng rng(47);
    const sls::LtiSystem sys = rng.schur_system(4, 2, 0.8);
    sls::SynthesisProblem prob{sys, 4, MatrixXd::Identity(4, 4), MatrixXd::Identity(2, 2),
                               std::nullopt, std::nullopt};
    const auto r1 = sls::synthesize_h2(prob);
    const auto r2 = sls::synthesize_h2(prob);
    CHECK(r1.objective == r2.objective);
    for (size_t i = 0; i < r1.response.phi_u.size(); ++i)
        CHECK(r1.response.phi_u[i] == r2.response.phi_u[i]);
}

TEST_CASE("state response reconstruction from the input response") {
    sls::Rng rng(13);
    const sls::LtiSystem sys = rng.schur_system(3, 2, 1.2);  // works fine for unstable A too
    sls::SynthesisProblem prob{sys, 4, MatrixXd::Identity(3, 3), MatrixXd::Identity(2, 2),
                               std::nullopt, std::nullopt};
    const auto res = sls::synthesize_h2(prob);
    const auto rec = sls::phi_x_from_phi_u(sys, res.response.phi_u, prob.T);
    CHECK(max_block_diff(rec.phi_x, res.response.phi_x) < 1e-9);
    CHECK(rec.tail_norm < 1e-9);

    // Truncating the reconstruction before the horizon leaves a visible tail.
    const auto short_rec = sls::phi_x_from_phi_u(sys, res.response.phi_u, 2);
    CHECK(short_rec.phi_x.size() == 2);
    CHECK_THROWS_AS(sls::phi_x_from_phi_u(sys, res.response.phi_u, 0), sls::DimensionError);
}

TEST_CASE("worst-case gain margin formulas") {
    std::vector<MatrixXd> phi_x = {MatrixXd::Identity(2, 2)};
    const MatrixXd a_s = MatrixXd::Identity(2, 2) * 0.5;
    CHECK(sls::robust_stability_margin(a_s, MatrixXd::Zero(2, 2), phi_x) == 0.0);
    CHECK_THAT(sls::robust_stability_margin(a_s, MatrixXd::Identity(2, 2) * 0.125, phi_x),
               WithinAbs(0.125, 1e-15));

    MatrixXd blk2(2, 2);
    blk2 << 0.5, 0.0, 0.0, 0.25;
    MatrixXd a_u(2, 2);
    a_u << 0.0, 0.1, 0.2, 0.0;
    std::vector<MatrixXd> two = {MatrixXd::Identity(2, 2), blk2};
    CHECK_THAT(sls::robust_stability_margin(a_s, a_u, two), WithinAbs(0.3, 1e-14));

    CHECK_THROWS_AS(sls::robust_stability_margin(a_s, MatrixXd::Zero(3, 3), phi_x),
                    sls::DimensionError);
    CHECK_THROWS_AS(sls::robust_stability_margin(a_s, a_u, std::vector<MatrixXd>{}),
                    sls::DimensionError);
}

TEST_CASE("response serialization round trip") {
    const auto res = sls::synthesize_h2(scalar_problem(0.5, 1.0, 2));
    nlohmann::json j;
    sls::to_json(j, res.response);
    const auto back = sls::response_from_json(j);
    CHECK(back.T == 2);
    CHECK(back.phi_x[1] == res.response.phi_x[1]);
    CHECK(back.phi_u[0] == res.response.phi_u[0]);

    nlohmann::json bad = j;
    bad["phi_u"].erase(1);  // length no longer matches T
    CHECK_THROWS_AS(sls::response_from_json(bad), sls::SpecError);
    CHECK_THROWS_AS(sls::response_from_json(nlohmann::json::object()), sls::SpecError);
}

TEST_CASE("achievability report flags a perturbed response") {
    const auto res = sls::synthesize_h2(scalar_problem(0.5, 1.0, 2));
    auto broken = res.response;
    broken.phi_x[1](0, 0) += 1e-3;
    const auto rep = sls::achievability_residual(
        sls::LtiSystem(MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 1.0)), broken);
    CHECK(rep.residual() > 1e-4);
}
