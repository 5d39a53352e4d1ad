#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sls/architecture.hpp"
#include "sls/errors.hpp"
#include "sls/lti.hpp"
#include "sls/realization.hpp"
#include "sls/rng.hpp"
#include "sls/simulator.hpp"
#include "sls/synthesis.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr sls::ArchKind kAllKinds[] = {
    sls::ArchKind::Centralized, sls::ArchKind::OriginalCentralized, sls::ArchKind::GlobalState,
    sls::ArchKind::NaiveDistributed, sls::ArchKind::MemoryConservative};

struct Instance {
    sls::LtiSystem sys;
    sls::SystemResponse resp;
};

Instance make_instance(Eigen::Index nx, Eigen::Index nu, int T, std::uint64_t seed,
                       double rho = 0.7) {
    sls::Rng rng(seed);
    sls::LtiSystem sys = rng.schur_system(nx, nu, rho);
    sls::SynthesisProblem prob{sys, T, MatrixXd::Identity(nx, nx), MatrixXd::Identity(nu, nu),
                               std::nullopt, std::nullopt};
    return {std::move(sys), sls::synthesize_h2(prob).response};
}

std::vector<VectorXd> random_disturbance(Eigen::Index nx, int steps, std::uint64_t seed) {
    sls::Rng rng(seed);
    std::vector<VectorXd> d;
    for (int t = 0; t < steps; ++t) d.push_back(rng.vector(nx));
    return d;
}

}  // namespace

TEST_CASE("every architecture reproduces the monolithic reference") {
    const struct {
        Eigen::Index nx, nu;
        int T;
    } shapes[] = {{1, 1, 2}, {2, 2, 3}, {3, 2, 4}, {4, 3, 5}};
    int shape_ix = 0;
    for (const auto& s : shapes) {
        const Instance inst = make_instance(s.nx, s.nu, s.T, 900 + shape_ix++);
        const auto d = random_disturbance(s.nx, 20, 77);
        for (const auto kind : kAllKinds) {
            INFO("arch=" << sls::arch_name(kind) << " nx=" << s.nx << " nu=" << s.nu
                         << " T=" << s.T);
            const auto g = sls::build_architecture(kind, inst.sys, inst.resp);
            const auto dev = sls::compare_to_reference(g, inst.sys, inst.resp, d, 50);
            CHECK(dev.max_dev() < 1e-9);
        }
    }
}

TEST_CASE("impulse responses of the architectures trace the synthesized maps") {
    const Instance inst = make_instance(3, 2, 4, 910);
    const int T = 4, H = 14;
    for (const auto kind : kAllKinds) {
        const auto g = sls::build_architecture(kind, inst.sys, inst.resp);
        for (Eigen::Index j = 0; j < 3; ++j) {
            INFO("arch=" << sls::arch_name(kind) << " direction=" << j);
            const std::vector<VectorXd> d = {VectorXd::Unit(3, j)};
            const auto tr = sls::simulate(g, inst.sys, d, H);
            for (int t = 0; t < H; ++t) {
                if (t < T) {
                    CHECK((tr.x[t] - inst.resp.phi_x[t].col(j)).cwiseAbs().maxCoeff() < 1e-9);
                    CHECK((tr.u[t] - inst.resp.phi_u[t].col(j)).cwiseAbs().maxCoeff() < 1e-9);
                } else {
                    CHECK(tr.u[t].cwiseAbs().maxCoeff() < 1e-12);
                    CHECK(tr.x[t].cwiseAbs().maxCoeff() < 1e-9);
                }
            }
            CHECK((tr.delta[0] - d[0]).cwiseAbs().maxCoeff() < 1e-12);
            for (int t = 1; t < H; ++t) CHECK(tr.delta[t].cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("rest stays rest") {
    const Instance inst = make_instance(2, 2, 3, 920);
    for (const auto kind : kAllKinds) {
        const auto g = sls::build_architecture(kind, inst.sys, inst.resp);
        const auto tr = sls::simulate(g, inst.sys, {}, 10);
        for (int t = 0; t < 10; ++t) {
            CHECK(tr.x[t].cwiseAbs().maxCoeff() == 0.0);
            CHECK(tr.u[t].cwiseAbs().maxCoeff() == 0.0);
            CHECK(tr.delta[t].cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("a mismatched plant perturbs the architecture and the reference identically") {
    const Instance inst = make_instance(3, 2, 4, 930);
    MatrixXd a_true = inst.sys.A;
    a_true.diagonal().array() += 0.02;  // model error, well inside the certified margin
    const sls::LtiSystem plant(a_true, inst.sys.B);
    const auto d = random_disturbance(3, 15, 78);
    for (const auto kind : kAllKinds) {
        const auto g = sls::build_architecture(kind, inst.sys, inst.resp);
        const auto dev = sls::compare_to_reference(g, plant, inst.resp, d, 60);
        CHECK(dev.max_dev() < 1e-9);
        const auto tr = sls::simulate(g, plant, d, 60);
        double worst = 0.0;
        for (const auto& xv : tr.x) worst = std::max(worst, xv.cwiseAbs().maxCoeff());
        CHECK(worst < 1e3);  // still bounded under the perturbed dynamics
    }
}

TEST_CASE("per-step delivered scalars match the static communication census") {
    const Instance inst = make_instance(3, 2, 3, 940);
    for (const auto kind : kAllKinds) {
        const auto g = sls::build_architecture(kind, inst.sys, inst.resp);
        const auto rep = sls::cost_report(g);
        sls::SimOptions opts;
        opts.log_links = true;
        const auto tr = sls::simulate(g, inst.sys, random_disturbance(3, 12, 79), 12, opts);
        for (int t = 0; t < 12; ++t) {
            long long delivered = 0;
            for (const auto& p : tr.link_payloads[static_cast<size_t>(t)])
                delivered += static_cast<long long>(p.size());
            INFO("arch=" << sls::arch_name(kind) << " t=" << t);
            CHECK(delivered == rep.comm_nnz);
        }
    }
}

TEST_CASE("simulation is bit-reproducible") {
    const Instance inst = make_instance(3, 2, 4, 950);
    const auto g =
        sls::build_architecture(sls::ArchKind::MemoryConservative, inst.sys, inst.resp);
    const auto d = random_disturbance(3, 25, 80);
    sls::SimOptions opts;
    opts.log_links = true;
    const auto tr1 = sls::simulate(g, inst.sys, d, 25, opts);
    const auto tr2 = sls::simulate(g, inst.sys, d, 25, opts);
    CHECK(tr1.to_csv() == tr2.to_csv());
    nlohmann::json j1, j2;
    sls::to_json(j1, tr1);
    sls::to_json(j2, tr2);
    CHECK(j1.dump(2) == j2.dump(2));
}

TEST_CASE("exact structural zeros prune traffic without changing the loop") {
    // Diagonal plant with diagonal supports: the synthesized response is exactly
    // diagonal, so all cross links carry structural zeros and are pruned.
    MatrixXd a = MatrixXd::Zero(2, 2);
    a.diagonal() << 0.5, -0.35;
    const sls::LtiSystem sys(a, MatrixXd::Identity(2, 2));
    sls::MaskMatrix diag = sls::MaskMatrix::Constant(2, 2, false);
    diag(0, 0) = diag(1, 1) = true;
    sls::SynthesisProblem prob{sys, 3, MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                               diag, diag};
    const auto resp = sls::synthesize_h2(prob).response;

    const auto g = sls::build_architecture(sls::ArchKind::NaiveDistributed, sys, resp);
    const auto rep = sls::cost_report(g);
    CHECK(rep.comm_dense == 10);
    CHECK(rep.comm_nnz == 4);  // 2 delta fibers + 2 self couplings stay

    const auto d = random_disturbance(2, 15, 81);
    CHECK(sls::compare_to_reference(g, sys, resp, d, 40).max_dev() < 1e-9);

    sls::SimOptions opts;
    opts.log_links = true;
    const auto tr = sls::simulate(g, sys, d, 15, opts);
    for (int t = 0; t < 15; ++t) {
        long long delivered = 0;
        for (const auto& p : tr.link_payloads[static_cast<size_t>(t)])
            delivered += static_cast<long long>(p.size());
        CHECK(delivered == 4);
    }
}

TEST_CASE("killing the central controller silences control exactly and frees the plant") {
    const Instance inst = make_instance(3, 2, 3, 960);
    const auto d = random_disturbance(3, 20, 82);
    const int t_fail = 4, H = 20;
    for (const auto kind :
         {sls::ArchKind::Centralized, sls::ArchKind::OriginalCentralized}) {
        const auto g = sls::build_architecture(kind, inst.sys, inst.resp);
        const auto tr =
            sls::simulate(g, inst.sys, d, H, std::vector<sls::FailureEvent>{{"ctrl", t_fail,
                                                                             "silent"}});
        bool live_before = false;
        for (int t = 0; t < t_fail; ++t)
            live_before |= tr.u[static_cast<size_t>(t)].cwiseAbs().maxCoeff() > 0.0;
        CHECK(live_before);
        for (int t = t_fail; t < H; ++t)
            CHECK(tr.u[static_cast<size_t>(t)].cwiseAbs().maxCoeff() == 0.0);

        // With inputs exactly zero the plant must follow its open-loop recursion bitwise.
        VectorXd xm = tr.x[static_cast<size_t>(t_fail)];
        const VectorXd zero_u = VectorXd::Zero(2);
        for (int t = t_fail + 1; t < H; ++t) {
            const VectorXd dist = t < static_cast<int>(d.size())
                                      ? d[static_cast<size_t>(t)]
                                      : VectorXd::Zero(3).eval();
            xm = inst.sys.A * xm + inst.sys.B * zero_u + dist;
            CHECK((tr.x[static_cast<size_t>(t)] - xm).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("killing the state keeper drains the delta history then silences control") {
    const Instance inst = make_instance(3, 2, 3, 970);
    const auto g = sls::build_architecture(sls::ArchKind::GlobalState, inst.sys, inst.resp);
    const int t_fail = 5, H = 20, T = 3;
    const auto d = random_disturbance(3, H, 83);
    const auto tr = sls::simulate(g, inst.sys, d, H,
                                  std::vector<sls::FailureEvent>{{"gsk", t_fail, "silent"}});
    // Pre-kill deltas still sit in the actuator rings right after the failure...
    double drain = 0.0;
    for (int t = t_fail; t < t_fail + T - 1; ++t)
        drain = std::max(drain, tr.u[static_cast<size_t>(t)].cwiseAbs().maxCoeff());
    CHECK(drain > 0.0);
    // ...and once the ring holds only post-kill zeros, control is bit-exact zero.
    for (int t = t_fail + T - 1; t < H; ++t)
        CHECK(tr.u[static_cast<size_t>(t)].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a killed actuator latches to zero; peers keep operating") {
    const Instance inst = make_instance(3, 2, 3, 980);
    const auto g =
        sls::build_architecture(sls::ArchKind::NaiveDistributed, inst.sys, inst.resp);
    const int t_fail = 3, H = 16;
    const auto d = random_disturbance(3, H, 84);
    const auto tr = sls::simulate(g, inst.sys, d, H,
                                  std::vector<sls::FailureEvent>{{"a0", t_fail, "silent"}});
    bool peer_live = false;
    for (int t = t_fail; t < H; ++t) {
        CHECK(tr.u[static_cast<size_t>(t)](0) == 0.0);
        peer_live |= std::abs(tr.u[static_cast<size_t>(t)](1)) > 1e-9;
    }
    CHECK(peer_live);
}

TEST_CASE("sensor loss obeys superposition in the distributed layouts") {
    const Instance inst = make_instance(3, 2, 3, 990);
    const int t_fail = 4, H = 30;
    const auto d = random_disturbance(3, H, 85);
    for (const auto kind :
         {sls::ArchKind::NaiveDistributed, sls::ArchKind::MemoryConservative}) {
        for (const std::string node : {"s0", "s2"}) {
            INFO("arch=" << sls::arch_name(kind) << " node=" << node);
            const auto g = sls::build_architecture(kind, inst.sys, inst.resp);

            sls::SimOptions ref_opts;
            ref_opts.log_links = true;
            const auto ref = sls::simulate(g, inst.sys, d, H, ref_opts);

            const auto failed = sls::simulate(
                g, inst.sys, d, H, std::vector<sls::FailureEvent>{{node, t_fail, "silent"}});

            // The node's standalone contribution: silence it for the whole run and replay
            // the payloads it sent in the reference from t_fail on.
            sls::SimOptions contrib_opts;
            contrib_opts.failures.push_back({node, 0, "silent"});
            contrib_opts.injections = sls::outgoing_payload_injections(g, ref, node, t_fail);
            const auto contrib = sls::simulate(g, inst.sys, {}, H, contrib_opts);

            double worst = 0.0;
            for (int t = 0; t < H; ++t) {
                worst = std::max(worst, (failed.x[static_cast<size_t>(t)] -
                                         (ref.x[static_cast<size_t>(t)] -
                                          contrib.x[static_cast<size_t>(t)]))
                                            .cwiseAbs()
                                            .maxCoeff());
                worst = std::max(worst, (failed.u[static_cast<size_t>(t)] -
                                         (ref.u[static_cast<size_t>(t)] -
                                          contrib.u[static_cast<size_t>(t)]))
                                            .cwiseAbs()
                                            .maxCoeff());
            }
            CHECK(worst < 1e-9);

            // Losing one sensor must not kill all control authority (nu = 2 here).
            bool any_u = false;
            for (int t = t_fail; t < H; ++t)
                any_u |= failed.u[static_cast<size_t>(t)].cwiseAbs().maxCoeff() > 1e-9;
            CHECK(any_u);
        }
    }
}

TEST_CASE("kill sweep flags exactly the architectures with controller infrastructure") {
    const Instance inst = make_instance(3, 2, 3, 1000);
    for (const auto kind : kAllKinds) {
        const auto g = sls::build_architecture(kind, inst.sys, inst.resp);
        const auto rep = sls::spof_sweep(g, inst.sys, 4242);
        const bool has_infra = kind == sls::ArchKind::Centralized ||
                               kind == sls::ArchKind::OriginalCentralized ||
                               kind == sls::ArchKind::GlobalState;
        INFO("arch=" << sls::arch_name(kind));
        CHECK(rep.single_point_of_failure == has_infra);
        CHECK(rep.verdicts.size() == (has_infra ? 1u : 0u));
        if (has_infra) {
            CHECK(rep.verdicts[0].silences_control);
            CHECK(rep.verdicts[0].residual_control == 0.0);
        }
    }
}

TEST_CASE("nine closed-loop injection responses against the spectral oracle") {
    const Instance inst = make_instance(3, 2, 3, 1010);
    const int H = 40;
    const auto rep = sls::internal_stability_report(inst.sys, inst.resp.phi_u, H);

    // Eight maps are finite impulse responses: their tails must be bit-exact zero (u,
    // delta) or at the level of the closure residual shrunk by a Schur plant (x).
    CHECK(rep.tail[1][0] == 0.0);
    CHECK(rep.tail[2][0] == 0.0);
    CHECK(rep.tail[0][0] < 1e-13);
    CHECK(rep.tail[1][1] == 0.0);
    CHECK(rep.tail[2][1] == 0.0);
    CHECK(rep.tail[0][1] < 1e-13);
    CHECK(rep.tail[1][2] == 0.0);
    CHECK(rep.tail[2][2] == 0.0);

    // The lone infinite tail: state response to reconstruction noise decays exactly like
    // the open-loop state matrix, entry for entry.
    double expect = 0.0;
    MatrixXd at = MatrixXd::Identity(3, 3);
    for (int t = 1; t < H; ++t) {
        at = inst.sys.A * at;
        if (t >= H - rep.tail_window) expect = std::max(expect, at.cwiseAbs().maxCoeff());
    }
    CHECK(std::abs(rep.tail[0][2] - expect) < 1e-12);
    CHECK(rep.tail[0][2] > 1e-8);  // genuinely nonzero at this horizon: rho^30-ish

    // Degenerate plant: with A = 0 even that map is finite, so every tail is exactly zero.
    const Instance dead = make_instance(3, 2, 3, 1020, 0.0);
    const auto rep0 = sls::internal_stability_report(dead.sys, dead.resp.phi_u, H);
    CHECK(rep0.max_tail() == 0.0);

    CHECK_THROWS_AS(sls::internal_stability_report(inst.sys, inst.resp.phi_u, 5, 10),
                    sls::DimensionError);
}

TEST_CASE("simulation input validation") {
    const Instance inst = make_instance(2, 2, 2, 1030);
    const auto g = sls::build_architecture(sls::ArchKind::Centralized, inst.sys, inst.resp);

    CHECK_THROWS_AS(sls::simulate(g, inst.sys, {}, 0), sls::DimensionError);
    const sls::LtiSystem other(MatrixXd::Identity(3, 3) * 0.5, MatrixXd::Ones(3, 1));
    CHECK_THROWS_AS(sls::simulate(g, other, {}, 5), sls::DimensionError);
    CHECK_THROWS_AS(sls::simulate(g, inst.sys, {VectorXd::Zero(3)}, 5), sls::DimensionError);
    CHECK_THROWS_AS(sls::simulate(g, inst.sys, {}, 5,
                                  std::vector<sls::FailureEvent>{{"ghost", 1, "silent"}}),
                    sls::SpecError);
    CHECK_THROWS_AS(sls::simulate(g, inst.sys, {}, 5,
                                  std::vector<sls::FailureEvent>{{"s0", -1, "silent"}}),
                    sls::SpecError);

    sls::SimOptions opts;
    opts.injections.push_back({999, 0, {VectorXd::Zero(1)}});
    CHECK_THROWS_AS(sls::simulate(g, inst.sys, {}, 5, opts), sls::SpecError);
    sls::SimOptions opts2;
    opts2.injections.push_back({0, 0, {VectorXd::Zero(7)}});
    CHECK_THROWS_AS(sls::simulate(g, inst.sys, {}, 5, opts2), sls::SpecError);

    const auto plain = sls::simulate(g, inst.sys, {}, 3);
    CHECK_THROWS_AS(sls::outgoing_payload_injections(g, plain, "s0", 1), sls::SpecError);
}
