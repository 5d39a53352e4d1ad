#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sls/architecture.hpp"
#include "sls/errors.hpp"
#include "sls/lti.hpp"
#include "sls/realization.hpp"
#include "sls/rng.hpp"
#include "sls/synthesis.hpp"
#include "sls/trace.hpp"

// Discrete-event execution of a deployment architecture: each step runs the graph's phase
// schedule; computations read node-local state, sends are staged and committed at the
// phase barrier in link-index order, so results are independent of node iteration order.
// A node failed in "silent" mode emits zeros on every outgoing link (and actuates zero),
// computes nothing, and ignores deliveries from its failure step onward.

namespace sls {

// Additive payload overrides used to replay recorded traffic on selected links: at step
// t_start + i the vector payloads[i] is added to whatever the link carries. Links that do
// not send (pruned) ignore injections.
struct LinkInjection {
    int link = -1;
    int t_start = 0;
    std::vector<Eigen::VectorXd> payloads;
};

struct SimOptions {
    std::vector<FailureEvent> failures;
    std::vector<LinkInjection> injections;
    bool log_links = false;
};

namespace detail {

struct NodeState {
    // sensor
    double sample = 0.0;
    double acc_state = 0.0;  // accumulated -A(i,:) x terms (incl. own diagonal)
    double acc_input = 0.0;  // accumulated -B(i,:) u terms
    double delta = 0.0;
    Eigen::VectorXd partials;  // per-actuator partial sums (conservative)
    // actuator
    Eigen::VectorXd delta_in;
    Eigen::VectorXd partials_in;
    double u_next = 0.0;
    double u = 0.0;
    // central / keeper
    Eigen::VectorXd xc, hold_state, hold_input, uc, xhat, kdelta;
    // shared delta history (central: nx-wide; actuator: nx-wide; sensor: scalar)
    DeltaRing ring{0, 0};
};

}  // namespace detail

[[nodiscard]] inline SimTrace simulate(const ArchitectureGraph& g, const LtiSystem& plant,
                                       const std::vector<Eigen::VectorXd>& d_x, int horizon,
                                       const SimOptions& opts = {}) {
    if (horizon < 1) throw DimensionError("simulate: horizon must be >= 1");
    if (plant.nx() != g.nx || plant.nu() != g.nu)
        throw DimensionError("simulate: plant dimensions do not match the architecture");
    for (const auto& d : d_x)
        if (d.size() != g.nx)
            throw DimensionError("simulate: disturbance entries must have plant dimension");
    for (const FailureEvent& f : opts.failures) {
        (void)g.node_index(f.node);  // throws on unknown id
        if (f.t < 0) throw SpecError("simulate: failure time must be >= 0");
    }
    for (const LinkInjection& inj : opts.injections) {
        if (inj.link < 0 || inj.link >= static_cast<int>(g.links.size()))
            throw SpecError("simulate: injection references unknown link");
        for (const auto& p : inj.payloads)
            if (p.size() != g.links[static_cast<size_t>(inj.link)].dim_dense)
                throw SpecError("simulate: injection payload width mismatch");
    }

    const Eigen::Index nx = g.nx;
    const Eigen::Index nu = g.nu;
    const int T = g.T;

    std::vector<int> sensors, actuators;
    int central = -1, keeper = -1;
    for (int n = 0; n < static_cast<int>(g.nodes.size()); ++n) {
        switch (g.nodes[n].kind) {
            case NodeKind::Sensor: sensors.push_back(n); break;
            case NodeKind::Actuator: actuators.push_back(n); break;
            case NodeKind::Central: central = n; break;
            case NodeKind::StateKeeper: keeper = n; break;
        }
    }

    std::vector<detail::NodeState> st(g.nodes.size());
    for (int n : actuators) {
        st[static_cast<size_t>(n)].ring = detail::DeltaRing(T, nx);
        st[static_cast<size_t>(n)].delta_in = Eigen::VectorXd::Zero(nx);
        st[static_cast<size_t>(n)].partials_in = Eigen::VectorXd::Zero(nx);
    }
    if (g.kind == ArchKind::MemoryConservative)
        for (int n : sensors) {
            st[static_cast<size_t>(n)].ring = detail::DeltaRing(T, 1);
            st[static_cast<size_t>(n)].partials = Eigen::VectorXd::Zero(nu);
        }
    if (central >= 0) {
        auto& c = st[static_cast<size_t>(central)];
        c.xc = Eigen::VectorXd::Zero(nx);
        c.hold_state = Eigen::VectorXd::Zero(nx);
        c.hold_input = Eigen::VectorXd::Zero(nx);
        c.uc = Eigen::VectorXd::Zero(nu);
        c.xhat = Eigen::VectorXd::Zero(nx);
        c.ring = detail::DeltaRing(T, nx);
    }
    if (keeper >= 0) st[static_cast<size_t>(keeper)].kdelta = Eigen::VectorXd::Zero(nx);

    // Per-link send phase routing comes from the channel tag; staged payloads commit at
    // each phase barrier in link-index order.
    std::vector<std::optional<Eigen::VectorXd>> staged(g.links.size());

    SimTrace trace;
    trace.failures = opts.failures;
    trace.x.reserve(static_cast<size_t>(horizon));
    trace.u.reserve(static_cast<size_t>(horizon));
    trace.delta.reserve(static_cast<size_t>(horizon));
    if (opts.log_links) trace.link_payloads.resize(static_cast<size_t>(horizon));
    if (!is_schur_stable(plant.A))
        trace.notes.push_back("plant is not Schur stable; open-loop modes do not decay");

    auto failed_at = [&](int node, int t) {
        for (const FailureEvent& f : opts.failures)
            if (t >= f.t && g.nodes[static_cast<size_t>(node)].id == f.node) return true;
        return false;
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);

    for (int t = 0; t < horizon; ++t) {
        if (opts.log_links) trace.link_payloads[static_cast<size_t>(t)].resize(g.links.size());
        // Plant advance: x[0] = d[0]; x[t] = A x[t-1] + B u[t-1] + d[t].
        Eigen::VectorXd dist = t < static_cast<int>(d_x.size())
                                   ? d_x[static_cast<size_t>(t)]
                                   : Eigen::VectorXd::Zero(nx).eval();
        if (t == 0) {
            x = dist;
        } else {
            Eigen::VectorXd u_prev(nu);
            for (Eigen::Index k = 0; k < nu; ++k)
                u_prev(k) = st[static_cast<size_t>(actuators[static_cast<size_t>(k)])].u;
            x = plant.A * x + plant.B * u_prev + dist;
        }

        auto stage = [&](int node, int link, const Eigen::VectorXd& payload) {
            if (!g.links[static_cast<size_t>(link)].live()) return;
            staged[static_cast<size_t>(link)] =
                failed_at(node, t) ? Eigen::VectorXd::Zero(payload.size()).eval() : payload;
        };

        auto deliver_all = [&] {
            for (int l = 0; l < static_cast<int>(g.links.size()); ++l) {
                auto& slot = staged[static_cast<size_t>(l)];
                if (!slot) continue;
                Eigen::VectorXd payload = std::move(*slot);
                slot.reset();
                for (const LinkInjection& inj : opts.injections) {
                    if (inj.link != l) continue;
                    const int i = t - inj.t_start;
                    if (i >= 0 && i < static_cast<int>(inj.payloads.size()))
                        payload += inj.payloads[static_cast<size_t>(i)];
                }
                if (opts.log_links)
                    trace.link_payloads[static_cast<size_t>(t)][static_cast<size_t>(l)] =
                        payload;
                const Link& lk = g.links[static_cast<size_t>(l)];
                if (failed_at(lk.dst, t)) continue;  // silent nodes ignore inputs
                auto& dst = st[static_cast<size_t>(lk.dst)];
                const Eigen::Index src_ix = g.nodes[static_cast<size_t>(lk.src)].index;
                switch (lk.channel) {
                    case Channel::StateSample: dst.xc(src_ix) = payload(0); break;
                    case Channel::ControlDispatch: dst.u_next = payload(0); break;
                    case Channel::StateProduct: dst.acc_state += payload(0); break;
                    case Channel::InputProduct: dst.acc_input += payload(0); break;
                    case Channel::DeltaForward: dst.kdelta(src_ix) = payload(0); break;
                    case Channel::DeltaBroadcast: dst.delta_in = payload; break;
                    case Channel::DeltaDirect: dst.delta_in(src_ix) = payload(0); break;
                    case Channel::PartialSum: dst.partials_in(src_ix) = payload(0); break;
                }
            }
        };

        for (PhaseKind phase : g.schedule) {
            switch (phase) {
                case PhaseKind::Sense:
                    for (int n : sensors) {
                        auto& s = st[static_cast<size_t>(n)];
                        s.sample = failed_at(n, t)
                                       ? 0.0
                                       : x(g.nodes[static_cast<size_t>(n)].index);
                    }
                    break;

                case PhaseKind::SendStateToCentral:
                    for (int li = 0; li < static_cast<int>(g.links.size()); ++li)
                        if (g.links[static_cast<size_t>(li)].channel == Channel::StateSample) {
                            const int src = g.links[static_cast<size_t>(li)].src;
                            stage(src, li,
                                  Eigen::VectorXd::Constant(
                                      1, st[static_cast<size_t>(src)].sample));
                        }
                    break;

                case PhaseKind::CentralDelta: {
                    auto& c = st[static_cast<size_t>(central)];
                    Eigen::VectorXd delta =
                        failed_at(central, t)
                            ? Eigen::VectorXd::Zero(nx).eval()
                            : Eigen::VectorXd(c.xc + c.hold_state + c.hold_input);
                    c.ring.push(delta);
                    break;
                }

                case PhaseKind::CentralDeltaStd: {
                    auto& c = st[static_cast<size_t>(central)];
                    Eigen::VectorXd delta = failed_at(central, t)
                                                ? Eigen::VectorXd::Zero(nx).eval()
                                                : Eigen::VectorXd(c.xc - c.xhat);
                    c.ring.push(delta);
                    break;
                }

                case PhaseKind::CentralConvolve: {
                    auto& c = st[static_cast<size_t>(central)];
                    c.uc.setZero();
                    if (!failed_at(central, t))
                        for (int tau = 1; tau <= T; ++tau)
                            c.uc += g.phi_u[static_cast<size_t>(tau - 1)] * c.ring.at_tau(tau);
                    break;
                }

                case PhaseKind::CentralModelUpdate: {
                    auto& c = st[static_cast<size_t>(central)];
                    c.xhat.setZero();
                    if (!failed_at(central, t))
                        for (int tau = 2; tau <= T; ++tau)
                            c.xhat +=
                                g.phi_x[static_cast<size_t>(tau - 1)] * c.ring.at_tau(tau - 1);
                    break;
                }

                case PhaseKind::CentralProducts: {
                    auto& c = st[static_cast<size_t>(central)];
                    if (failed_at(central, t)) {
                        c.hold_state.setZero();
                        c.hold_input.setZero();
                    } else {
                        c.hold_state = -(g.A * c.xc);
                        c.hold_input = -(g.B * c.uc);
                    }
                    break;
                }

                case PhaseKind::DispatchControl:
                    for (int li = 0; li < static_cast<int>(g.links.size()); ++li) {
                        const Link& lk = g.links[static_cast<size_t>(li)];
                        if (lk.channel != Channel::ControlDispatch) continue;
                        const Eigen::Index k = g.nodes[static_cast<size_t>(lk.dst)].index;
                        stage(lk.src, li,
                              Eigen::VectorXd::Constant(
                                  1, st[static_cast<size_t>(lk.src)].uc(k)));
                    }
                    break;

                case PhaseKind::SensorDelta:
                    for (int n : sensors) {
                        auto& s = st[static_cast<size_t>(n)];
                        s.delta = failed_at(n, t) ? 0.0 : s.sample + s.acc_state + s.acc_input;
                        s.acc_state = 0.0;
                        s.acc_input = 0.0;
                        if (g.kind == ArchKind::MemoryConservative)
                            s.ring.push(Eigen::VectorXd::Constant(1, s.delta));
                    }
                    break;

                case PhaseKind::SendDeltaToKeeper:
                case PhaseKind::SendDeltaToActuators:
                    for (int li = 0; li < static_cast<int>(g.links.size()); ++li) {
                        const Channel ch = g.links[static_cast<size_t>(li)].channel;
                        if (ch != Channel::DeltaForward && ch != Channel::DeltaDirect) continue;
                        const int src = g.links[static_cast<size_t>(li)].src;
                        stage(src, li,
                              Eigen::VectorXd::Constant(1, st[static_cast<size_t>(src)].delta));
                    }
                    break;

                case PhaseKind::KeeperBroadcast: {
                    auto& kp = st[static_cast<size_t>(keeper)];
                    if (failed_at(keeper, t)) kp.kdelta.setZero();
                    for (int li = 0; li < static_cast<int>(g.links.size()); ++li)
                        if (g.links[static_cast<size_t>(li)].channel == Channel::DeltaBroadcast)
                            stage(keeper, li, kp.kdelta);
                    break;
                }

                case PhaseKind::ActuatorAssemble:
                    for (int n : actuators) {
                        auto& a = st[static_cast<size_t>(n)];
                        if (failed_at(n, t)) a.delta_in.setZero();
                        a.ring.push(a.delta_in);
                        a.delta_in.setZero();  // zero-fill baseline for pruned links
                    }
                    break;

                case PhaseKind::ActuatorConvolve:
                    for (int n : actuators) {
                        auto& a = st[static_cast<size_t>(n)];
                        const Eigen::Index k = g.nodes[static_cast<size_t>(n)].index;
                        a.u_next = 0.0;
                        if (!failed_at(n, t))
                            for (int tau = 1; tau <= T; ++tau)
                                a.u_next += g.phi_u[static_cast<size_t>(tau - 1)].row(k).dot(
                                    a.ring.at_tau(tau));
                    }
                    break;

                case PhaseKind::SensorConvolve:
                    for (int n : sensors) {
                        auto& s = st[static_cast<size_t>(n)];
                        const Eigen::Index i = g.nodes[static_cast<size_t>(n)].index;
                        s.partials.setZero();
                        if (!failed_at(n, t))
                            for (int tau = 1; tau <= T; ++tau)
                                s.partials += g.phi_u[static_cast<size_t>(tau - 1)].col(i) *
                                              s.ring.at_tau(tau)(0);
                    }
                    break;

                case PhaseKind::SendPartials:
                    for (int li = 0; li < static_cast<int>(g.links.size()); ++li) {
                        const Link& lk = g.links[static_cast<size_t>(li)];
                        if (lk.channel != Channel::PartialSum) continue;
                        const Eigen::Index k = g.nodes[static_cast<size_t>(lk.dst)].index;
                        stage(lk.src, li,
                              Eigen::VectorXd::Constant(
                                  1, st[static_cast<size_t>(lk.src)].partials(k)));
                    }
                    break;

                case PhaseKind::ActuatorSumPartials:
                    for (int n : actuators) {
                        auto& a = st[static_cast<size_t>(n)];
                        a.u_next = failed_at(n, t) ? 0.0 : a.partials_in.sum();
                        a.partials_in.setZero();  // zero-fill baseline for pruned links
                    }
                    break;

                case PhaseKind::Latch:
                    for (int n : actuators) {
                        auto& a = st[static_cast<size_t>(n)];
                        a.u = failed_at(n, t) ? 0.0 : a.u_next;
                    }
                    break;

                case PhaseKind::SensorStateProducts:
                    for (int n : sensors) {
                        auto& s = st[static_cast<size_t>(n)];
                        const Eigen::Index i = g.nodes[static_cast<size_t>(n)].index;
                        const double own =
                            failed_at(n, t) ? 0.0 : -g.A(i, i) * s.sample;
                        if (!failed_at(n, t)) s.acc_state += own;
                    }
                    for (int li = 0; li < static_cast<int>(g.links.size()); ++li) {
                        const Link& lk = g.links[static_cast<size_t>(li)];
                        if (lk.channel != Channel::StateProduct) continue;
                        const Eigen::Index i = g.nodes[static_cast<size_t>(lk.src)].index;
                        const Eigen::Index j = g.nodes[static_cast<size_t>(lk.dst)].index;
                        stage(lk.src, li,
                              Eigen::VectorXd::Constant(
                                  1, -g.A(j, i) * st[static_cast<size_t>(lk.src)].sample));
                    }
                    break;

                case PhaseKind::ActuatorInputProducts:
                    for (int li = 0; li < static_cast<int>(g.links.size()); ++li) {
                        const Link& lk = g.links[static_cast<size_t>(li)];
                        if (lk.channel != Channel::InputProduct) continue;
                        const Eigen::Index k = g.nodes[static_cast<size_t>(lk.src)].index;
                        const Eigen::Index i = g.nodes[static_cast<size_t>(lk.dst)].index;
                        stage(lk.src, li,
                              Eigen::VectorXd::Constant(
                                  1, -g.B(i, k) * st[static_cast<size_t>(lk.src)].u));
                    }
                    break;
            }
            deliver_all();
        }

        Eigen::VectorXd u_now(nu);
        for (Eigen::Index k = 0; k < nu; ++k)
            u_now(k) = st[static_cast<size_t>(actuators[static_cast<size_t>(k)])].u;

        Eigen::VectorXd delta_log(nx);
        switch (g.kind) {
            case ArchKind::Centralized:
            case ArchKind::OriginalCentralized:
                delta_log = st[static_cast<size_t>(central)].ring.newest();
                break;
            case ArchKind::GlobalState:
                delta_log = st[static_cast<size_t>(keeper)].kdelta;
                break;
            case ArchKind::NaiveDistributed:
            case ArchKind::MemoryConservative:
                for (Eigen::Index i = 0; i < nx; ++i)
                    delta_log(i) =
                        st[static_cast<size_t>(sensors[static_cast<size_t>(i)])].delta;
                break;
        }

        trace.x.push_back(x);
        trace.u.push_back(u_now);
        trace.delta.push_back(delta_log);
    }
    return trace;
}

[[nodiscard]] inline SimTrace simulate(const ArchitectureGraph& g, const LtiSystem& plant,
                                       const std::vector<Eigen::VectorXd>& d_x, int horizon,
                                       const std::vector<FailureEvent>& failures) {
    SimOptions opts;
    opts.failures = failures;
    return simulate(g, plant, d_x, horizon, opts);
}

// Extracts the payloads a node emitted on its outgoing links from step t_start onward, as
// injections. Replaying them on a silenced copy of the node reproduces, by superposition,
// exactly the contribution the node made to the reference run.
[[nodiscard]] inline std::vector<LinkInjection> outgoing_payload_injections(
    const ArchitectureGraph& g, const SimTrace& ref, const std::string& node, int t_start) {
    if (ref.link_payloads.size() != ref.x.size())
        throw SpecError("outgoing_payload_injections: reference trace lacks link logs");
    const int n = g.node_index(node);
    std::vector<LinkInjection> out;
    for (int l = 0; l < static_cast<int>(g.links.size()); ++l) {
        if (g.links[static_cast<size_t>(l)].src != n ||
            !g.links[static_cast<size_t>(l)].live())
            continue;
        LinkInjection inj;
        inj.link = l;
        inj.t_start = t_start;
        for (size_t t = static_cast<size_t>(t_start); t < ref.link_payloads.size(); ++t) {
            const auto& p = ref.link_payloads[t][static_cast<size_t>(l)];
            inj.payloads.push_back(
                p.size() > 0
                    ? p
                    : Eigen::VectorXd::Zero(g.links[static_cast<size_t>(l)].dim_dense).eval());
        }
        out.push_back(std::move(inj));
    }
    return out;
}

// ============================================================================
// Reference comparison
// ============================================================================

struct DeviationReport {
    double max_x_dev = 0.0;
    double max_u_dev = 0.0;

    [[nodiscard]] double max_dev() const { return std::max(max_x_dev, max_u_dev); }
};

// Runs the architecture and the monolithic simplified-realization reference on the same
// plant and disturbance, and reports the worst elementwise trace deviation. The reference
// computes delta against the architecture's internal model (g.A, g.B), so a mismatched
// plant perturbs both runs identically.
[[nodiscard]] inline DeviationReport compare_to_reference(const ArchitectureGraph& g,
                                                          const LtiSystem& plant,
                                                          const SystemResponse& resp,
                                                          const std::vector<Eigen::VectorXd>& d_x,
                                                          int horizon) {
    const LtiSystem model(g.A, g.B);
    resp.validate(model.nx(), model.nu());
    if (resp.T != g.T) throw DimensionError("compare_to_reference: response horizon mismatch");
    SimplifiedRealization ref_ctrl(model, resp.phi_u);
    const SimTrace ref = run_closed_loop(plant, ref_ctrl, d_x, horizon);
    const SimTrace got = simulate(g, plant, d_x, horizon);
    DeviationReport rep;
    for (int t = 0; t < horizon; ++t) {
        rep.max_x_dev = std::max(
            rep.max_x_dev, (got.x[static_cast<size_t>(t)] - ref.x[static_cast<size_t>(t)])
                               .cwiseAbs()
                               .maxCoeff());
        rep.max_u_dev = std::max(
            rep.max_u_dev, (got.u[static_cast<size_t>(t)] - ref.u[static_cast<size_t>(t)])
                               .cwiseAbs()
                               .maxCoeff());
    }
    return rep;
}

// Convenience overload taking the response from the graph's bound spectral taps.
[[nodiscard]] inline DeviationReport compare_to_reference(const ArchitectureGraph& g,
                                                          const LtiSystem& plant,
                                                          const std::vector<Eigen::VectorXd>& d_x,
                                                          int horizon) {
    const LtiSystem model(g.A, g.B);
    SystemResponse resp;
    resp.T = g.T;
    resp.phi_u = g.phi_u;
    resp.phi_x = g.phi_x.empty() ? phi_x_from_phi_u(model, g.phi_u, g.T).phi_x : g.phi_x;
    return compare_to_reference(g, plant, resp, d_x, horizon);
}

// ============================================================================
// Closed-loop transfer grid
// ============================================================================

// Impulse-response tails of the nine disturbance-to-signal maps of the simplified
// controller implementation in closed loop: inputs (state disturbance, actuation
// disturbance, reconstruction disturbance) x outputs (x, u, delta). Internal stability
// requires every entry to decay; eight entries are finite impulse responses by
// construction, while the state response to reconstruction noise decays like the open-loop
// state matrix. tail[r][c] is the worst |entry| over the final `tail_window` steps across
// all unit-impulse directions.
struct InternalStabilityReport {
    int horizon = 0;
    int tail_window = 10;
    double tail[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    [[nodiscard]] double max_tail() const {
        double m = 0;
        for (const auto& row : tail)
            for (double v : row) m = std::max(m, v);
        return m;
    }

    [[nodiscard]] bool passes(double tol) const { return max_tail() < tol; }
};

[[nodiscard]] inline InternalStabilityReport internal_stability_report(
    const LtiSystem& sys, const std::vector<Eigen::MatrixXd>& phi_u, int horizon,
    int tail_window = 10) {
    detail::check_phi_u(sys, phi_u);
    if (horizon < tail_window)
        throw DimensionError("internal_stability_report: horizon too short");
    InternalStabilityReport rep;
    rep.horizon = horizon;
    rep.tail_window = tail_window;

    const Eigen::Index nx = sys.nx();
    const Eigen::Index nu = sys.nu();

    // port 0: state disturbance (nx directions); port 1: actuation disturbance (nu);
    // port 2: reconstruction disturbance (nx).
    for (int port = 0; port < 3; ++port) {
        const Eigen::Index dirs = port == 1 ? nu : nx;
        for (Eigen::Index d = 0; d < dirs; ++d) {
            SimplifiedHarness h(sys, phi_u);
            Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);
            Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(nu);
            for (int t = 0; t < horizon; ++t) {
                Eigen::VectorXd dx = Eigen::VectorXd::Zero(nx);
                Eigen::VectorXd du = Eigen::VectorXd::Zero(nu);
                Eigen::VectorXd dd = Eigen::VectorXd::Zero(nx);
                if (t == 0) {
                    if (port == 0) dx(d) = 1.0;
                    if (port == 1) du(d) = 1.0;
                    if (port == 2) dd(d) = 1.0;
                }
                x = t == 0 ? dx : Eigen::VectorXd(sys.A * x + sys.B * u_prev + dx);
                const auto out = h.step(x, du, dd);
                u_prev = out.u;
                if (t >= horizon - tail_window) {
                    rep.tail[0][port] = std::max(rep.tail[0][port], x.cwiseAbs().maxCoeff());
                    rep.tail[1][port] =
                        std::max(rep.tail[1][port], out.u.cwiseAbs().maxCoeff());
                    rep.tail[2][port] =
                        std::max(rep.tail[2][port], out.delta.cwiseAbs().maxCoeff());
                }
            }
        }
    }
    return rep;
}

// ============================================================================
// Kill sweep
// ============================================================================

struct KillVerdict {
    std::string node;
    double residual_control = 0.0;  // max |u| after the post-failure settling window
    bool silences_control = false;
};

struct SpofReport {
    std::vector<KillVerdict> verdicts;  // controller-infrastructure nodes only
    bool single_point_of_failure = false;
};

// Kills each controller-infrastructure node (central controller or state keeper) under a
// persistent random disturbance and checks whether all control activity dies out. Sensor
// and actuator losses degrade any architecture and are not counted here.
[[nodiscard]] inline SpofReport spof_sweep(const ArchitectureGraph& g, const LtiSystem& plant,
                                           std::uint64_t seed, int horizon = 120) {
    SpofReport rep;
    const int t_fail = horizon / 3;
    std::vector<Eigen::VectorXd> d_x;
    {
        Rng rng(seed);
        for (int t = 0; t < horizon; ++t) d_x.push_back(rng.vector(g.nx));
    }
    for (const Node& n : g.nodes) {
        if (n.kind != NodeKind::Central && n.kind != NodeKind::StateKeeper) continue;
        SimOptions opts;
        opts.failures.push_back({n.id, t_fail, "silent"});
        const SimTrace tr = simulate(g, plant, d_x, horizon, opts);
        KillVerdict v;
        v.node = n.id;
        for (int t = t_fail + g.T; t < horizon; ++t)
            v.residual_control = std::max(
                v.residual_control, tr.u[static_cast<size_t>(t)].cwiseAbs().maxCoeff());
        v.silences_control = v.residual_control < 1e-12;
        rep.single_point_of_failure |= v.silences_control;
        rep.verdicts.push_back(std::move(v));
    }
    return rep;
}

}  // namespace sls
