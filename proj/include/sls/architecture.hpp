#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sls/detail/json.hpp"
#include "sls/errors.hpp"
#include "sls/lti.hpp"
#include "sls/synthesis.hpp"

// Deployment architectures assembled from primitive components: buffers, delay buffers,
// matrix multipliers, adders, disseminators and collectors, placed on sensor, actuator and
// controller nodes and wired by links. Costs are counted two ways: "dense" assumes every
// bound matrix is fully dense (comparable to the closed-form counts), "nnz" counts actual
// nonzero entries and drops zero-weight communications.

namespace sls {

enum class ArchKind {
    Centralized,          // delta computed centrally from x[t] and held -Ax/-Bu terms
    OriginalCentralized,  // reference-model central controller (stores Phi_x taps)
    GlobalState,          // per-sensor delta, relayed through a global state keeper
    NaiveDistributed,     // per-sensor delta, sent directly to actuators
    MemoryConservative,   // per-sensor delta and convolution, per-actuator partial sums
};

[[nodiscard]] inline const char* arch_name(ArchKind k) {
    switch (k) {
        case ArchKind::Centralized: return "centralized";
        case ArchKind::OriginalCentralized: return "original";
        case ArchKind::GlobalState: return "global_state";
        case ArchKind::NaiveDistributed: return "naive";
        case ArchKind::MemoryConservative: return "conservative";
    }
    throw SpecError("arch_name: unknown kind");
}

[[nodiscard]] inline ArchKind arch_from_name(const std::string& s) {
    if (s == "centralized") return ArchKind::Centralized;
    if (s == "original") return ArchKind::OriginalCentralized;
    if (s == "global_state") return ArchKind::GlobalState;
    if (s == "naive") return ArchKind::NaiveDistributed;
    if (s == "conservative") return ArchKind::MemoryConservative;
    throw SpecError("unknown architecture \"" + s +
                    "\" (expected centralized|original|global_state|naive|conservative)");
}

enum class NodeKind { Sensor, Actuator, Central, StateKeeper };

[[nodiscard]] inline const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Sensor: return "sensor";
        case NodeKind::Actuator: return "actuator";
        case NodeKind::Central: return "central";
        case NodeKind::StateKeeper: return "state_keeper";
    }
    throw SpecError("node_kind_name: unknown kind");
}

// ============================================================================
// Matrix references and components
// ============================================================================

// Multipliers do not copy matrices; they reference a slice of the graph's bound data.
struct MatrixRef {
    enum class Source { PlantA, PlantB, PhiU, PhiX };
    enum class Slice { Full, Row, Col };

    Source source = Source::PlantA;
    int tau = 0;  // 1-based spectral index, used by PhiU/PhiX only
    Slice slice = Slice::Full;
    Eigen::Index index = 0;  // row/column number when sliced
    bool negated = false;
};

struct Buffer {
    Eigen::Index dim = 0;
    std::string role;
};
struct DelayBuffer {
    Eigen::Index dim = 0;
    std::string role;
};
struct Multiplier {
    MatrixRef ref;
    std::string role;
};
struct Adder {
    int arity = 0;
    Eigen::Index dim = 0;
    std::string role;
};

// A slice of a node's local signal routed onto one link.
struct Route {
    int link = -1;
    std::vector<Eigen::Index> indices;
};

struct Disseminator {
    Eigen::Index dim = 0;  // local signal width being routed
    std::vector<Route> routes;
    std::string role;
};

// Assembles (or accumulates, when parts share an index) incoming link payloads into a
// local signal of width `dim`.
struct Collector {
    Eigen::Index dim = 0;
    std::vector<Route> parts;
    std::string role;
};

using Component = std::variant<Buffer, DelayBuffer, Multiplier, Adder, Disseminator, Collector>;

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Sensor;
    Eigen::Index index = -1;  // sensor/actuator number; -1 for singleton nodes
    std::vector<Component> components;
};

// What a link carries; the simulator dispatches delivery on this tag.
enum class Channel {
    StateSample,     // sensor -> central: x_i[t]
    ControlDispatch, // central -> actuator: u_k[t]
    StateProduct,    // sensor i -> sensor j: -A(j,i) x_i[t]
    InputProduct,    // actuator k -> sensor i: -B(i,k) u_k[t]
    DeltaForward,    // sensor -> state keeper: delta_i[t]
    DeltaBroadcast,  // state keeper -> actuator: delta[t]
    DeltaDirect,     // sensor -> actuator: delta_i[t]
    PartialSum,      // sensor -> actuator: sum_tau Phi_u[tau](k,i) delta_i[t+1-tau]
};

[[nodiscard]] inline const char* channel_name(Channel c) {
    switch (c) {
        case Channel::StateSample: return "state_sample";
        case Channel::ControlDispatch: return "control_dispatch";
        case Channel::StateProduct: return "state_product";
        case Channel::InputProduct: return "input_product";
        case Channel::DeltaForward: return "delta_forward";
        case Channel::DeltaBroadcast: return "delta_broadcast";
        case Channel::DeltaDirect: return "delta_direct";
        case Channel::PartialSum: return "partial_sum";
    }
    throw SpecError("channel_name: unknown channel");
}

// dim_live == 0 marks a link pruned away in the nnz view; the simulator never sends on it
// and receivers keep the corresponding zero (structural zero-fill).
struct Link {
    int src = -1;
    int dst = -1;
    Channel channel = Channel::StateSample;
    Eigen::Index dim_dense = 0;
    Eigen::Index dim_live = 0;

    [[nodiscard]] bool live() const { return dim_live > 0; }
};

// Execution phases of one synchronous step, in schedule order. Sends stage payloads which
// commit at the phase barrier, so results are independent of intra-phase node ordering.
enum class PhaseKind {
    Sense,
    SendStateToCentral,
    CentralDelta,
    CentralDeltaStd,
    CentralConvolve,
    CentralModelUpdate,
    CentralProducts,
    DispatchControl,
    SensorDelta,
    SendDeltaToKeeper,
    KeeperBroadcast,
    SendDeltaToActuators,
    ActuatorAssemble,
    ActuatorConvolve,
    SensorConvolve,
    SendPartials,
    ActuatorSumPartials,
    Latch,
    SensorStateProducts,
    ActuatorInputProducts,
};

[[nodiscard]] inline const char* phase_name(PhaseKind p) {
    switch (p) {
        case PhaseKind::Sense: return "sense";
        case PhaseKind::SendStateToCentral: return "send_state_to_central";
        case PhaseKind::CentralDelta: return "central_delta";
        case PhaseKind::CentralDeltaStd: return "central_delta_std";
        case PhaseKind::CentralConvolve: return "central_convolve";
        case PhaseKind::CentralModelUpdate: return "central_model_update";
        case PhaseKind::CentralProducts: return "central_products";
        case PhaseKind::DispatchControl: return "dispatch_control";
        case PhaseKind::SensorDelta: return "sensor_delta";
        case PhaseKind::SendDeltaToKeeper: return "send_delta_to_keeper";
        case PhaseKind::KeeperBroadcast: return "keeper_broadcast";
        case PhaseKind::SendDeltaToActuators: return "send_delta_to_actuators";
        case PhaseKind::ActuatorAssemble: return "actuator_assemble";
        case PhaseKind::ActuatorConvolve: return "actuator_convolve";
        case PhaseKind::SensorConvolve: return "sensor_convolve";
        case PhaseKind::SendPartials: return "send_partials";
        case PhaseKind::ActuatorSumPartials: return "actuator_sum_partials";
        case PhaseKind::Latch: return "latch";
        case PhaseKind::SensorStateProducts: return "sensor_state_products";
        case PhaseKind::ActuatorInputProducts: return "actuator_input_products";
    }
    throw SpecError("phase_name: unknown phase");
}

struct ArchitectureGraph {
    ArchKind kind = ArchKind::Centralized;
    Eigen::Index nx = 0;
    Eigen::Index nu = 0;
    int T = 0;
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    std::vector<Eigen::MatrixXd> phi_u;
    std::vector<Eigen::MatrixXd> phi_x;  // bound only where the architecture stores it
    std::vector<Node> nodes;
    std::vector<Link> links;
    std::vector<PhaseKind> schedule;

    [[nodiscard]] int node_index(const std::string& id) const {
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
            if (nodes[i].id == id) return i;
        throw SpecError("unknown node id \"" + id + "\"");
    }
};

// Resolves a multiplier's matrix reference against the graph's bound matrices.
// Throws SpecError on a dangling reference (missing spectral block, bad slice index).
[[nodiscard]] inline Eigen::MatrixXd resolve(const ArchitectureGraph& g, const MatrixRef& ref) {
    Eigen::MatrixXd full;
    switch (ref.source) {
        case MatrixRef::Source::PlantA: full = g.A; break;
        case MatrixRef::Source::PlantB: full = g.B; break;
        case MatrixRef::Source::PhiU:
            if (ref.tau < 1 || ref.tau > static_cast<int>(g.phi_u.size()))
                throw SpecError("dangling matrix reference: phi_u tau " +
                                std::to_string(ref.tau));
            full = g.phi_u[ref.tau - 1];
            break;
        case MatrixRef::Source::PhiX:
            if (ref.tau < 1 || ref.tau > static_cast<int>(g.phi_x.size()))
                throw SpecError("dangling matrix reference: phi_x tau " +
                                std::to_string(ref.tau));
            full = g.phi_x[ref.tau - 1];
            break;
    }
    Eigen::MatrixXd out;
    switch (ref.slice) {
        case MatrixRef::Slice::Full: out = full; break;
        case MatrixRef::Slice::Row:
            if (ref.index < 0 || ref.index >= full.rows())
                throw SpecError("dangling matrix reference: row " + std::to_string(ref.index));
            out = full.row(ref.index);
            break;
        case MatrixRef::Slice::Col:
            if (ref.index < 0 || ref.index >= full.cols())
                throw SpecError("dangling matrix reference: col " + std::to_string(ref.index));
            out = full.col(ref.index);
            break;
    }
    return ref.negated ? Eigen::MatrixXd(-out) : out;
}

// Structural sanity: link endpoints exist, routes/parts point at real links owned by the
// right node with in-range indices, and every collector output index is fed by >= 1 part.
inline void validate_graph(const ArchitectureGraph& g) {
    const int n_nodes = static_cast<int>(g.nodes.size());
    const int n_links = static_cast<int>(g.links.size());
    for (const Link& l : g.links) {
        if (l.src < 0 || l.src >= n_nodes || l.dst < 0 || l.dst >= n_nodes)
            throw SpecError("validate_graph: link endpoint out of range");
        if (l.dim_live > l.dim_dense || l.dim_dense < 1)
            throw SpecError("validate_graph: bad link dims");
    }
    for (int n = 0; n < n_nodes; ++n) {
        for (const Component& c : g.nodes[n].components) {
            if (const auto* d = std::get_if<Disseminator>(&c)) {
                for (const Route& r : d->routes) {
                    if (r.link < 0 || r.link >= n_links)
                        throw SpecError("validate_graph: disseminator routes unknown link");
                    if (g.links[r.link].src != n)
                        throw SpecError("validate_graph: disseminator routes a foreign link");
                    for (auto ix : r.indices)
                        if (ix < 0 || ix >= d->dim)
                            throw SpecError("validate_graph: disseminator index out of range");
                }
            } else if (const auto* col = std::get_if<Collector>(&c)) {
                std::vector<int> hits(static_cast<size_t>(col->dim), 0);
                for (const Route& r : col->parts) {
                    if (r.link < 0 || r.link >= n_links)
                        throw SpecError("validate_graph: collector references unknown link");
                    if (g.links[r.link].dst != n)
                        throw SpecError("validate_graph: collector references a foreign link");
                    for (auto ix : r.indices) {
                        if (ix < 0 || ix >= col->dim)
                            throw SpecError("validate_graph: collector index out of range");
                        ++hits[static_cast<size_t>(ix)];
                    }
                }
                for (int h : hits)
                    if (h != 1)
                        throw SpecError(
                            "validate_graph: collector output must be covered exactly once");
            } else if (const auto* m = std::get_if<Multiplier>(&c)) {
                (void)resolve(g, m->ref);  // throws on dangling references
            }
        }
    }
}

// ============================================================================
// Builders
// ============================================================================

namespace detail {

inline void bind_common(ArchitectureGraph& g, ArchKind kind, const LtiSystem& sys,
                        const SystemResponse& resp, bool bind_phi_x) {
    resp.validate(sys.nx(), sys.nu());
    g.kind = kind;
    g.nx = sys.nx();
    g.nu = sys.nu();
    g.T = resp.T;
    g.A = sys.A;
    g.B = sys.B;
    g.phi_u = resp.phi_u;
    if (bind_phi_x) g.phi_x = resp.phi_x;
}

// True when the (k, i) fiber Phi_u[tau](k, i), tau = 1..T, is not identically zero.
inline bool phi_u_fiber_nonzero(const std::vector<Eigen::MatrixXd>& phi_u, Eigen::Index k,
                                Eigen::Index i) {
    for (const auto& m : phi_u)
        if (m(k, i) != 0.0) return true;
    return false;
}

inline std::vector<Eigen::Index> iota_indices(Eigen::Index n) {
    std::vector<Eigen::Index> v(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
    return v;
}

// Sensor-to-sensor -A(j,i) x_i links and actuator-to-sensor -B(i,k) u_k links shared by
// the global-state and both distributed builders. Sensors use their own diagonal term
// locally, so no self-link exists. Returns per-sensor routes for the two disseminators.
struct NeighborLinks {
    std::vector<std::vector<Route>> state_routes;  // per sensor i
    std::vector<std::vector<Route>> input_routes;  // per actuator k
};

inline NeighborLinks add_neighbor_links(ArchitectureGraph& g) {
    NeighborLinks out;
    out.state_routes.resize(static_cast<size_t>(g.nx));
    out.input_routes.resize(static_cast<size_t>(g.nu));
    for (Eigen::Index i = 0; i < g.nx; ++i)
        for (Eigen::Index j = 0; j < g.nx; ++j) {
            if (j == i) continue;
            const bool live = g.A(j, i) != 0.0;
            g.links.push_back({static_cast<int>(i), static_cast<int>(j),
                               Channel::StateProduct, 1, live ? 1 : 0});
            out.state_routes[static_cast<size_t>(i)].push_back(
                {static_cast<int>(g.links.size()) - 1, {j}});
        }
    for (Eigen::Index k = 0; k < g.nu; ++k)
        for (Eigen::Index i = 0; i < g.nx; ++i) {
            const bool live = g.B(i, k) != 0.0;
            g.links.push_back({static_cast<int>(g.nx + k), static_cast<int>(i),
                               Channel::InputProduct, 1, live ? 1 : 0});
            out.input_routes[static_cast<size_t>(k)].push_back(
                {static_cast<int>(g.links.size()) - 1, {i}});
        }
    return out;
}

}  // namespace detail

// Central node computes delta[t] = x[t] - A x[t-1] - B u[t-1] from held products and runs
// the full input convolution. Buffer placement: each sensor holds its sample x_i[t], each
// actuator its latched u_k[t]; the controller holds the two product terms (-Ax, -Bu) and
// the T-deep delta history, so total storage is
//   Nx^2 + Nx Nu  (multiplier entries for A and B)
// + T Nx Nu       (convolution taps)
// + 2 Nx          (product holds)
// + (T+1) Nx + Nu (delta history + state samples + latched inputs).
[[nodiscard]] inline ArchitectureGraph build_centralized(const LtiSystem& sys,
                                                         const SystemResponse& resp) {
    ArchitectureGraph g;
    detail::bind_common(g, ArchKind::Centralized, sys, resp, /*bind_phi_x=*/false);
    const int ctrl = static_cast<int>(g.nx + g.nu);

    for (Eigen::Index i = 0; i < g.nx; ++i)
        g.nodes.push_back({"s" + std::to_string(i), NodeKind::Sensor, i, {}});
    for (Eigen::Index k = 0; k < g.nu; ++k)
        g.nodes.push_back({"a" + std::to_string(k), NodeKind::Actuator, k, {}});
    g.nodes.push_back({"ctrl", NodeKind::Central, -1, {}});

    std::vector<Route> up_parts, down_routes;
    for (Eigen::Index i = 0; i < g.nx; ++i) {
        g.links.push_back({static_cast<int>(i), ctrl, Channel::StateSample, 1, 1});
        up_parts.push_back({static_cast<int>(g.links.size()) - 1, {i}});
    }
    for (Eigen::Index k = 0; k < g.nu; ++k) {
        g.links.push_back({ctrl, static_cast<int>(g.nx + k), Channel::ControlDispatch, 1, 1});
        down_routes.push_back({static_cast<int>(g.links.size()) - 1, {k}});
    }

    for (Eigen::Index i = 0; i < g.nx; ++i)
        g.nodes[static_cast<size_t>(i)].components = {
            Buffer{1, "state sample"},
            Disseminator{1, {{up_parts[static_cast<size_t>(i)].link, {0}}}, "state upload"}};
    for (Eigen::Index k = 0; k < g.nu; ++k)
        g.nodes[static_cast<size_t>(g.nx + k)].components = {
            Collector{1, {{down_routes[static_cast<size_t>(k)].link, {0}}}, "control in"},
            Buffer{1, "control latch"}};

    auto& cc = g.nodes[static_cast<size_t>(ctrl)].components;
    cc.push_back(Collector{g.nx, up_parts, "state assembly"});
    cc.push_back(Multiplier{{MatrixRef::Source::PlantA, 0, MatrixRef::Slice::Full, 0, true},
                            "state-term product"});
    cc.push_back(Multiplier{{MatrixRef::Source::PlantB, 0, MatrixRef::Slice::Full, 0, true},
                            "input-term product"});
    cc.push_back(Buffer{g.nx, "state-term hold"});
    cc.push_back(Buffer{g.nx, "input-term hold"});
    cc.push_back(Adder{3, g.nx, "delta junction"});
    for (int tau = 1; tau <= g.T; ++tau) {
        cc.push_back(DelayBuffer{g.nx, "delta stage " + std::to_string(tau)});
        cc.push_back(Multiplier{{MatrixRef::Source::PhiU, tau, MatrixRef::Slice::Full, 0, false},
                                "control tap " + std::to_string(tau)});
    }
    cc.push_back(Adder{g.T, g.nu, "control sum"});
    cc.push_back(Disseminator{g.nu, down_routes, "control dispatch"});

    g.schedule = {PhaseKind::Sense,           PhaseKind::SendStateToCentral,
                  PhaseKind::CentralDelta,    PhaseKind::CentralConvolve,
                  PhaseKind::DispatchControl, PhaseKind::Latch,
                  PhaseKind::CentralProducts};
    validate_graph(g);
    return g;
}

// Reference-model central controller: delta[t] = x[t] - xhat[t], with the model state
// updated through the stored Phi_x taps (tau >= 2; the newest tap needs no multiplier
// because the first state block is the identity). Storage:
//   (T-1) Nx^2 + T Nx Nu (multiplier entries) + (T+2) Nx + Nu (delta history, x, xhat, u).
[[nodiscard]] inline ArchitectureGraph build_original_centralized(const LtiSystem& sys,
                                                                  const SystemResponse& resp) {
    ArchitectureGraph g;
    detail::bind_common(g, ArchKind::OriginalCentralized, sys, resp, /*bind_phi_x=*/true);
    const int ctrl = static_cast<int>(g.nx + g.nu);

    for (Eigen::Index i = 0; i < g.nx; ++i)
        g.nodes.push_back({"s" + std::to_string(i), NodeKind::Sensor, i, {}});
    for (Eigen::Index k = 0; k < g.nu; ++k)
        g.nodes.push_back({"a" + std::to_string(k), NodeKind::Actuator, k, {}});
    g.nodes.push_back({"ctrl", NodeKind::Central, -1, {}});

    std::vector<Route> up_parts, down_routes;
    for (Eigen::Index i = 0; i < g.nx; ++i) {
        g.links.push_back({static_cast<int>(i), ctrl, Channel::StateSample, 1, 1});
        up_parts.push_back({static_cast<int>(g.links.size()) - 1, {i}});
    }
    for (Eigen::Index k = 0; k < g.nu; ++k) {
        g.links.push_back({ctrl, static_cast<int>(g.nx + k), Channel::ControlDispatch, 1, 1});
        down_routes.push_back({static_cast<int>(g.links.size()) - 1, {k}});
    }

    for (Eigen::Index i = 0; i < g.nx; ++i)
        g.nodes[static_cast<size_t>(i)].components = {
            Buffer{1, "state sample"},
            Disseminator{1, {{up_parts[static_cast<size_t>(i)].link, {0}}}, "state upload"}};
    for (Eigen::Index k = 0; k < g.nu; ++k)
        g.nodes[static_cast<size_t>(g.nx + k)].components = {
            Collector{1, {{down_routes[static_cast<size_t>(k)].link, {0}}}, "control in"},
            Buffer{1, "control latch"}};

    auto& cc = g.nodes[static_cast<size_t>(ctrl)].components;
    cc.push_back(Collector{g.nx, up_parts, "state assembly"});
    cc.push_back(Adder{2, g.nx, "delta junction"});
    for (int tau = 1; tau <= g.T; ++tau) {
        cc.push_back(DelayBuffer{g.nx, "delta stage " + std::to_string(tau)});
        cc.push_back(Multiplier{{MatrixRef::Source::PhiU, tau, MatrixRef::Slice::Full, 0, false},
                                "control tap " + std::to_string(tau)});
    }
    cc.push_back(Adder{g.T, g.nu, "control sum"});
    for (int tau = 2; tau <= g.T; ++tau)
        cc.push_back(Multiplier{{MatrixRef::Source::PhiX, tau, MatrixRef::Slice::Full, 0, false},
                                "model tap " + std::to_string(tau)});
    if (g.T >= 2) cc.push_back(Adder{g.T - 1, g.nx, "model sum"});
    cc.push_back(Buffer{g.nx, "model state"});
    cc.push_back(Disseminator{g.nu, down_routes, "control dispatch"});

    g.schedule = {PhaseKind::Sense,           PhaseKind::SendStateToCentral,
                  PhaseKind::CentralDeltaStd, PhaseKind::CentralConvolve,
                  PhaseKind::CentralModelUpdate, PhaseKind::DispatchControl,
                  PhaseKind::Latch};
    validate_graph(g);
    return g;
}

namespace detail {

// Per-sensor delta machinery shared by global-state and both distributed builders.
// Incoming state/input products accumulate into the two scratch registers on delivery
// (no Collector: the parts are summed, not assembled positionally). Buffer count per
// sensor: sample (1) + products hold (Nx) + two accumulators (2) comes to Nx + 3; the
// naive/global-state variant adds the delta hold (1) for Nx + 4, while the conservative
// variant instead owns a T-deep scalar delta history whose newest stage is delta_i[t].
inline void fill_sensor_common(ArchitectureGraph& g, Eigen::Index i,
                               std::vector<Route> state_routes) {
    auto& comps = g.nodes[static_cast<size_t>(i)].components;
    comps.push_back(Buffer{1, "state sample"});
    comps.push_back(Multiplier{
        {MatrixRef::Source::PlantA, 0, MatrixRef::Slice::Col, i, true}, "state products"});
    comps.push_back(Buffer{g.nx, "state products hold"});
    comps.push_back(Disseminator{g.nx, std::move(state_routes), "state-product exchange"});
    comps.push_back(Buffer{1, "state-term accumulator"});
    comps.push_back(Buffer{1, "input-term accumulator"});
    comps.push_back(Adder{3, 1, "delta junction"});
}

// Actuator that stores the assembled delta history and convolves its own Phi_u row; the
// -B column products feed straight into the exchange wires (no extra hold), keeping the
// actuator at (T+1) Nx + 1 buffered scalars.
inline void fill_convolving_actuator(ArchitectureGraph& g, Eigen::Index k,
                                     std::vector<Route> delta_parts,
                                     std::vector<Route> input_routes) {
    auto& comps = g.nodes[static_cast<size_t>(g.nx + k)].components;
    comps.push_back(Collector{g.nx, std::move(delta_parts), "delta assembly"});
    comps.push_back(Buffer{g.nx, "delta in"});
    for (int tau = 1; tau <= g.T; ++tau) {
        comps.push_back(DelayBuffer{g.nx, "delta stage " + std::to_string(tau)});
        comps.push_back(Multiplier{{MatrixRef::Source::PhiU, tau, MatrixRef::Slice::Row, k, false},
                                   "control tap " + std::to_string(tau)});
    }
    comps.push_back(Adder{g.T, 1, "control sum"});
    comps.push_back(Buffer{1, "control latch"});
    comps.push_back(Multiplier{
        {MatrixRef::Source::PlantB, 0, MatrixRef::Slice::Col, k, true}, "input products"});
    comps.push_back(Disseminator{g.nx, std::move(input_routes), "input-product exchange"});
}

}  // namespace detail

// Per-sensor disturbance reconstruction with a global state keeper relaying the full
// delta vector to every actuator. Adds the keeper's Nx-wide delta hold on top of the
// naive-distributed buffer count.
[[nodiscard]] inline ArchitectureGraph build_global_state(const LtiSystem& sys,
                                                          const SystemResponse& resp) {
    ArchitectureGraph g;
    detail::bind_common(g, ArchKind::GlobalState, sys, resp, /*bind_phi_x=*/false);
    const int gsk = static_cast<int>(g.nx + g.nu);

    for (Eigen::Index i = 0; i < g.nx; ++i)
        g.nodes.push_back({"s" + std::to_string(i), NodeKind::Sensor, i, {}});
    for (Eigen::Index k = 0; k < g.nu; ++k)
        g.nodes.push_back({"a" + std::to_string(k), NodeKind::Actuator, k, {}});
    g.nodes.push_back({"gsk", NodeKind::StateKeeper, -1, {}});

    auto neighbor = detail::add_neighbor_links(g);
    std::vector<Route> keeper_parts;
    for (Eigen::Index i = 0; i < g.nx; ++i) {
        g.links.push_back({static_cast<int>(i), gsk, Channel::DeltaForward, 1, 1});
        keeper_parts.push_back({static_cast<int>(g.links.size()) - 1, {i}});
    }
    std::vector<Route> bcast_routes;
    std::vector<std::vector<Route>> actuator_delta(static_cast<size_t>(g.nu));
    for (Eigen::Index k = 0; k < g.nu; ++k) {
        g.links.push_back(
            {gsk, static_cast<int>(g.nx + k), Channel::DeltaBroadcast, g.nx, g.nx});
        const int l = static_cast<int>(g.links.size()) - 1;
        bcast_routes.push_back({l, detail::iota_indices(g.nx)});
        actuator_delta[static_cast<size_t>(k)].push_back({l, detail::iota_indices(g.nx)});
    }

    for (Eigen::Index i = 0; i < g.nx; ++i) {
        detail::fill_sensor_common(g, i, neighbor.state_routes[static_cast<size_t>(i)]);
        auto& comps = g.nodes[static_cast<size_t>(i)].components;
        comps.push_back(Buffer{1, "delta hold"});
        comps.push_back(Disseminator{
            1, {{keeper_parts[static_cast<size_t>(i)].link, {0}}}, "delta forward"});
    }
    for (Eigen::Index k = 0; k < g.nu; ++k)
        detail::fill_convolving_actuator(g, k, actuator_delta[static_cast<size_t>(k)],
                                         neighbor.input_routes[static_cast<size_t>(k)]);
    auto& kc = g.nodes[static_cast<size_t>(gsk)].components;
    kc.push_back(Collector{g.nx, keeper_parts, "delta assembly"});
    kc.push_back(Buffer{g.nx, "delta hold"});
    kc.push_back(Disseminator{g.nx, bcast_routes, "delta broadcast"});

    g.schedule = {PhaseKind::Sense,           PhaseKind::SensorDelta,
                  PhaseKind::SendDeltaToKeeper, PhaseKind::KeeperBroadcast,
                  PhaseKind::ActuatorAssemble, PhaseKind::ActuatorConvolve,
                  PhaseKind::Latch,           PhaseKind::SensorStateProducts,
                  PhaseKind::ActuatorInputProducts};
    validate_graph(g);
    return g;
}

// Keeper-free variant: each sensor sends delta_i straight to the actuators that use it
// (dense view: all of them; nnz view prunes identically-zero Phi_u fibers).
[[nodiscard]] inline ArchitectureGraph build_naive_distributed(const LtiSystem& sys,
                                                               const SystemResponse& resp) {
    ArchitectureGraph g;
    detail::bind_common(g, ArchKind::NaiveDistributed, sys, resp, /*bind_phi_x=*/false);

    for (Eigen::Index i = 0; i < g.nx; ++i)
        g.nodes.push_back({"s" + std::to_string(i), NodeKind::Sensor, i, {}});
    for (Eigen::Index k = 0; k < g.nu; ++k)
        g.nodes.push_back({"a" + std::to_string(k), NodeKind::Actuator, k, {}});

    auto neighbor = detail::add_neighbor_links(g);
    std::vector<std::vector<Route>> sensor_delta(static_cast<size_t>(g.nx));
    std::vector<std::vector<Route>> actuator_delta(static_cast<size_t>(g.nu));
    for (Eigen::Index i = 0; i < g.nx; ++i)
        for (Eigen::Index k = 0; k < g.nu; ++k) {
            const bool live = detail::phi_u_fiber_nonzero(g.phi_u, k, i);
            g.links.push_back({static_cast<int>(i), static_cast<int>(g.nx + k),
                               Channel::DeltaDirect, 1, live ? 1 : 0});
            const int l = static_cast<int>(g.links.size()) - 1;
            sensor_delta[static_cast<size_t>(i)].push_back({l, {0}});
            actuator_delta[static_cast<size_t>(k)].push_back({l, {i}});
        }

    for (Eigen::Index i = 0; i < g.nx; ++i) {
        detail::fill_sensor_common(g, i, neighbor.state_routes[static_cast<size_t>(i)]);
        auto& comps = g.nodes[static_cast<size_t>(i)].components;
        comps.push_back(Buffer{1, "delta hold"});
        comps.push_back(
            Disseminator{1, sensor_delta[static_cast<size_t>(i)], "delta dispatch"});
    }
    for (Eigen::Index k = 0; k < g.nu; ++k)
        detail::fill_convolving_actuator(g, k, actuator_delta[static_cast<size_t>(k)],
                                         neighbor.input_routes[static_cast<size_t>(k)]);

    g.schedule = {PhaseKind::Sense,           PhaseKind::SensorDelta,
                  PhaseKind::SendDeltaToActuators, PhaseKind::ActuatorAssemble,
                  PhaseKind::ActuatorConvolve, PhaseKind::Latch,
                  PhaseKind::SensorStateProducts, PhaseKind::ActuatorInputProducts};
    validate_graph(g);
    return g;
}

// Moves the convolution to the sensors: each keeps a T-deep scalar history of its own
// delta_i and sends per-actuator partial sums, so actuators only add. Per sensor
// Nx + Nu + T + 3 buffered scalars, per actuator Nx + 1.
[[nodiscard]] inline ArchitectureGraph build_memory_conservative(const LtiSystem& sys,
                                                                 const SystemResponse& resp) {
    ArchitectureGraph g;
    detail::bind_common(g, ArchKind::MemoryConservative, sys, resp, /*bind_phi_x=*/false);

    for (Eigen::Index i = 0; i < g.nx; ++i)
        g.nodes.push_back({"s" + std::to_string(i), NodeKind::Sensor, i, {}});
    for (Eigen::Index k = 0; k < g.nu; ++k)
        g.nodes.push_back({"a" + std::to_string(k), NodeKind::Actuator, k, {}});

    auto neighbor = detail::add_neighbor_links(g);
    std::vector<std::vector<Route>> sensor_partials(static_cast<size_t>(g.nx));
    std::vector<std::vector<Route>> actuator_partials(static_cast<size_t>(g.nu));
    for (Eigen::Index i = 0; i < g.nx; ++i)
        for (Eigen::Index k = 0; k < g.nu; ++k) {
            const bool live = detail::phi_u_fiber_nonzero(g.phi_u, k, i);
            g.links.push_back({static_cast<int>(i), static_cast<int>(g.nx + k),
                               Channel::PartialSum, 1, live ? 1 : 0});
            const int l = static_cast<int>(g.links.size()) - 1;
            sensor_partials[static_cast<size_t>(i)].push_back({l, {k}});
            actuator_partials[static_cast<size_t>(k)].push_back({l, {i}});
        }

    for (Eigen::Index i = 0; i < g.nx; ++i) {
        detail::fill_sensor_common(g, i, neighbor.state_routes[static_cast<size_t>(i)]);
        auto& comps = g.nodes[static_cast<size_t>(i)].components;
        for (int tau = 1; tau <= g.T; ++tau) {
            comps.push_back(DelayBuffer{1, "delta stage " + std::to_string(tau)});
            comps.push_back(Multiplier{
                {MatrixRef::Source::PhiU, tau, MatrixRef::Slice::Col, i, false},
                "partial tap " + std::to_string(tau)});
        }
        comps.push_back(Adder{g.T, g.nu, "partial sums"});
        comps.push_back(Buffer{g.nu, "partials hold"});
        comps.push_back(
            Disseminator{g.nu, sensor_partials[static_cast<size_t>(i)], "partial dispatch"});
    }
    for (Eigen::Index k = 0; k < g.nu; ++k) {
        auto& comps = g.nodes[static_cast<size_t>(g.nx + k)].components;
        comps.push_back(
            Collector{g.nx, actuator_partials[static_cast<size_t>(k)], "partials assembly"});
        comps.push_back(Buffer{g.nx, "partials in"});
        comps.push_back(Adder{static_cast<int>(g.nx), 1, "control sum"});
        comps.push_back(Buffer{1, "control latch"});
        comps.push_back(Multiplier{
            {MatrixRef::Source::PlantB, 0, MatrixRef::Slice::Col, k, true}, "input products"});
        comps.push_back(Disseminator{g.nx, neighbor.input_routes[static_cast<size_t>(k)],
                                     "input-product exchange"});
    }

    g.schedule = {PhaseKind::Sense,           PhaseKind::SensorDelta,
                  PhaseKind::SensorConvolve,  PhaseKind::SendPartials,
                  PhaseKind::ActuatorSumPartials, PhaseKind::Latch,
                  PhaseKind::SensorStateProducts, PhaseKind::ActuatorInputProducts};
    validate_graph(g);
    return g;
}

[[nodiscard]] inline ArchitectureGraph build_architecture(ArchKind kind, const LtiSystem& sys,
                                                          const SystemResponse& resp) {
    switch (kind) {
        case ArchKind::Centralized: return build_centralized(sys, resp);
        case ArchKind::OriginalCentralized: return build_original_centralized(sys, resp);
        case ArchKind::GlobalState: return build_global_state(sys, resp);
        case ArchKind::NaiveDistributed: return build_naive_distributed(sys, resp);
        case ArchKind::MemoryConservative: return build_memory_conservative(sys, resp);
    }
    throw SpecError("build_architecture: unknown kind");
}

// ============================================================================
// Cost accounting
// ============================================================================

struct NodeCost {
    std::string node;
    long long buffers = 0;     // signal/delay storage (width is layout, not sparsity)
    long long taps_dense = 0;  // multiplier entries, every bound entry counted
    long long taps_nnz = 0;    // multiplier entries, actual nonzeros
    long long mults_dense = 0;
    long long mults_nnz = 0;

    [[nodiscard]] long long memory_dense() const { return buffers + taps_dense; }
    [[nodiscard]] long long memory_nnz() const { return buffers + taps_nnz; }
};

struct CostReport {
    std::string architecture;
    std::vector<NodeCost> per_node;
    long long buffers = 0;
    long long taps_dense = 0;
    long long taps_nnz = 0;
    long long mults_dense = 0;
    long long mults_nnz = 0;
    long long comm_dense = 0;
    long long comm_nnz = 0;

    [[nodiscard]] long long memory_dense() const { return buffers + taps_dense; }
    [[nodiscard]] long long memory_nnz() const { return buffers + taps_nnz; }
};

// Static traversal. Memory: buffer and delay-buffer widths plus multiplier entries (the
// nnz view narrows multipliers to actual nonzeros; signal buffers keep their width).
// Multiplications per step: every multiplier fires once per step. Communication: link
// payload widths per step, with the nnz view dropping pruned slots.
[[nodiscard]] inline CostReport cost_report(const ArchitectureGraph& g) {
    CostReport rep;
    rep.architecture = arch_name(g.kind);
    for (const Node& n : g.nodes) {
        NodeCost nc;
        nc.node = n.id;
        for (const Component& c : n.components) {
            if (const auto* b = std::get_if<Buffer>(&c)) {
                nc.buffers += b->dim;
            } else if (const auto* d = std::get_if<DelayBuffer>(&c)) {
                nc.buffers += d->dim;
            } else if (const auto* m = std::get_if<Multiplier>(&c)) {
                const Eigen::MatrixXd mat = resolve(g, m->ref);
                const long long dense = static_cast<long long>(mat.rows()) * mat.cols();
                long long nnz = 0;
                for (Eigen::Index r = 0; r < mat.rows(); ++r)
                    for (Eigen::Index q = 0; q < mat.cols(); ++q)
                        if (mat(r, q) != 0.0) ++nnz;
                nc.taps_dense += dense;
                nc.taps_nnz += nnz;
                nc.mults_dense += dense;
                nc.mults_nnz += nnz;
            }
        }
        rep.buffers += nc.buffers;
        rep.taps_dense += nc.taps_dense;
        rep.taps_nnz += nc.taps_nnz;
        rep.mults_dense += nc.mults_dense;
        rep.mults_nnz += nc.mults_nnz;
        rep.per_node.push_back(std::move(nc));
    }
    for (const Link& l : g.links) {
        rep.comm_dense += l.dim_dense;
        rep.comm_nnz += l.dim_live;
    }
    return rep;
}

inline void to_json(nlohmann::json& j, const NodeCost& nc) {
    j = nlohmann::json{{"node", nc.node},
                       {"buffers", nc.buffers},
                       {"taps_dense", nc.taps_dense},
                       {"taps_nnz", nc.taps_nnz},
                       {"memory_dense", nc.memory_dense()},
                       {"memory_nnz", nc.memory_nnz()},
                       {"mults_dense", nc.mults_dense},
                       {"mults_nnz", nc.mults_nnz}};
}

// Closed-form dense cost expressions for each architecture, against which the component
// inventories are verified entry by entry. All arithmetic is exact in 64-bit integers for
// any realistic dimensions.
struct ClosedFormCosts {
    long long taps = 0;     // multiplier entries (A, B and spectral-tap storage)
    long long buffers = 0;  // signal and delay-buffer scalars
    long long mults = 0;    // multiplications per step
    long long comm = 0;     // scalars communicated per step

    [[nodiscard]] long long memory() const { return taps + buffers; }
};

[[nodiscard]] inline ClosedFormCosts closed_form_costs(ArchKind kind, long long nx,
                                                       long long nu, long long T) {
    ClosedFormCosts c;
    const long long tap_storage = nx * nx + nx * nu + T * nx * nu;  // A, B, Phi_u taps
    switch (kind) {
        case ArchKind::Centralized:
            c.taps = tap_storage;
            c.mults = tap_storage;
            c.buffers = 2 * nx + (T + 1) * nx + nu;
            c.comm = nx + nu;
            break;
        case ArchKind::OriginalCentralized:
            c.taps = (T - 1) * nx * nx + T * nx * nu;
            c.mults = c.taps;
            c.buffers = (T + 2) * nx + nu;
            c.comm = nx + nu;
            break;
        case ArchKind::GlobalState:
            c.taps = tap_storage;
            c.mults = tap_storage;
            c.buffers = ((T + 1) * nx * nu + nx * nx + 4 * nx + nu) + nx;
            c.comm = nx * (nx - 1) + 2 * nx * nu + nx;
            break;
        case ArchKind::NaiveDistributed:
            c.taps = tap_storage;
            c.mults = tap_storage;
            c.buffers = (T + 1) * nx * nu + nx * nx + 4 * nx + nu;
            c.comm = nx * (nx - 1) + 2 * nx * nu;
            break;
        case ArchKind::MemoryConservative:
            c.taps = tap_storage;
            c.mults = tap_storage;
            c.buffers = 2 * nx * nu + nx * nx + (T + 3) * nx + nu;
            c.comm = nx * (nx - 1) + 2 * nx * nu;
            break;
    }
    return c;
}

/// Total buffer scalars saved by the conservative layout relative to the naive one:
// (T-1) nx (nu-1), never negative for nu >= 1.
[[nodiscard]] inline long long conservative_buffer_saving(long long nx, long long nu,
                                                          long long T) {
    return (T - 1) * nx * (nu - 1);
}

// The delta-based central controller needs no more storage than the reference-model one
// exactly when (T-2) nx >= nu + 1; the coarser sufficient condition nx >= max(nu, 2) and
// T > 3 implies it.
[[nodiscard]] inline bool centralized_no_larger_than_original(long long nx, long long nu,
                                                              long long T) {
    return (T - 2) * nx >= nu + 1;
}

inline void to_json(nlohmann::json& j, const CostReport& rep) {
    j = nlohmann::json{{"architecture", rep.architecture},
                       {"per_node", rep.per_node},
                       {"buffers", rep.buffers},
                       {"taps_dense", rep.taps_dense},
                       {"taps_nnz", rep.taps_nnz},
                       {"memory_dense", rep.memory_dense()},
                       {"memory_nnz", rep.memory_nnz()},
                       {"mults_dense", rep.mults_dense},
                       {"mults_nnz", rep.mults_nnz},
                       {"comm_dense", rep.comm_dense},
                       {"comm_nnz", rep.comm_nnz}};
}

// ============================================================================
// Comparison rendering
// ============================================================================

struct ComparisonRow {
    CostReport cost;
    std::optional<bool> single_point_of_failure;  // filled by the kill sweep when run
    std::optional<double> max_deviation;          // vs the monolithic reference
};

namespace detail {

inline std::string pad(std::string s, size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

}  // namespace detail

[[nodiscard]] inline std::string comparison_text(const std::vector<ComparisonRow>& rows) {
    static constexpr const char* kHeads[] = {
        "architecture", "buffers",        "taps (dense/nnz)", "memory (dense/nnz)",
        "mults/step (dense/nnz)", "comm/step (dense/nnz)", "SPOF", "max deviation"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back({kHeads[0], kHeads[1], kHeads[2], kHeads[3], kHeads[4], kHeads[5],
                     kHeads[6], kHeads[7]});
    for (const auto& r : rows) {
        auto pair_str = [](long long a, long long b) {
            return std::to_string(a) + " / " + std::to_string(b);
        };
        std::string spof = r.single_point_of_failure
                               ? (*r.single_point_of_failure ? "yes" : "no")
                               : "-";
        char dev[32] = "-";
        if (r.max_deviation) std::snprintf(dev, sizeof dev, "%.3e", *r.max_deviation);
        cells.push_back({r.cost.architecture, std::to_string(r.cost.buffers),
                         pair_str(r.cost.taps_dense, r.cost.taps_nnz),
                         pair_str(r.cost.memory_dense(), r.cost.memory_nnz()),
                         pair_str(r.cost.mults_dense, r.cost.mults_nnz),
                         pair_str(r.cost.comm_dense, r.cost.comm_nnz), spof, dev});
    }
    std::vector<size_t> widths(cells[0].size(), 0);
    for (const auto& row : cells)
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    std::string out;
    for (size_t r = 0; r < cells.size(); ++r) {
        for (size_t c = 0; c < cells[r].size(); ++c) {
            out += detail::pad(cells[r][c], widths[c]);
            out += c + 1 < cells[r].size() ? "  " : "";
        }
        out += "\n";
        if (r == 0) {
            for (size_t c = 0; c < widths.size(); ++c) {
                out.append(widths[c], '-');
                out += c + 1 < widths.size() ? "  " : "";
            }
            out += "\n";
        }
    }
    return out;
}

[[nodiscard]] inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out =
        "architecture,buffers,taps_dense,taps_nnz,memory_dense,memory_nnz,"
        "mults_dense,mults_nnz,comm_dense,comm_nnz,"
        "single_point_of_failure,max_deviation\n";
    for (const auto& r : rows) {
        out += r.cost.architecture;
        out += ',' + std::to_string(r.cost.buffers);
        out += ',' + std::to_string(r.cost.taps_dense);
        out += ',' + std::to_string(r.cost.taps_nnz);
        out += ',' + std::to_string(r.cost.memory_dense());
        out += ',' + std::to_string(r.cost.memory_nnz());
        out += ',' + std::to_string(r.cost.mults_dense);
        out += ',' + std::to_string(r.cost.mults_nnz);
        out += ',' + std::to_string(r.cost.comm_dense);
        out += ',' + std::to_string(r.cost.comm_nnz);
        out += ',';
        if (r.single_point_of_failure) out += *r.single_point_of_failure ? "yes" : "no";
        out += ',';
        if (r.max_deviation) {
            char dev[32];
            std::snprintf(dev, sizeof dev, "%.12e", *r.max_deviation);
            out += dev;
        }
        out += '\n';
    }
    return out;
}

// ============================================================================
// Graph serialization
// ============================================================================

namespace detail {

inline nlohmann::json component_to_json(const Component& c) {
    nlohmann::json j;
    if (const auto* b = std::get_if<Buffer>(&c)) {
        j = {{"type", "buffer"}, {"dim", b->dim}, {"role", b->role}};
    } else if (const auto* d = std::get_if<DelayBuffer>(&c)) {
        j = {{"type", "delay_buffer"}, {"dim", d->dim}, {"role", d->role}};
    } else if (const auto* m = std::get_if<Multiplier>(&c)) {
        const char* src = nullptr;
        switch (m->ref.source) {
            case MatrixRef::Source::PlantA: src = "A"; break;
            case MatrixRef::Source::PlantB: src = "B"; break;
            case MatrixRef::Source::PhiU: src = "phi_u"; break;
            case MatrixRef::Source::PhiX: src = "phi_x"; break;
        }
        const char* slice = m->ref.slice == MatrixRef::Slice::Full  ? "full"
                            : m->ref.slice == MatrixRef::Slice::Row ? "row"
                                                                    : "col";
        j = {{"type", "multiplier"},
             {"role", m->role},
             {"ref",
              {{"source", src},
               {"tau", m->ref.tau},
               {"slice", slice},
               {"index", m->ref.index},
               {"negated", m->ref.negated}}}};
    } else if (const auto* a = std::get_if<Adder>(&c)) {
        j = {{"type", "adder"}, {"arity", a->arity}, {"dim", a->dim}, {"role", a->role}};
    } else if (const auto* d = std::get_if<Disseminator>(&c)) {
        nlohmann::json routes = nlohmann::json::array();
        for (const Route& r : d->routes)
            routes.push_back({{"link", r.link}, {"indices", r.indices}});
        j = {{"type", "disseminator"}, {"dim", d->dim}, {"routes", routes}, {"role", d->role}};
    } else if (const auto* col = std::get_if<Collector>(&c)) {
        nlohmann::json parts = nlohmann::json::array();
        for (const Route& r : col->parts)
            parts.push_back({{"link", r.link}, {"indices", r.indices}});
        j = {{"type", "collector"}, {"dim", col->dim}, {"parts", parts}, {"role", col->role}};
    }
    return j;
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const ArchitectureGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : g.nodes) {
        nlohmann::json comps = nlohmann::json::array();
        for (const Component& c : n.components) comps.push_back(detail::component_to_json(c));
        nodes.push_back({{"id", n.id},
                         {"kind", node_kind_name(n.kind)},
                         {"index", n.index},
                         {"components", comps}});
    }
    nlohmann::json links = nlohmann::json::array();
    for (const Link& l : g.links)
        links.push_back({{"src", g.nodes[static_cast<size_t>(l.src)].id},
                         {"dst", g.nodes[static_cast<size_t>(l.dst)].id},
                         {"channel", channel_name(l.channel)},
                         {"dim_dense", l.dim_dense},
                         {"dim_live", l.dim_live}});
    nlohmann::json phases = nlohmann::json::array();
    for (PhaseKind p : g.schedule) phases.push_back(phase_name(p));
    nlohmann::json phi_u = nlohmann::json::array();
    for (const auto& m : g.phi_u) phi_u.push_back(detail::matrix_to_json(m));
    nlohmann::json phi_x = nlohmann::json::array();
    for (const auto& m : g.phi_x) phi_x.push_back(detail::matrix_to_json(m));
    j = nlohmann::json{{"architecture", arch_name(g.kind)},
                       {"nx", g.nx},
                       {"nu", g.nu},
                       {"T", g.T},
                       {"A", detail::matrix_to_json(g.A)},
                       {"B", detail::matrix_to_json(g.B)},
                       {"phi_u", std::move(phi_u)},
                       {"phi_x", std::move(phi_x)},
                       {"nodes", std::move(nodes)},
                       {"links", std::move(links)},
                       {"schedule", std::move(phases)}};
}

}  // namespace sls
