#pragma once

#include <charconv>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sls/detail/json.hpp"
#include "sls/errors.hpp"

namespace sls {

// A node going silent: from t onward it emits zero vectors and ignores its inputs.
struct FailureEvent {
    std::string node;
    int t = 0;
    std::string mode = "silent";
};

inline void to_json(nlohmann::json& j, const FailureEvent& f) {
    j = nlohmann::json{{"node", f.node}, {"t", f.t}, {"mode", f.mode}};
}

inline FailureEvent failure_from_json(const nlohmann::json& j) {
    FailureEvent f;
    if (!j.contains("node") || !j.contains("t"))
        throw SpecError("FailureEvent: JSON needs \"node\" and \"t\"");
    f.node = j.at("node").get<std::string>();
    f.t = j.at("t").get<int>();
    if (j.contains("mode")) f.mode = j.at("mode").get<std::string>();
    if (f.mode != "silent") throw SpecError("FailureEvent: unknown mode \"" + f.mode + "\"");
    return f;
}

// Time-indexed closed-loop record. x, u and delta have one entry per step t = 0..H-1.
// link_payloads[t][l] is what link l of the architecture carried during step t (empty for
// monolithic runs). delta is logged where it is computed: the central node, the state
// keeper, or the concatenation of per-sensor values, depending on the architecture.
struct SimTrace {
    std::vector<Eigen::VectorXd> x;
    std::vector<Eigen::VectorXd> u;
    std::vector<Eigen::VectorXd> delta;
    std::vector<std::vector<Eigen::VectorXd>> link_payloads;
    std::vector<FailureEvent> failures;
    std::vector<std::string> notes;

    [[nodiscard]] int steps() const { return static_cast<int>(x.size()); }

    // One row per step: t, x entries, u entries, delta entries.
    [[nodiscard]] std::string to_csv() const {
        std::string out;
        const auto nx = x.empty() ? 0 : x[0].size();
        const auto nu = u.empty() ? 0 : u[0].size();
        const auto nd = delta.empty() ? 0 : delta[0].size();
        out += "t";
        for (Eigen::Index i = 0; i < nx; ++i) out += ",x" + std::to_string(i);
        for (Eigen::Index i = 0; i < nu; ++i) out += ",u" + std::to_string(i);
        for (Eigen::Index i = 0; i < nd; ++i) out += ",delta" + std::to_string(i);
        out += "\n";
        char buf[32];
        auto append = [&](double v) {
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            out += ',';
            out.append(buf, res.ptr);
        };
        for (int t = 0; t < steps(); ++t) {
            out += std::to_string(t);
            for (Eigen::Index i = 0; i < nx; ++i) append(x[t](i));
            for (Eigen::Index i = 0; i < nu; ++i) append(u[t](i));
            for (Eigen::Index i = 0; i < nd; ++i) append(delta[t](i));
            out += "\n";
        }
        return out;
    }
};

inline void to_json(nlohmann::json& j, const SimTrace& tr) {
    auto seq = [](const std::vector<Eigen::VectorXd>& vs) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& v : vs) a.push_back(detail::vector_to_json(v));
        return a;
    };
    nlohmann::json links = nlohmann::json::array();
    for (const auto& per_step : tr.link_payloads) links.push_back(seq(per_step));
    j = nlohmann::json{{"x", seq(tr.x)},
                       {"u", seq(tr.u)},
                       {"delta", seq(tr.delta)},
                       {"link_payloads", std::move(links)},
                       {"failures", tr.failures},
                       {"notes", tr.notes}};
}

}  // namespace sls
