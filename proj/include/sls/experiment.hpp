#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sls/architecture.hpp"
#include "sls/detail/json.hpp"
#include "sls/errors.hpp"
#include "sls/lti.hpp"
#include "sls/rng.hpp"
#include "sls/synthesis.hpp"
#include "sls/trace.hpp"

// Experiment files bundle a plant, either a synthesis request or a precomputed response,
// and the run configuration (architecture, horizon, disturbance, failures). Validation
// collects every problem before reporting, so a bad file is fixed in one round trip.

namespace sls {

struct DisturbanceSpec {
    enum class Kind { Impulse, Random, Explicit };
    Kind kind = Kind::Impulse;
    Eigen::Index index = 0;       // impulse coordinate
    double amplitude = 1.0;       // impulse height / random range half-width
    std::uint64_t seed = 0;       // random
    std::vector<Eigen::VectorXd> values;  // explicit

    [[nodiscard]] std::vector<Eigen::VectorXd> realize(
        Eigen::Index nx, int horizon, std::optional<std::uint64_t> seed_override = {}) const {
        std::vector<Eigen::VectorXd> d;
        switch (kind) {
            case Kind::Impulse: {
                if (index < 0 || index >= nx)
                    throw SpecError("disturbance impulse index out of range");
                Eigen::VectorXd v = Eigen::VectorXd::Zero(nx);
                v(index) = amplitude;
                d.push_back(std::move(v));
                break;
            }
            case Kind::Random: {
                Rng rng(seed_override.value_or(seed));
                for (int t = 0; t < horizon; ++t)
                    d.push_back(rng.vector(nx, -amplitude, amplitude));
                break;
            }
            case Kind::Explicit:
                for (const auto& v : values) {
                    if (v.size() != nx)
                        throw SpecError("explicit disturbance entry has wrong dimension");
                    d.push_back(v);
                }
                break;
        }
        return d;
    }
};

struct SynthesisRequest {
    int T = 1;
    Eigen::MatrixXd Q;  // identity when omitted
    Eigen::MatrixXd R;
    std::optional<MaskMatrix> mask_x;
    std::optional<MaskMatrix> mask_u;
};

struct ExperimentSpec {
    LtiSystem system{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
    std::optional<SynthesisRequest> synthesis;
    std::optional<std::filesystem::path> response_file;  // resolved against the spec's dir
    std::optional<std::string> architecture;
    int horizon = 50;
    DisturbanceSpec disturbance;
    std::vector<FailureEvent> failures;
};

namespace detail {

[[nodiscard]] inline MaskMatrix mask_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw SpecError(what + ": expected a nested array");
    const size_t cols = j.front().is_array() ? j.front().size() : 0;
    MaskMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < j.size(); ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != cols)
            throw SpecError(what + ": ragged or non-array row");
        for (size_t c = 0; c < cols; ++c) {
            const auto& v = row[c];
            if (v.is_boolean())
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v.get<bool>();
            else if (v.is_number_integer())
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    v.get<long long>() != 0;
            else
                throw SpecError(what + ": entries must be booleans or 0/1");
        }
    }
    return m;
}

[[nodiscard]] inline nlohmann::json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw SpecError("cannot open file: " + p.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("malformed JSON in " + p.string() + ": " + e.what());
    }
    return j;
}

}  // namespace detail

[[nodiscard]] inline ExperimentSpec load_experiment(const std::filesystem::path& file) {
    const nlohmann::json j = detail::read_json_file(file);
    const std::filesystem::path base = file.has_parent_path()
                                           ? file.parent_path()
                                           : std::filesystem::path(".");
    std::vector<std::string> errs;
    auto complain = [&errs](const std::string& msg) { errs.push_back(msg); };

    ExperimentSpec spec;

    // --- system -------------------------------------------------------------
    bool have_system = false;
    if (!j.contains("system")) {
        complain("missing required field \"system\"");
    } else {
        try {
            nlohmann::json sysj = j.at("system");
            if (sysj.is_object() && sysj.contains("file"))
                sysj = detail::read_json_file(base / sysj.at("file").get<std::string>());
            spec.system = lti_from_json(sysj);
            have_system = true;
        } catch (const std::exception& e) {
            complain(std::string("system: ") + e.what());
        }
    }

    // --- synthesis xor response_file -----------------------------------------
    const bool has_syn = j.contains("synthesis");
    const bool has_resp = j.contains("response_file");
    if (has_syn == has_resp)
        complain("exactly one of \"synthesis\" and \"response_file\" is required");
    if (has_syn) {
        try {
            const auto& sj = j.at("synthesis");
            SynthesisRequest req;
            req.T = sj.at("T").get<int>();
            if (req.T < 1) complain("synthesis.T must be >= 1");
            if (have_system) {
                req.Q = sj.contains("Q")
                            ? detail::matrix_from_json(sj.at("Q"), "synthesis.Q")
                            : Eigen::MatrixXd(
                                  Eigen::MatrixXd::Identity(spec.system.nx(), spec.system.nx()));
                req.R = sj.contains("R")
                            ? detail::matrix_from_json(sj.at("R"), "synthesis.R")
                            : Eigen::MatrixXd(
                                  Eigen::MatrixXd::Identity(spec.system.nu(), spec.system.nu()));
            }
            if (sj.contains("mask_x"))
                req.mask_x = detail::mask_from_json(sj.at("mask_x"), "synthesis.mask_x");
            if (sj.contains("mask_u"))
                req.mask_u = detail::mask_from_json(sj.at("mask_u"), "synthesis.mask_u");
            spec.synthesis = std::move(req);
        } catch (const std::exception& e) {
            complain(std::string("synthesis: ") + e.what());
        }
    }
    if (has_resp) {
        try {
            spec.response_file = base / j.at("response_file").get<std::string>();
        } catch (const std::exception& e) {
            complain(std::string("response_file: ") + e.what());
        }
    }

    // --- architecture ---------------------------------------------------------
    if (j.contains("architecture")) {
        try {
            const auto name = j.at("architecture").get<std::string>();
            (void)arch_from_name(name);
            spec.architecture = name;
        } catch (const std::exception& e) {
            complain(std::string("architecture: ") + e.what());
        }
    }

    // --- horizon ---------------------------------------------------------------
    if (j.contains("horizon")) {
        try {
            spec.horizon = j.at("horizon").get<int>();
        } catch (const std::exception& e) {
            complain(std::string("horizon: ") + e.what());
        }
        if (spec.horizon < 1) complain("horizon must be >= 1");
    }

    // --- disturbance -------------------------------------------------------------
    if (j.contains("disturbance")) {
        try {
            const auto& dj = j.at("disturbance");
            const auto type = dj.at("type").get<std::string>();
            if (type == "impulse") {
                spec.disturbance.kind = DisturbanceSpec::Kind::Impulse;
                if (dj.contains("index"))
                    spec.disturbance.index = dj.at("index").get<Eigen::Index>();
                if (dj.contains("amplitude"))
                    spec.disturbance.amplitude = dj.at("amplitude").get<double>();
            } else if (type == "random") {
                spec.disturbance.kind = DisturbanceSpec::Kind::Random;
                if (dj.contains("seed"))
                    spec.disturbance.seed = dj.at("seed").get<std::uint64_t>();
                if (dj.contains("amplitude"))
                    spec.disturbance.amplitude = dj.at("amplitude").get<double>();
            } else if (type == "explicit") {
                spec.disturbance.kind = DisturbanceSpec::Kind::Explicit;
                for (const auto& row : dj.at("values"))
                    spec.disturbance.values.push_back(
                        detail::vector_from_json(row, "disturbance.values"));
            } else {
                complain("disturbance.type must be impulse|random|explicit");
            }
        } catch (const std::exception& e) {
            complain(std::string("disturbance: ") + e.what());
        }
    }

    // --- failures -----------------------------------------------------------------
    if (j.contains("failures")) {
        try {
            for (const auto& fj : j.at("failures"))
                spec.failures.push_back(failure_from_json(fj));
        } catch (const std::exception& e) {
            complain(std::string("failures: ") + e.what());
        }
    }

    if (!errs.empty()) {
        std::string msg = "invalid experiment file " + file.string() + ":";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw SpecError(msg);
    }
    return spec;
}

// Produces the system response for an experiment: runs synthesis or loads the referenced
// response file, validating dimensions against the plant either way.
[[nodiscard]] inline SystemResponse experiment_response(const ExperimentSpec& spec,
                                                        SynthesisResult* result_out = nullptr) {
    if (spec.synthesis) {
        SynthesisProblem prob{spec.system,          spec.synthesis->T,
                              spec.synthesis->Q,    spec.synthesis->R,
                              spec.synthesis->mask_x, spec.synthesis->mask_u};
        SynthesisResult res = synthesize_h2(prob);
        if (result_out) *result_out = res;
        return res.response;
    }
    const nlohmann::json rj = detail::read_json_file(*spec.response_file);
    SystemResponse resp = response_from_json(rj);
    resp.validate(spec.system.nx(), spec.system.nu());
    return resp;
}

}  // namespace sls
