// Workbench front end: synthesize responses, compile deployment architectures, simulate
// them under disturbances and failures, and report costs and stability. Every subcommand
// reads one JSON experiment file; flags override individual fields. Outputs are
// deterministic: the same experiment file and seed yield byte-identical files.
//
// Exit codes: 0 success; 1 validation/usage error; 2 infeasible synthesis;
// 3 stability tolerance exceeded.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sls/architecture.hpp"
#include "sls/errors.hpp"
#include "sls/experiment.hpp"
#include "sls/lti.hpp"
#include "sls/realization.hpp"
#include "sls/simulator.hpp"
#include "sls/synthesis.hpp"
#include "sls/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitUnstable = 3;

struct CommonArgs {
    std::string experiment;
    std::string arch;  // empty = use experiment's; "all" = every architecture
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    double tol = 1e-6;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_tol = false) {
    cmd->add_option("--experiment", args.experiment, "experiment JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--arch", args.arch,
                    "architecture override: centralized|original|global_state|naive|"
                    "conservative|all");
    auto* seed_opt = cmd->add_option("--seed", "override the random-disturbance seed");
    seed_opt->each([&args](const std::string& s) { args.seed = std::stoull(s); });
    cmd->add_option("--out", args.out, "output directory (created if missing)");
    if (needs_tol) cmd->add_option("--tol", args.tol, "stability tail tolerance");
}

void write_text(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw sls::SpecError("cannot write " + p.string());
    out << content;
}

void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
    write_text(p, j.dump(2) + "\n");
}

std::filesystem::path prepare_out(const CommonArgs& args) {
    std::filesystem::path dir(args.out);
    std::filesystem::create_directories(dir);
    return dir;
}

// Architectures an invocation addresses: the --arch flag beats the experiment file; "all"
// expands in canonical table order.
std::vector<sls::ArchKind> selected_architectures(const CommonArgs& args,
                                                  const sls::ExperimentSpec& spec,
                                                  bool default_all) {
    std::string sel = !args.arch.empty() ? args.arch
                      : spec.architecture ? *spec.architecture
                                          : (default_all ? "all" : "");
    if (sel.empty())
        throw sls::SpecError("no architecture selected (set \"architecture\" or pass --arch)");
    if (sel == "all")
        return {sls::ArchKind::Centralized, sls::ArchKind::OriginalCentralized,
                sls::ArchKind::GlobalState, sls::ArchKind::NaiveDistributed,
                sls::ArchKind::MemoryConservative};
    return {sls::arch_from_name(sel)};
}

nlohmann::json stability_json(const sls::InternalStabilityReport& rep, double tol) {
    static constexpr const char* kIn[] = {"d_x", "d_u", "d_delta"};
    static constexpr const char* kOut[] = {"x", "u", "delta"};
    nlohmann::json tails;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) tails[kOut[r]][kIn[c]] = rep.tail[r][c];
    return nlohmann::json{{"horizon", rep.horizon},
                          {"tail_window", rep.tail_window},
                          {"tails", tails},
                          {"max_tail", rep.max_tail()},
                          {"tol", tol},
                          {"pass", rep.passes(tol)}};
}

int cmd_synthesize(const CommonArgs& args) {
    const sls::ExperimentSpec spec = sls::load_experiment(args.experiment);
    if (!spec.synthesis)
        throw sls::SpecError("synthesize needs \"synthesis\" parameters in the experiment");
    const auto dir = prepare_out(args);
    sls::SynthesisResult result;
    try {
        (void)sls::experiment_response(spec, &result);
    } catch (const sls::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        std::cerr << "constraint residual: " << e.residual << "\n";
        return kExitInfeasible;
    }
    nlohmann::json rj;
    sls::to_json(rj, result.response);
    write_json(dir / "response.json", rj);
    std::cout << "achievability residual: " << result.achievability.residual() << "\n"
              << "objective: " << result.objective << "\n";
    if (result.ill_conditioned)
        std::cout << "warning: near-singular KKT system (min rcond " << result.min_rcond
                  << ")\n";
    std::cout << "wrote " << (dir / "response.json").string() << "\n";
    return kExitOk;
}

int cmd_build(const CommonArgs& args) {
    const sls::ExperimentSpec spec = sls::load_experiment(args.experiment);
    const sls::SystemResponse resp = sls::experiment_response(spec);
    const auto dir = prepare_out(args);
    for (sls::ArchKind kind : selected_architectures(args, spec, /*default_all=*/false)) {
        const sls::ArchitectureGraph g = sls::build_architecture(kind, spec.system, resp);
        nlohmann::json gj;
        sls::to_json(gj, g);
        nlohmann::json cj;
        sls::to_json(cj, sls::cost_report(g));
        const std::string name = sls::arch_name(kind);
        write_json(dir / (name + "_graph.json"), gj);
        write_json(dir / (name + "_cost.json"), cj);
        std::cout << "wrote " << (dir / (name + "_graph.json")).string() << ", "
                  << (dir / (name + "_cost.json")).string() << "\n";
    }
    return kExitOk;
}

int cmd_simulate(const CommonArgs& args) {
    const sls::ExperimentSpec spec = sls::load_experiment(args.experiment);
    const sls::SystemResponse resp = sls::experiment_response(spec);
    const auto dir = prepare_out(args);
    const auto d_x = spec.disturbance.realize(spec.system.nx(), spec.horizon, args.seed);
    for (sls::ArchKind kind : selected_architectures(args, spec, /*default_all=*/false)) {
        const sls::ArchitectureGraph g = sls::build_architecture(kind, spec.system, resp);
        const sls::SimTrace trace =
            sls::simulate(g, spec.system, d_x, spec.horizon, spec.failures);
        const std::string name = sls::arch_name(kind);
        write_text(dir / (name + "_trace.csv"), trace.to_csv());
        nlohmann::json tj;
        sls::to_json(tj, trace);
        write_json(dir / (name + "_trace.json"), tj);
        std::cout << "wrote " << (dir / (name + "_trace.csv")).string() << ", "
                  << (dir / (name + "_trace.json")).string() << "\n";
    }
    return kExitOk;
}

int cmd_compare(const CommonArgs& args) {
    const sls::ExperimentSpec spec = sls::load_experiment(args.experiment);
    const sls::SystemResponse resp = sls::experiment_response(spec);
    const auto dir = prepare_out(args);
    const auto d_x = spec.disturbance.realize(spec.system.nx(), spec.horizon, args.seed);
    const std::uint64_t sweep_seed = args.seed.value_or(spec.disturbance.seed);

    std::vector<sls::ComparisonRow> rows;
    nlohmann::json jrows = nlohmann::json::array();
    for (sls::ArchKind kind : selected_architectures(args, spec, /*default_all=*/true)) {
        const sls::ArchitectureGraph g = sls::build_architecture(kind, spec.system, resp);
        sls::ComparisonRow row;
        row.cost = sls::cost_report(g);
        row.max_deviation =
            sls::compare_to_reference(g, spec.system, resp, d_x, spec.horizon).max_dev();
        row.single_point_of_failure =
            sls::spof_sweep(g, spec.system, sweep_seed).single_point_of_failure;
        nlohmann::json jr;
        sls::to_json(jr, row.cost);
        jr["max_deviation"] = *row.max_deviation;
        jr["single_point_of_failure"] = *row.single_point_of_failure;
        jrows.push_back(std::move(jr));
        rows.push_back(std::move(row));
    }
    const std::string text = sls::comparison_text(rows);
    write_text(dir / "comparison.txt", text);
    write_text(dir / "comparison.csv", sls::comparison_csv(rows));
    write_json(dir / "comparison.json", jrows);
    std::cout << text;
    std::cout << "wrote " << (dir / "comparison.txt").string() << ", "
              << (dir / "comparison.csv").string() << ", "
              << (dir / "comparison.json").string() << "\n";
    return kExitOk;
}

int cmd_stability(const CommonArgs& args) {
    const sls::ExperimentSpec spec = sls::load_experiment(args.experiment);
    const sls::SystemResponse resp = sls::experiment_response(spec);
    const auto dir = prepare_out(args);
    const sls::InternalStabilityReport rep =
        sls::internal_stability_report(spec.system, resp.phi_u, spec.horizon);
    write_json(dir / "stability.json", stability_json(rep, args.tol));
    static constexpr const char* kIn[] = {"d_x", "d_u", "d_delta"};
    static constexpr const char* kOut[] = {"x", "u", "delta"};
    std::cout << "tail norms over final " << rep.tail_window << " of " << rep.horizon
              << " steps:\n";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            std::cout << "  " << kOut[r] << " | " << kIn[c] << " : " << rep.tail[r][c]
                      << "\n";
    std::cout << "max tail " << rep.max_tail() << (rep.passes(args.tol) ? " < " : " >= ")
              << args.tol << (rep.passes(args.tol) ? " (pass)\n" : " (FAIL)\n");
    std::cout << "wrote " << (dir / "stability.json").string() << "\n";
    return rep.passes(args.tol) ? kExitOk : kExitUnstable;
}

int cmd_cost(const CommonArgs& args) {
    const sls::ExperimentSpec spec = sls::load_experiment(args.experiment);
    const sls::SystemResponse resp = sls::experiment_response(spec);
    const auto dir = prepare_out(args);
    std::vector<sls::ComparisonRow> rows;
    nlohmann::json jrows = nlohmann::json::array();
    for (sls::ArchKind kind : selected_architectures(args, spec, /*default_all=*/true)) {
        const sls::ArchitectureGraph g = sls::build_architecture(kind, spec.system, resp);
        sls::ComparisonRow row;
        row.cost = sls::cost_report(g);
        nlohmann::json jr;
        sls::to_json(jr, row.cost);
        jrows.push_back(std::move(jr));
        rows.push_back(std::move(row));
    }
    const std::string text = sls::comparison_text(rows);
    write_text(dir / "costs.txt", text);
    write_json(dir / "costs.json", jrows);
    std::cout << text;
    std::cout << "wrote " << (dir / "costs.txt").string() << ", "
              << (dir / "costs.json").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"state-feedback synthesis and deployment-architecture workbench"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* syn = app.add_subcommand("synthesize", "solve for the closed-loop response");
    add_common(syn, args);
    auto* build = app.add_subcommand("build", "compile architecture graphs and costs");
    add_common(build, args);
    auto* sim = app.add_subcommand("simulate", "run an architecture in closed loop");
    add_common(sim, args);
    auto* cmp = app.add_subcommand("compare", "cost/deviation/failure table across architectures");
    add_common(cmp, args);
    auto* stab = app.add_subcommand("stability", "nine-entry internal stability tails");
    add_common(stab, args, /*needs_tol=*/true);
    auto* cost = app.add_subcommand("cost", "static cost reports");
    add_common(cost, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (syn->parsed()) return cmd_synthesize(args);
        if (build->parsed()) return cmd_build(args);
        if (sim->parsed()) return cmd_simulate(args);
        if (cmp->parsed()) return cmd_compare(args);
        if (stab->parsed()) return cmd_stability(args);
        if (cost->parsed()) return cmd_cost(args);
    } catch (const sls::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << " (residual " << e.residual << ")\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
