// combsep: command-line front end for the sideband separation toolkit.
//
//   combsep run all --config config/default.toml --out out/
//   combsep plan classify --out out/
//   combsep config validate --config my.toml
//
// Exit codes: 0 success, 2 invalid configuration or usage, 3 stage failure.

#include "combsep/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{
constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;
constexpr const char *kConfigEnv = "COMBSEP_CONFIG";

struct CommonOptions
{
    std::string config;
    std::string out;
    std::vector<std::string> stages;
};

void add_common(CLI::App *cmd, CommonOptions &opts, bool with_stage)
{
    cmd->add_option("--config", opts.config, std::string("TOML config (default: $") + kConfigEnv + " or built-in)");
    cmd->add_option("--out", opts.out, "Output directory (overrides output.dir)");
    if (with_stage)
        cmd->add_option("--stage", opts.stages, "Restrict to these stages (repeatable)");
}

std::optional<std::string> config_path(const CommonOptions &opts)
{
    if (!opts.config.empty())
        return opts.config;
    if (const char *env = std::getenv(kConfigEnv); env && *env)
        return std::string(env);
    return std::nullopt;
}

void print_diagnostics(const std::vector<combsep::Diagnostic> &diags)
{
    for (const auto &d : diags)
        std::cerr << "config error: " << combsep::to_string(d) << '\n';
}

int run_stages(const CommonOptions &opts, std::vector<combsep::Stage> stages)
{
    combsep::ExperimentConfig cfg;
    try {
        const auto path = config_path(opts);
        cfg = path ? combsep::load_config(*path) : combsep::ExperimentConfig::reference_defaults();
    } catch (const combsep::ConfigError &e) {
        print_diagnostics(e.diagnostics());
        return kExitInvalid;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    if (!opts.out.empty())
        cfg.output_dir = opts.out;

    if (!opts.stages.empty()) {
        std::vector<combsep::Stage> filtered;
        for (const auto &name : opts.stages) {
            auto s = combsep::stage_from_string(name);
            if (!s) {
                std::cerr << "error: unknown stage '" << name << "'\n";
                return kExitInvalid;
            }
            if (std::find(stages.begin(), stages.end(), *s) != stages.end())
                filtered.push_back(*s);
        }
        stages = filtered;
    }

    try {
        const auto report = combsep::run_pipeline(cfg, stages);
        for (auto s : report.executed)
            std::cout << "stage " << combsep::to_string(s) << " done\n";
        for (const auto &f : report.files)
            std::cout << "wrote " << f.string() << '\n';
        return kExitOk;
    } catch (const combsep::ConfigError &e) {
        print_diagnostics(e.diagnostics());
        return kExitInvalid;
    } catch (const std::exception &e) {
        std::cerr << "stage failure: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int validate_config(const CommonOptions &opts)
{
    const auto path = config_path(opts);
    std::vector<combsep::Diagnostic> diags;
    try {
        diags = path ? combsep::validate_file(*path) : combsep::validate(combsep::ExperimentConfig::reference_defaults());
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    if (diags.empty()) {
        std::cout << (path ? *path : std::string("built-in defaults")) << ": ok\n";
        return kExitOk;
    }
    print_diagnostics(diags);
    return kExitInvalid;
}
} // namespace

int main(int argc, char **argv)
{
    using combsep::Stage;
    CLI::App app{"Entangled sideband comb separation and dense-coding toolkit"};
    app.require_subcommand(1);

    struct Leaf
    {
        CLI::App *cmd;
        std::vector<Stage> stages;
    };
    std::vector<Leaf> leaves;
    CommonOptions opts;

    auto group = [&](const char *name, const char *desc) {
        auto *g = app.add_subcommand(name, desc);
        g->require_subcommand(1);
        return g;
    };
    auto leaf = [&](CLI::App *parent, const char *name, const char *desc, std::vector<Stage> stages,
                    bool with_stage = false) {
        auto *cmd = parent->add_subcommand(name, desc);
        add_common(cmd, opts, with_stage);
        leaves.push_back({cmd, std::move(stages)});
    };

    auto *cavity = group("cavity", "Cavity transfer functions");
    leaf(cavity, "response", "Sample OPO and RFC responses on the LCC grid", {Stage::cavity});
    auto *lcc = group("lcc", "Local cross-correlation overlap");
    leaf(lcc, "run", "Score OPO teeth against the RFC response", {Stage::lcc});
    auto *plan = group("plan", "Sideband separation planning");
    leaf(plan, "classify", "Classify every sideband order", {Stage::classify});
    leaf(plan, "optimize", "Sweep the RFC free spectral range", {Stage::sweep});
    auto *ent = group("ent", "Entanglement prediction");
    leaf(ent, "map", "Per-order EPR variance map", {Stage::entanglement});
    auto *qdc = group("qdc", "Quantum dense coding");
    leaf(qdc, "capacity", "Channel capacity against the Fock limit", {Stage::qdc});
    leaf(qdc, "spectrum", "Decoded noise spectra", {Stage::spectrum});
    auto *run = group("run", "End-to-end pipeline");
    leaf(run, "all", "Run every stage",
         {std::begin(combsep::kAllStages), std::end(combsep::kAllStages)}, true);

    auto *cfg = group("config", "Configuration utilities");
    auto *validate_cmd = cfg->add_subcommand("validate", "Check a config file");
    add_common(validate_cmd, opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    if (validate_cmd->parsed())
        return validate_config(opts);
    for (const auto &l : leaves)
        if (l.cmd->parsed())
            return run_stages(opts, l.stages);
    return kExitInvalid;
}
