#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "toolplan/catalog.hpp"
#include "toolplan/harness.hpp"
#include "toolplan/search.hpp"
#include "toolplan/trajectory_log.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toolplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct RunArgs {
    std::string competition;
    std::string algorithm = "react";
    std::string policy = "scripted";
    size_t trials = 10;
    uint64_t seed = 1;
    double epsilon = 0.0;
    bool no_masking = false;
    std::string config_dir = "configs";
    std::string data_dir = "data";
    std::string out_dir = "runs";
    size_t jobs = 2;
    int iterations = 50;
    int candidates = 3;
    int max_depth = 40;
    int subtask_depth = 6;
    size_t sample_n = harness::kDefaultSampleN;
    std::string llm_host = "127.0.0.1";
    int llm_port = 8080;
    std::string llm_model = "gpt-4.1-mini";
};

int cmd_run(const RunArgs& args) {
    auto algorithm = harness::algorithm_from_name(args.algorithm);
    if (!algorithm) {
        std::cerr << "error: unknown algorithm '" << args.algorithm << "'\n";
        return kExitConfig;
    }
    if (args.no_masking && *algorithm != harness::AlgorithmKind::Hierarchical) {
        std::cerr << "error: --no-masking applies to the hierarchical algorithm only\n";
        return kExitConfig;
    }
    if (args.policy != "scripted" && args.policy != "llm") {
        std::cerr << "error: --policy must be 'scripted' or 'llm'\n";
        return kExitConfig;
    }
    fs::path comp_config =
        fs::path(args.config_dir) / "competitions" / (args.competition + ".json");
    if (!fs::exists(comp_config)) {
        std::cerr << "error: unknown competition '" << args.competition << "' (no "
                  << comp_config.string() << ")\n";
        return kExitConfig;
    }

    try {
        Registry registry = catalog::load_registry(
            (fs::path(args.config_dir) / "tool_catalog.json").string());
        json grids =
            catalog::load_json_file((fs::path(args.config_dir) / "model_grids.json").string());
        json comp_json = catalog::load_json_file(comp_config.string());
        CompetitionSpec comp =
            harness::prepare_competition(comp_json, args.data_dir, args.sample_n,
                                         harness::kDefaultTestFraction, args.seed);

        harness::RunOptions opt;
        opt.algorithm = *algorithm;
        opt.policy = args.policy;
        opt.trials = args.trials;
        opt.base_seed = args.seed;
        opt.epsilon = args.epsilon;
        opt.out_dir = args.out_dir;
        opt.jobs = args.jobs;
        opt.search.max_iterations = args.iterations;
        opt.search.expansion_candidates = args.candidates;
        opt.search.max_depth = args.max_depth;
        opt.search.max_subtask_depth = args.subtask_depth;
        opt.search.masking = !args.no_masking;
        opt.llm.host = args.llm_host;
        opt.llm.port = args.llm_port;
        opt.llm.model = args.llm_model;

        harness::BenchmarkReport report =
            harness::run_trials(comp, registry, grids, opt);

        fs::path report_dir = fs::path(args.out_dir) / "report";
        fs::create_directories(report_dir);
        fs::path report_path =
            report_dir / (comp.name + "_" + args.algorithm + ".json");
        {
            std::ofstream out(report_path);
            out << harness::report_to_json(report).dump(2) << "\n";
        }
        std::cout << harness::render_report_table({report});
        std::cout << "report written to " << report_path.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_tools(const std::string& config_dir, const std::string& stage) {
    try {
        Registry registry =
            catalog::load_registry((fs::path(config_dir) / "tool_catalog.json").string());
        std::optional<StageId> stage_id;
        if (!stage.empty()) {
            stage_id = stage_from_name(stage);
            if (!stage_id) {
                std::cerr << "error: unknown stage '" << stage << "'\n";
                return kExitConfig;
            }
        }
        RegistryView view =
            stage_id ? registry.masked_view(*stage_id) : registry.full_view();
        for (const ToolDescriptor* d : view.exposed()) {
            std::vector<std::string> stages;
            for (StageId s : kAllStages)
                if (d->stages.count(s)) stages.push_back(stage_name(s));
            std::printf("%-40s %-9s %s\n    stages: %s\n", d->name.c_str(),
                        wrapper_name(d->wrapper), d->doc.c_str(), join(stages, ", ").c_str());
        }
        std::cout << view.exposed().size() << " tools\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_replay(const std::string& logfile) {
    std::ifstream in(logfile);
    if (!in) {
        std::cerr << "error: cannot open '" << logfile << "'\n";
        return kExitData;
    }
    json log = json::parse(in, nullptr, false);
    if (log.is_discarded()) {
        std::cerr << "error: '" << logfile << "' is not valid JSON\n";
        return kExitData;
    }
    auto report = logs::validate_log(log);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (!report.ok()) {
        for (const auto& e : report.errors) std::cerr << "error: " << e << "\n";
        return kExitData;
    }
    std::cout << logs::render_log(log);
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& files) {
    std::vector<harness::BenchmarkReport> reports;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) {
            std::cerr << "error: cannot open '" << file << "'\n";
            return kExitData;
        }
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            std::cerr << "error: '" << file << "' is not a report JSON\n";
            return kExitData;
        }
        harness::BenchmarkReport r;
        r.competition = j.value("competition", std::string("?"));
        r.algorithm = j.value("algorithm", std::string("?"));
        r.policy = j.value("policy", std::string("?"));
        r.trials = j.value("trials", 0);
        r.consistency = j.value("consistency", 0.0);
        r.median_percentile = j.value("median_percentile", 0.0);
        r.mean_percentile = j.value("mean_percentile", 0.0);
        r.std_percentile = j.value("std_percentile", 0.0);
        reports.push_back(std::move(r));
    }
    std::cout << harness::render_report_table(reports);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tool-augmented planning benchmark for tabular ML workflows"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run benchmark trials for one competition");
    run->add_option("--competition", run_args.competition, "competition name")->required();
    run->add_option("--algorithm", run_args.algorithm,
                    "react | lats | mcts-outcome | mcts-shaped | hierarchical");
    run->add_option("--policy", run_args.policy, "scripted | llm");
    run->add_option("--trials", run_args.trials, "number of trials");
    run->add_option("--seed", run_args.seed, "base seed");
    run->add_option("--epsilon", run_args.epsilon, "scripted-policy noise rate");
    run->add_flag("--no-masking", run_args.no_masking,
                  "disable tool masking (hierarchical only)");
    run->add_option("--config", run_args.config_dir, "config directory");
    run->add_option("--data-dir", run_args.data_dir, "prepared data directory");
    run->add_option("--out", run_args.out_dir, "output directory");
    run->add_option("--jobs", run_args.jobs, "worker pool size");
    run->add_option("--iterations", run_args.iterations, "search budget per run");
    run->add_option("--candidates", run_args.candidates, "expansion candidates k");
    run->add_option("--max-depth", run_args.max_depth, "maximum tree depth");
    run->add_option("--subtask-depth", run_args.subtask_depth,
                    "maximum subtask depth (hierarchical)");
    run->add_option("--sample-n", run_args.sample_n, "training sample cap");
    run->add_option("--llm-host", run_args.llm_host, "chat-completions host");
    run->add_option("--llm-port", run_args.llm_port, "chat-completions port");
    run->add_option("--llm-model", run_args.llm_model, "model name sent on the wire");

    std::string tools_stage, tools_config = "configs";
    auto* tools = app.add_subcommand("tools", "list the tool catalog");
    tools->add_option("--stage", tools_stage, "filter by subtask stage");
    tools->add_option("--config", tools_config, "config directory");

    std::string replay_file;
    auto* replay = app.add_subcommand("replay", "render a trajectory log");
    replay->add_option("logfile", replay_file, "trajectory log JSON")->required();

    std::vector<std::string> report_files;
    auto* report = app.add_subcommand("report", "render report JSONs as a table");
    report->add_option("files", report_files, "report JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (run->parsed()) return cmd_run(run_args);
    if (tools->parsed()) return cmd_tools(tools_config, tools_stage);
    if (replay->parsed()) return cmd_replay(replay_file);
    if (report->parsed()) return cmd_report(report_files);
    return kExitConfig;
}
