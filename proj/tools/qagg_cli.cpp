// qagg: command-line driver for topology generation, scheduling and sweeps.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qagg/baseline.hpp"
#include "qagg/harness.hpp"
#include "qagg/qlearn.hpp"
#include "qagg/schedule.hpp"
#include "qagg/topology.hpp"

namespace fs = std::filesystem;
using namespace qagg;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitError = 2;

// Writes to `path`, or stdout when the path is empty.
void emit(const std::string& path, const std::string& contents) {
    if (path.empty())
        std::cout << contents;
    else
        write_file(path, contents);
}

// Training flags shared by `train` and `sweep`. Each is only applied when the
// user passed it, so values from a config file survive.
struct TrainFlags {
    std::optional<double> alpha, gamma, epsilon_init, epsilon_decay;
    std::optional<std::size_t> episodes;
    std::optional<std::string> key_mode;

    void attach(CLI::App* app) {
        app->add_option("--alpha", alpha, "Learning rate (default 0.1)");
        app->add_option("--gamma", gamma, "Discount factor (default 0.9)");
        app->add_option("--epsilon-init", epsilon_init, "Initial exploration rate (default 1.0)");
        app->add_option("--epsilon-decay", epsilon_decay,
                        "Linear exploration decay per episode (default 1/episodes)");
        app->add_option("--episodes", episodes, "Training episodes (default 20000)");
        app->add_option("--key-mode", key_mode, "State keys: canonical or digest")
            ->check(CLI::IsMember({"canonical", "digest"}));
    }

    void apply(TrainConfig& c) const {
        if (alpha) c.alpha = *alpha;
        if (gamma) c.gamma = *gamma;
        if (epsilon_init) c.epsilon_init = *epsilon_init;
        if (epsilon_decay) c.epsilon_decay = *epsilon_decay;
        if (episodes) c.episodes = *episodes;
        if (key_mode) c.key_mode = parse_key_mode(*key_mode);
    }
};

bool report_validation(const Schedule& schedule, const Adjacency& adjacency, const char* what) {
    const ValidationReport report = validate_schedule(schedule, adjacency);
    if (!report.valid()) {
        std::cerr << what << " schedule failed validation: " << report.summary() << '\n';
        return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Q-learning data aggregation scheduling for static sensor networks"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a random connected topology");
    GeneratorOptions gen_opts;
    std::string sink_text = "center";
    std::string gen_out;
    gen->add_option("--nodes", gen_opts.sensors, "Number of sensors (sink excluded)");
    gen->add_option("--width", gen_opts.area.width, "Area width");
    gen->add_option("--height", gen_opts.area.height, "Area height");
    gen->add_option("--range", gen_opts.range, "Communication range R");
    gen->add_option("--sink", sink_text, "Sink position")->check(CLI::IsMember({"center", "corner"}));
    gen->add_option("--seed", gen_opts.seed, "Generator seed");
    gen->add_option("--max-attempts", gen_opts.max_attempts, "Redraw budget for connectivity");
    gen->add_option("--out", gen_out, "Output topology file (stdout if omitted)");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train Q-learning on one topology");
    std::string topo_path, config_path, train_out, qtable_out, trace_out;
    std::optional<std::uint64_t> train_seed;
    TrainFlags train_flags;
    train_cmd->add_option("--topology", topo_path, "Topology file")->required();
    train_cmd->add_option("--config", config_path, "JSON config with training parameters");
    train_cmd->add_option("--seed", train_seed, "Training RNG seed");
    train_flags.attach(train_cmd);
    train_cmd->add_option("--out", train_out, "Schedule output file");
    train_cmd->add_option("--qtable-out", qtable_out, "Best Q-table output file");
    train_cmd->add_option("--trace-out", trace_out, "Per-episode delay trace (CSV)");

    // baseline
    auto* base_cmd = app.add_subcommand("baseline", "Schedule with the BFS-tree greedy baseline");
    std::string base_topo, base_out;
    base_cmd->add_option("--topology", base_topo, "Topology file")->required();
    base_cmd->add_option("--out", base_out, "Schedule output file");

    // exact
    auto* exact_cmd = app.add_subcommand("exact", "Exact minimum delay by exhaustive search");
    std::string exact_topo, exact_out;
    ExactOptions exact_opts;
    exact_cmd->add_option("--topology", exact_topo, "Topology file")->required();
    exact_cmd->add_option("--limit", exact_opts.sensor_limit, "Largest sensor count accepted");
    exact_cmd->add_option("--budget", exact_opts.node_budget, "Search node budget");
    exact_cmd->add_option("--out", exact_out, "Schedule output file");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a topology sweep comparing both schedulers");
    std::string sweep_config, sweep_out;
    std::vector<std::size_t> sweep_nodes;
    std::vector<std::string> sweep_sinks;
    std::optional<std::size_t> sweep_reps, sweep_jobs;
    std::optional<std::uint64_t> sweep_seed;
    std::optional<double> sweep_range;
    TrainFlags sweep_flags;
    sweep->add_option("--config", sweep_config, "JSON experiment config");
    sweep->add_option("--nodes", sweep_nodes, "Sensor counts");
    sweep->add_option("--sink", sweep_sinks, "Sink positions")
        ->check(CLI::IsMember({"center", "corner"}));
    sweep->add_option("--replicates", sweep_reps, "Topologies per configuration");
    sweep->add_option("--seed", sweep_seed, "Base seed");
    sweep->add_option("--range", sweep_range, "Communication range R");
    sweep->add_option("--jobs", sweep_jobs, "Worker threads");
    sweep_flags.attach(sweep);
    sweep->add_option("--out", sweep_out, "Output directory")->required();

    // compare
    auto* compare = app.add_subcommand("compare", "Summarise a results table");
    std::string results_path, compare_out;
    compare->add_option("--results", results_path, "results.csv from a sweep")->required();
    compare->add_option("--out", compare_out, "Summary CSV output");

    // export-dot
    auto* dot = app.add_subcommand("export-dot", "Render a schedule as a Graphviz document");
    std::string dot_topo, dot_schedule, dot_out;
    dot->add_option("--topology", dot_topo, "Topology file")->required();
    dot->add_option("--schedule", dot_schedule, "Transmission-order schedule file")->required();
    dot->add_option("--out", dot_out, "DOT output file (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            gen_opts.sink = parse_sink_position(sink_text);
            emit(gen_out, topology_to_json(generate_topology(gen_opts)));
            return 0;
        }

        if (train_cmd->parsed()) {
            const Topology topo = load_topology(topo_path);
            const Adjacency adj = build_adjacency(topo);
            TrainConfig cfg;
            if (!config_path.empty())
                cfg = experiment_config_from_json(read_file(config_path)).train;
            train_flags.apply(cfg);
            if (train_seed) cfg.seed = *train_seed;

            const QlearnResult result = run_qlearning(adj, cfg);
            std::cout << "best_episode_delay " << result.training.best_delay << '\n'
                      << "greedy_delay " << delay_of(result.greedy_schedule) << '\n'
                      << "delay " << delay_of(result.schedule) << '\n'
                      << "states " << result.training.best_qtable.state_count() << '\n';
            if (!train_out.empty()) save_schedule(result.schedule, train_out);
            if (!qtable_out.empty()) save_qtable(result.training.best_qtable, qtable_out);
            if (!trace_out.empty()) write_file(trace_out, trace_to_csv(result.training.trace));
            return report_validation(result.schedule, adj, "q-learning") ? 0 : kExitInvalid;
        }

        if (base_cmd->parsed()) {
            const Adjacency adj = build_adjacency(load_topology(base_topo));
            const Schedule s = baseline_schedule(adj);
            std::cout << "delay " << delay_of(s) << '\n';
            if (!base_out.empty()) save_schedule(s, base_out);
            return report_validation(s, adj, "baseline") ? 0 : kExitInvalid;
        }

        if (exact_cmd->parsed()) {
            const Adjacency adj = build_adjacency(load_topology(exact_topo));
            const ExactResult r = brute_force_optimal(adj, exact_opts);
            std::cout << "delay " << r.delay << '\n'
                      << "status "
                      << (r.status == ExactResult::Status::optimal ? "optimal" : "exhausted")
                      << '\n'
                      << "nodes_expanded " << r.nodes_expanded << '\n';
            if (!exact_out.empty()) save_schedule(r.schedule, exact_out);
            return report_validation(r.schedule, adj, "exact") ? 0 : kExitInvalid;
        }

        if (sweep->parsed()) {
            ExperimentConfig cfg;
            if (!sweep_config.empty()) cfg = experiment_config_from_json(read_file(sweep_config));
            if (!sweep_nodes.empty()) cfg.node_counts = sweep_nodes;
            if (!sweep_sinks.empty()) {
                cfg.sinks.clear();
                for (const auto& s : sweep_sinks) cfg.sinks.push_back(parse_sink_position(s));
            }
            if (sweep_reps) cfg.replicates = *sweep_reps;
            if (sweep_seed) cfg.base_seed = *sweep_seed;
            if (sweep_range) cfg.range = *sweep_range;
            if (sweep_jobs) cfg.jobs = *sweep_jobs;
            sweep_flags.apply(cfg.train);

            fs::create_directories(sweep_out);
            const fs::path dir(sweep_out);
            write_file(dir / "config.json", experiment_config_to_json(cfg));
            const auto rows = run_experiment(cfg, [](const ResultRow& r) {
                std::fprintf(stderr, "n=%zu sink=%s rep=%zu baseline=%zu qlearn=%zu (%.1fs)\n",
                             r.nodes, std::string(to_string(r.sink)).c_str(), r.replicate,
                             r.baseline_delay, r.qlearn_delay, r.seconds);
            });
            const auto summary = compare_results(rows);
            write_file(dir / "results.csv", results_to_csv(rows));
            write_file(dir / "summary.csv", summary_to_csv(summary));
            write_file(dir / "timings.csv", timings_to_csv(rows));
            std::cout << format_summary(summary);
            return 0;
        }

        if (compare->parsed()) {
            const auto summary = compare_results(results_from_csv(read_file(results_path)));
            std::cout << format_summary(summary);
            if (!compare_out.empty()) write_file(compare_out, summary_to_csv(summary));
            return 0;
        }

        if (dot->parsed()) {
            const Topology topo = load_topology(dot_topo);
            const Adjacency adj = build_adjacency(topo);
            emit(dot_out, export_schedule_dot(topo, adj, load_schedule(dot_schedule)));
            return 0;
        }
    } catch (const InvalidScheduleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return 0;
}
