#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "qagg/baseline.hpp"
#include "qagg/harness.hpp"

using namespace qagg;

namespace {

ResultRow row(std::size_t nodes, SinkPosition sink, std::size_t rep, std::size_t base,
              std::size_t q) {
    ResultRow r;
    r.nodes = nodes;
    r.sink = sink;
    r.replicate = rep;
    r.seed = rep + 1;
    r.eccentricity = 1;
    r.baseline_delay = base;
    r.qlearn_delay = q;
    r.improvement_pct = improvement_percent(static_cast<double>(base), static_cast<double>(q));
    return r;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.node_counts = {20};
    c.sinks = {SinkPosition::center, SinkPosition::corner};
    c.replicates = 2;
    c.range = 30.0;
    c.train.episodes = 200;
    return c;
}

std::size_t count_lines(const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);)
        if (line.find(needle) != std::string::npos) ++n;
    return n;
}

Topology topology_for(std::size_t n) {
    Topology t;
    t.range = 20.0;
    for (NodeId v = 0; v < n; ++v) t.nodes.push_back({v, 10.0 * v, 0.0});
    return t;
}

}  // namespace

TEST_CASE("improvement percentages") {
    CHECK(improvement_percent(10, 9) == doctest::Approx(10.0));
    CHECK(improvement_percent(10, 10) == 0.0);
    CHECK(improvement_percent(10, 12) == doctest::Approx(-20.0));

    const auto summary = compare_results({row(50, SinkPosition::center, 0, 10, 9),
                                          row(50, SinkPosition::center, 1, 20, 20),
                                          row(50, SinkPosition::corner, 0, 10, 12)});
    REQUIRE(summary.size() == 2);
    CHECK(summary[0].count == 2);
    CHECK(summary[0].mean_baseline == 15.0);
    CHECK(summary[0].mean_qlearn == 14.5);
    CHECK(summary[0].mean_improvement_pct == doctest::Approx(5.0));
    CHECK(summary[0].improvement_of_means_pct == doctest::Approx(100.0 * 0.5 / 15.0));
    CHECK(summary[1].mean_improvement_pct == doctest::Approx(-20.0));

    CHECK_THROWS_AS(compare_results({}), std::invalid_argument);
    CHECK_THROWS_AS(compare_results({row(50, SinkPosition::center, 0, 10, 9),
                                     row(50, SinkPosition::center, 0, 11, 9)}),
                    std::invalid_argument);
}

TEST_CASE("seed derivation") {
    const ReplicateSeeds s = derive_seeds(100, 4);
    CHECK(s.seed == 104);
    CHECK(s.topology == 104);
    CHECK(s.training == 104 + ReplicateSeeds::kTrainingOffset);
}

TEST_CASE("run_experiment row counting and CSV layout") {
    ExperimentConfig c = small_config();
    c.sinks = {SinkPosition::center};
    c.replicates = 3;
    const auto rows = run_experiment(c);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].replicate == i);
        CHECK(rows[i].qlearn_delay >= rows[i].eccentricity);
        CHECK(rows[i].baseline_delay >= rows[i].eccentricity);
        CHECK(rows[i].improvement_pct ==
              doctest::Approx(100.0 * (double(rows[i].baseline_delay) - double(rows[i].qlearn_delay)) /
                              double(rows[i].baseline_delay))
                  .epsilon(1e-12));
    }
    const std::string csv = results_to_csv(rows);
    std::istringstream in(csv);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "nodes,sink,replicate,seed,eccentricity,baseline_delay,qlearn_delay,improvement_pct");
    CHECK(lines[4].rfind("20,center,mean,", 0) == 0);

    const auto back = results_from_csv(csv);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].seed == rows[i].seed);
        CHECK(back[i].baseline_delay == rows[i].baseline_delay);
        CHECK(back[i].qlearn_delay == rows[i].qlearn_delay);
    }
}

TEST_CASE("run_experiment is deterministic regardless of worker count") {
    ExperimentConfig c = small_config();
    const std::string one = results_to_csv(run_experiment(c));
    c.jobs = 3;
    const std::string three = results_to_csv(run_experiment(c));
    CHECK(one == three);
    CHECK(results_to_csv(run_experiment(c)) == one);
}

TEST_CASE("run_replicate validates both schedules") {
    const ExperimentConfig c = small_config();
    const ReplicateOutput out = run_replicate(c, 20, SinkPosition::corner, 1);
    const Adjacency adj = build_adjacency(out.topology);
    CHECK(validate_schedule(out.baseline, adj).valid());
    CHECK(validate_schedule(out.qlearn, adj).valid());
    CHECK(out.row.seed == 2);
    CHECK(out.row.qlearn_delay == delay_of(out.qlearn));
    CHECK(out.row.baseline_delay == delay_of(out.baseline));
}

TEST_CASE("experiment config files") {
    const ExperimentConfig c = experiment_config_from_json(
        R"({"node_counts":[50,100],"sinks":["corner"],"replicates":4,"seed":9,"episodes":500,
            "epsilon_decay":0.001,"key_mode":"digest","jobs":2})");
    CHECK(c.node_counts == std::vector<std::size_t>{50, 100});
    CHECK(c.sinks == std::vector<SinkPosition>{SinkPosition::corner});
    CHECK(c.replicates == 4);
    CHECK(c.base_seed == 9);
    CHECK(c.train.episodes == 500);
    CHECK(c.train.epsilon_decay == 0.001);
    CHECK(c.train.key_mode == KeyMode::digest);
    CHECK(c.jobs == 2);
    CHECK(c.range == 20.0);

    const ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(c));
    CHECK(back.node_counts == c.node_counts);
    CHECK(back.train.epsilon_decay == c.train.epsilon_decay);
    CHECK(back.train.key_mode == c.train.key_mode);

    CHECK_THROWS_AS(experiment_config_from_json(R"({"nodez":[50]})"), ParseError);
    CHECK_THROWS_AS(experiment_config_from_json(R"({"replicates":"many"})"), ParseError);
    CHECK_THROWS_AS(experiment_config_from_json("[1,2]"), ParseError);

    ExperimentConfig bad;
    bad.replicates = 0;
    CHECK_THROWS_AS(validate_experiment_config(bad), std::invalid_argument);
    bad = ExperimentConfig{};
    bad.node_counts = {0};
    CHECK_THROWS_AS(validate_experiment_config(bad), std::invalid_argument);
}

TEST_CASE("export_schedule_dot") {
    SUBCASE("path") {
        const Adjacency adj = testing::path_graph(3);
        const Schedule s{Direction::transmission_order, {{{2, 1}}, {{1, 0}}}};
        const std::string dot = export_schedule_dot(topology_for(3), adj, s);
        CHECK(count_lines(dot, "label=") == 2);
        CHECK(count_lines(dot, "style=dashed") == 0);
        CHECK(dot.find("2 -> 1 [label=\"1\"]") != std::string::npos);
        CHECK(dot.find("1 -> 0 [label=\"2\"]") != std::string::npos);
        CHECK(dot.find("fillcolor=red") != std::string::npos);
    }
    SUBCASE("triangle") {
        const Adjacency adj = testing::triangle();
        const Schedule s{Direction::transmission_order, {{{1, 0}}, {{2, 0}}}};
        const std::string dot = export_schedule_dot(topology_for(3), adj, s);
        CHECK(count_lines(dot, "label=") == 2);
        CHECK(count_lines(dot, "style=dashed") == 1);
        CHECK(dot.find("1 -> 2 [dir=none, style=dashed]") != std::string::npos);
    }
    SUBCASE("50 nodes") {
        ExperimentConfig c;
        c.train.episodes = 300;
        const ReplicateOutput out = run_replicate(c, 49, SinkPosition::center, 0);
        const Adjacency adj = build_adjacency(out.topology);
        const std::string dot = export_schedule_dot(out.topology, adj, out.qlearn);
        CHECK(count_lines(dot, "label=") == 49);
        CHECK(export_schedule_dot(out.topology, adj, out.qlearn) == dot);
    }
    SUBCASE("invalid schedules are refused") {
        const Schedule bad{Direction::transmission_order, {{{1, 0}, {2, 0}}}};
        CHECK_THROWS_AS(export_schedule_dot(topology_for(3), testing::triangle(), bad),
                        InvalidScheduleError);
    }
}

TEST_CASE("trace and summary formatting") {
    const std::string trace = trace_to_csv({{5, 1.0, 10.0}, {4, 0.5, 12.0}});
    CHECK(trace.rfind("episode,", 0) == 0);
    CHECK(count_lines(trace, ",") == 3);

    const auto summary = compare_results({row(50, SinkPosition::center, 0, 10, 9)});
    CHECK(count_lines(summary_to_csv(summary), "50,center") == 1);
    CHECK(format_summary(summary).find("50") != std::string::npos);
}
