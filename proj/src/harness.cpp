#include "qagg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qagg/baseline.hpp"

namespace qagg {

namespace {

using nlohmann::json;

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::uint64_t parse_u64(std::string_view text, const char* field) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError(std::string("results: bad value for '") + field + "': '" +
                         std::string(text) + "'");
    return v;
}

double parse_double(std::string_view text, const char* field) {
    const std::string s(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw ParseError(std::string("results: bad value for '") + field + "': '" + s + "'");
    return v;
}

void check_schedule(const Schedule& schedule, const Adjacency& adjacency, const char* method,
                    const ResultRow& row) {
    ValidationReport report = validate_schedule(schedule, adjacency);
    if (!report.valid()) {
        std::ostringstream msg;
        msg << method << " schedule invalid for nodes=" << row.nodes
            << " sink=" << to_string(row.sink) << " replicate=" << row.replicate
            << " seed=" << row.seed << ": " << report.summary();
        throw InvalidScheduleError(msg.str(), std::move(report));
    }
}

constexpr const char* kResultsHeader =
    "nodes,sink,replicate,seed,eccentricity,baseline_delay,qlearn_delay,improvement_pct";

}  // namespace

void validate_experiment_config(const ExperimentConfig& c) {
    if (c.node_counts.empty()) throw std::invalid_argument("node_counts must not be empty");
    for (std::size_t n : c.node_counts)
        if (n < 1) throw std::invalid_argument("node counts must be at least 1");
    if (c.sinks.empty()) throw std::invalid_argument("sinks must not be empty");
    if (c.replicates < 1) throw std::invalid_argument("replicates must be at least 1");
    if (!(c.range > 0.0)) throw std::invalid_argument("range must be positive");
    if (c.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
    validate_config(c.train);
}

ExperimentConfig experiment_config_from_json(std::string_view text,
                                             const ExperimentConfig& defaults) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config: document must be an object");

    ExperimentConfig c = defaults;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "node_counts") {
                c.node_counts = value.get<std::vector<std::size_t>>();
            } else if (key == "sinks") {
                c.sinks.clear();
                for (const auto& s : value) c.sinks.push_back(parse_sink_position(s.get<std::string>()));
            } else if (key == "replicates") {
                c.replicates = value.get<std::size_t>();
            } else if (key == "seed") {
                c.base_seed = value.get<std::uint64_t>();
            } else if (key == "width") {
                c.area.width = value.get<double>();
            } else if (key == "height") {
                c.area.height = value.get<double>();
            } else if (key == "range") {
                c.range = value.get<double>();
            } else if (key == "alpha") {
                c.train.alpha = value.get<double>();
            } else if (key == "gamma") {
                c.train.gamma = value.get<double>();
            } else if (key == "epsilon_init") {
                c.train.epsilon_init = value.get<double>();
            } else if (key == "epsilon_decay") {
                if (value.is_null())
                    c.train.epsilon_decay.reset();
                else
                    c.train.epsilon_decay = value.get<double>();
            } else if (key == "episodes") {
                c.train.episodes = value.get<std::size_t>();
            } else if (key == "key_mode") {
                c.train.key_mode = parse_key_mode(value.get<std::string>());
            } else if (key == "jobs") {
                c.jobs = value.get<std::size_t>();
            } else {
                throw ParseError("config: unknown field '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: wrong type: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return c;
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
    json doc;
    doc["node_counts"] = c.node_counts;
    json sinks = json::array();
    for (SinkPosition s : c.sinks) sinks.push_back(std::string(to_string(s)));
    doc["sinks"] = sinks;
    doc["replicates"] = c.replicates;
    doc["seed"] = c.base_seed;
    doc["width"] = c.area.width;
    doc["height"] = c.area.height;
    doc["range"] = c.range;
    doc["alpha"] = c.train.alpha;
    doc["gamma"] = c.train.gamma;
    doc["epsilon_init"] = c.train.epsilon_init;
    doc["epsilon_decay"] = c.train.epsilon_decay ? json(*c.train.epsilon_decay) : json(nullptr);
    doc["episodes"] = c.train.episodes;
    doc["key_mode"] = std::string(to_string(c.train.key_mode));
    doc["jobs"] = c.jobs;
    return doc.dump(2) + "\n";
}

ReplicateSeeds derive_seeds(std::uint64_t base_seed, std::size_t replicate) {
    const std::uint64_t seed = base_seed + replicate;
    return {seed, seed, seed + ReplicateSeeds::kTrainingOffset};
}

double improvement_percent(double baseline, double qlearn) {
    return baseline == 0.0 ? 0.0 : 100.0 * (baseline - qlearn) / baseline;
}

ReplicateOutput run_replicate(const ExperimentConfig& config, std::size_t nodes,
                              SinkPosition sink, std::size_t replicate) {
    const auto start = std::chrono::steady_clock::now();
    const ReplicateSeeds seeds = derive_seeds(config.base_seed, replicate);

    ReplicateOutput out;
    out.row.nodes = nodes;
    out.row.sink = sink;
    out.row.replicate = replicate;
    out.row.seed = seeds.seed;

    GeneratorOptions gen;
    gen.sensors = nodes;
    gen.area = config.area;
    gen.range = config.range;
    gen.sink = sink;
    gen.seed = seeds.topology;
    out.topology = generate_topology(gen);
    const Adjacency adjacency = build_adjacency(out.topology);
    out.row.eccentricity = sink_eccentricity(adjacency);

    out.baseline = baseline_schedule(adjacency);
    check_schedule(out.baseline, adjacency, "baseline", out.row);

    TrainConfig train = config.train;
    train.seed = seeds.training;
    QlearnResult q = run_qlearning(adjacency, train);
    check_schedule(q.schedule, adjacency, "q-learning", out.row);
    out.qlearn = std::move(q.schedule);

    out.row.baseline_delay = delay_of(out.baseline);
    out.row.qlearn_delay = delay_of(out.qlearn);
    if (out.row.baseline_delay < out.row.eccentricity || out.row.qlearn_delay < out.row.eccentricity)
        throw std::logic_error("delay below the sink eccentricity bound (seed " +
                               std::to_string(seeds.seed) + ")");
    out.row.improvement_pct = improvement_percent(static_cast<double>(out.row.baseline_delay),
                                                  static_cast<double>(out.row.qlearn_delay));
    out.row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
    validate_experiment_config(config);

    struct Task {
        std::size_t nodes;
        SinkPosition sink;
        std::size_t replicate;
    };
    std::vector<Task> tasks;
    for (std::size_t n : config.node_counts)
        for (SinkPosition s : config.sinks)
            for (std::size_t r = 0; r < config.replicates; ++r) tasks.push_back({n, s, r});

    std::vector<ResultRow> rows(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                rows[i] = run_replicate(config, tasks[i].nodes, tasks[i].sink, tasks[i].replicate).row;
                if (progress) {
                    std::lock_guard lock(progress_mutex);
                    progress(rows[i]);
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const std::size_t workers = std::min(config.jobs, tasks.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

std::vector<SummaryRow> compare_results(const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("compare_results: no rows");

    std::vector<SummaryRow> out;
    std::map<std::pair<std::size_t, int>, std::size_t> index;
    std::map<std::pair<std::size_t, int>, std::vector<std::size_t>> seen_replicates;
    for (const ResultRow& r : rows) {
        const auto key = std::make_pair(r.nodes, static_cast<int>(r.sink));
        auto& reps = seen_replicates[key];
        if (std::find(reps.begin(), reps.end(), r.replicate) != reps.end())
            throw std::invalid_argument("compare_results: replicate " + std::to_string(r.replicate) +
                                        " appears twice for nodes=" + std::to_string(r.nodes) +
                                        " sink=" + std::string(to_string(r.sink)) +
                                        " (mixed sweeps?)");
        reps.push_back(r.replicate);

        auto [it, fresh] = index.try_emplace(key, out.size());
        if (fresh) out.push_back(SummaryRow{r.nodes, r.sink});
        SummaryRow& s = out[it->second];
        ++s.count;
        s.mean_baseline += static_cast<double>(r.baseline_delay);
        s.mean_qlearn += static_cast<double>(r.qlearn_delay);
        s.mean_improvement_pct += r.improvement_pct;
    }
    for (SummaryRow& s : out) {
        const auto n = static_cast<double>(s.count);
        s.mean_baseline /= n;
        s.mean_qlearn /= n;
        s.mean_improvement_pct /= n;
        s.improvement_of_means_pct = improvement_percent(s.mean_baseline, s.mean_qlearn);
    }
    return out;
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << kResultsHeader << '\n';
    if (rows.empty()) return out.str();
    const auto summary = compare_results(rows);
    for (const SummaryRow& s : summary) {
        for (const ResultRow& r : rows) {
            if (r.nodes != s.nodes || r.sink != s.sink) continue;
            out << r.nodes << ',' << to_string(r.sink) << ',' << r.replicate << ',' << r.seed << ','
                << r.eccentricity << ',' << r.baseline_delay << ',' << r.qlearn_delay << ','
                << fixed(r.improvement_pct, 6) << '\n';
        }
        out << s.nodes << ',' << to_string(s.sink) << ",mean,,," << fixed(s.mean_baseline, 4)
            << ',' << fixed(s.mean_qlearn, 4) << ',' << fixed(s.mean_improvement_pct, 6) << '\n';
    }
    return out.str();
}

std::vector<ResultRow> results_from_csv(std::string_view text) {
    std::vector<ResultRow> rows;
    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != kResultsHeader) throw ParseError("results: unexpected header");
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 8)
            throw ParseError("results: line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " columns, expected 8");
        if (cells[2] == "mean") continue;
        ResultRow r;
        r.nodes = parse_u64(cells[0], "nodes");
        try {
            r.sink = parse_sink_position(cells[1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string("results: ") + e.what());
        }
        r.replicate = parse_u64(cells[2], "replicate");
        r.seed = parse_u64(cells[3], "seed");
        r.eccentricity = parse_u64(cells[4], "eccentricity");
        r.baseline_delay = parse_u64(cells[5], "baseline_delay");
        r.qlearn_delay = parse_u64(cells[6], "qlearn_delay");
        r.improvement_pct = parse_double(cells[7], "improvement_pct");
        rows.push_back(r);
    }
    return rows;
}

std::string timings_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "nodes,sink,replicate,seconds\n";
    for (const ResultRow& r : rows)
        out << r.nodes << ',' << to_string(r.sink) << ',' << r.replicate << ','
            << fixed(r.seconds, 3) << '\n';
    return out.str();
}

std::string summary_to_csv(const std::vector<SummaryRow>& summary) {
    std::ostringstream out;
    out << "nodes,sink,count,mean_baseline,mean_qlearn,mean_improvement_pct,"
           "improvement_of_means_pct\n";
    for (const SummaryRow& s : summary)
        out << s.nodes << ',' << to_string(s.sink) << ',' << s.count << ','
            << fixed(s.mean_baseline, 4) << ',' << fixed(s.mean_qlearn, 4) << ','
            << fixed(s.mean_improvement_pct, 4) << ',' << fixed(s.improvement_of_means_pct, 4)
            << '\n';
    return out.str();
}

std::string format_summary(const std::vector<SummaryRow>& summary) {
    std::ostringstream out;
    for (SinkPosition pos : {SinkPosition::center, SinkPosition::corner}) {
        bool any = false;
        for (const SummaryRow& s : summary) any = any || s.sink == pos;
        if (!any) continue;
        out << "Average aggregation delay (sink " << to_string(pos) << ")\n";
        out << "  nodes  runs  baseline  q-learning  improvement%\n";
        for (const SummaryRow& s : summary) {
            if (s.sink != pos) continue;
            char line[128];
            std::snprintf(line, sizeof line, "  %5zu  %4zu  %8.2f  %10.2f  %12.2f\n", s.nodes,
                          s.count, s.mean_baseline, s.mean_qlearn, s.improvement_of_means_pct);
            out << line;
        }
    }
    return out.str();
}

std::string trace_to_csv(const std::vector<EpisodeRecord>& trace) {
    std::ostringstream out;
    out << "episode,delay,epsilon,total_reward\n";
    for (std::size_t k = 0; k < trace.size(); ++k)
        out << k << ',' << trace[k].delay << ',' << fixed(trace[k].epsilon, 8) << ','
            << fixed(trace[k].total_reward, 1) << '\n';
    return out.str();
}

std::string export_schedule_dot(const Topology& topology, const Adjacency& adjacency,
                                const Schedule& schedule) {
    ValidationReport report = validate_schedule(schedule, adjacency);
    if (!report.valid())
        throw InvalidScheduleError("cannot export an invalid schedule: " + report.summary(),
                                   std::move(report));
    const std::size_t n = adjacency.size();
    const AggregationTree tree = schedule_to_tree(schedule, adjacency);
    const auto slot_of = transmission_slots(schedule, n);

    std::ostringstream out;
    out << "digraph aggregation {\n";
    out << "  graph [delay=" << delay_of(schedule) << "];\n";
    out << "  node [shape=circle];\n";
    for (NodeId u = 0; u < n; ++u) {
        out << "  " << u << " [slot=" << slot_of[u];
        if (u < topology.nodes.size()) {
            char pos[96];
            std::snprintf(pos, sizeof pos, "%.6f,%.6f", topology.nodes[u].x, topology.nodes[u].y);
            out << ", pos=\"" << pos << "!\"";
        }
        if (u == kSink) out << ", style=filled, fillcolor=red";
        out << "];\n";
    }
    for (NodeId u = 1; u < n; ++u)
        out << "  " << u << " -> " << tree.parent[u] << " [label=\"" << slot_of[u] << "\"];\n";
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v : adjacency.neighbors(u)) {
            if (v <= u || tree.parent[u] == v || tree.parent[v] == u) continue;
            out << "  " << u << " -> " << v << " [dir=none, style=dashed];\n";
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace qagg
