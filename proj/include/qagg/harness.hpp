#ifndef QAGG_HARNESS_HPP
#define QAGG_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qagg/qlearn.hpp"
#include "qagg/schedule.hpp"
#include "qagg/topology.hpp"

namespace qagg {

/// Thrown when a scheduler emits a schedule that fails validation. Carries the
/// replicate seed so the run can be reproduced.
class InvalidScheduleError : public std::runtime_error {
public:
    InvalidScheduleError(const std::string& what, ValidationReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

struct ExperimentConfig {
    std::vector<std::size_t> node_counts{50, 100, 150, 200, 250, 300};
    std::vector<SinkPosition> sinks{SinkPosition::center, SinkPosition::corner};
    std::size_t replicates = 30;
    std::uint64_t base_seed = 1;
    Area area;
    double range = 20.0;
    TrainConfig train;
    /// Worker threads for replicates; output order does not depend on it.
    std::size_t jobs = 1;
};

void validate_experiment_config(const ExperimentConfig& config);

/// Reads a JSON config; keys absent from the document keep the values already
/// in `defaults`. Unknown keys are rejected.
ExperimentConfig experiment_config_from_json(std::string_view text,
                                             const ExperimentConfig& defaults = {});
std::string experiment_config_to_json(const ExperimentConfig& config);

/// Seed derivation for one replicate: seed = base + replicate; the topology
/// generator uses it unchanged and the training RNG uses seed + offset.
struct ReplicateSeeds {
    static constexpr std::uint64_t kTrainingOffset = 1'000'003;

    std::uint64_t seed;
    std::uint64_t topology;
    std::uint64_t training;
};
ReplicateSeeds derive_seeds(std::uint64_t base_seed, std::size_t replicate);

struct ResultRow {
    std::size_t nodes = 0;
    SinkPosition sink = SinkPosition::center;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::size_t eccentricity = 0;
    std::size_t baseline_delay = 0;
    std::size_t qlearn_delay = 0;
    double improvement_pct = 0.0;
    /// Wall clock for the replicate; excluded from the results table so the
    /// table stays reproducible byte for byte.
    double seconds = 0.0;
};

double improvement_percent(double baseline, double qlearn);

struct ReplicateOutput {
    ResultRow row;
    Topology topology;
    Schedule baseline;
    Schedule qlearn;
};

/// Generates one topology, schedules it with both methods and validates both
/// schedules, throwing InvalidScheduleError on any violation.
ReplicateOutput run_replicate(const ExperimentConfig& config, std::size_t nodes,
                              SinkPosition sink, std::size_t replicate);

using ProgressFn = std::function<void(const ResultRow&)>;

/// Every (node count, sink, replicate) combination, rows ordered by the
/// config's node list, then sink list, then replicate index.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const ProgressFn& progress = {});

struct SummaryRow {
    std::size_t nodes = 0;
    SinkPosition sink = SinkPosition::center;
    std::size_t count = 0;
    double mean_baseline = 0.0;
    double mean_qlearn = 0.0;
    /// Mean of the per-replicate improvement percentages.
    double mean_improvement_pct = 0.0;
    /// Improvement of the mean delays, as plotted per network size.
    double improvement_of_means_pct = 0.0;
};

/// Groups rows by (nodes, sink) in first-seen order. Throws
/// std::invalid_argument for an empty table or when a group holds the same
/// replicate twice (rows from different sweeps mixed together).
std::vector<SummaryRow> compare_results(const std::vector<ResultRow>& rows);

/// Header plus one line per row; each (nodes, sink) group is followed by a
/// line whose replicate column reads "mean".
std::string results_to_csv(const std::vector<ResultRow>& rows);
/// Parses results_to_csv output, skipping the mean lines.
std::vector<ResultRow> results_from_csv(std::string_view text);
std::string timings_to_csv(const std::vector<ResultRow>& rows);
std::string summary_to_csv(const std::vector<SummaryRow>& summary);
/// Human-readable tables: mean delays per sink position plus improvement.
std::string format_summary(const std::vector<SummaryRow>& summary);

/// Per-episode trace for convergence plots.
std::string trace_to_csv(const std::vector<EpisodeRecord>& trace);

/// Graphviz document: tree links as labelled arrows sender -> aggregator,
/// remaining radio links dashed and undirected, each node tagged with its
/// transmission slot. Throws InvalidScheduleError when the schedule does not
/// validate.
std::string export_schedule_dot(const Topology& topology, const Adjacency& adjacency,
                                const Schedule& schedule);

}  // namespace qagg

#endif  // QAGG_HARNESS_HPP
