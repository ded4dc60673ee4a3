#ifndef QAGG_QLEARN_HPP
#define QAGG_QLEARN_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qagg/batch_builder.hpp"
#include "qagg/node_set.hpp"
#include "qagg/random.hpp"
#include "qagg/schedule.hpp"
#include "qagg/topology.hpp"

namespace qagg {

/// How aggregated sets are turned into Q-table keys.
///
/// canonical: the membership bitmap packed little-endian with trailing zero
/// bytes dropped. Injective, so distinct sets never share Q-values.
/// digest: 64-bit FNV-1a of the canonical bytes. Constant width, but two sets
/// can collide and then share a row.
enum class KeyMode { canonical, digest };

std::string_view to_string(KeyMode mode);
KeyMode parse_key_mode(std::string_view text);

using StateKey = std::string;

StateKey canonical_state_key(const NodeSet& aggregated, KeyMode mode = KeyMode::canonical);

/// Text form used in Q-table files: ascending ids separated by spaces for
/// canonical keys, 16 hex digits for digests.
std::string describe_state_key(const StateKey& key, KeyMode mode);
StateKey parse_state_key(std::string_view text, KeyMode mode);

struct ActionValue {
    NodeId action = 0;
    double value = 0.0;

    friend bool operator==(const ActionValue&, const ActionValue&) = default;
};

/// Sparse Q(s, a). Rows and entries appear on first write; anything missing
/// reads as 0.
class QTable {
public:
    explicit QTable(KeyMode mode = KeyMode::canonical) : mode_(mode) {}

    KeyMode key_mode() const { return mode_; }
    std::size_t state_count() const { return rows_.size(); }
    std::size_t entry_count() const;
    bool empty() const { return rows_.empty(); }

    double value(const StateKey& state, NodeId action) const;
    /// Largest stored value in the row, 0 when the row is missing or empty.
    double max_value(const StateKey& state) const;
    void set(const StateKey& state, NodeId action, double value);
    /// Entries of one row sorted by action id; nullptr for unseen states.
    const std::vector<ActionValue>* row(const StateKey& state) const;

    const std::unordered_map<StateKey, std::vector<ActionValue>>& rows() const { return rows_; }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    KeyMode mode_;
    std::unordered_map<StateKey, std::vector<ActionValue>> rows_;
};

struct TrainConfig {
    double alpha = 0.1;
    double gamma = 0.9;
    double epsilon_init = 1.0;
    /// Linear decay per episode. Unset means 1/episodes, evaluated as
    /// k/episodes so the schedule is exact in floating point.
    std::optional<double> epsilon_decay;
    std::size_t episodes = 20000;
    std::uint64_t seed = 1;
    KeyMode key_mode = KeyMode::canonical;
};

/// Throws std::invalid_argument on out-of-range hyperparameters.
void validate_config(const TrainConfig& config);

/// Exploration rate used during episode k (0-based): max(eps0 - k*decay, 0).
double epsilon_at(const TrainConfig& config, std::size_t episode);

/// Q + alpha * (reward + gamma * max_next - Q).
inline double bellman_update(double q, double reward, double max_next, double alpha,
                             double gamma) {
    return q + alpha * (reward + gamma * max_next - q);
}

inline double reward_of(const BatchResult& batch) {
    const auto t = static_cast<double>(batch.size());
    return t * t;
}

/// Highest-valued eligible action, unseen entries counting as 0, lowest id on
/// ties. `eligible` must be sorted ascending.
NodeId greedy_action(const QTable& q, const StateKey& state, const std::vector<NodeId>& eligible);

/// Epsilon-greedy: one uniform draw decides between a uniformly random
/// eligible node and greedy_action. Throws std::invalid_argument when
/// `eligible` is empty.
NodeId choose_action(const QTable& q, const StateKey& state, const std::vector<NodeId>& eligible,
                     double epsilon, Rng& rng);

struct EpisodeRecord {
    std::size_t delay = 0;
    double epsilon = 0.0;
    double total_reward = 0.0;
};

struct TrainOutcome {
    std::size_t best_delay = 0;
    Schedule best_schedule;
    /// Snapshot of the table taken right after the best episode.
    QTable best_qtable;
    /// Table after the last episode.
    QTable qtable;
    std::vector<EpisodeRecord> trace;
};

/// Tabular Q-learning over top-down batch construction. Every episode starts
/// from {sink}, picks an initial sender per step, expands it with
/// greedy_spread, rewards |T|^2 and applies one Bellman update. The best
/// episode's schedule and a copy of the table at that point are kept. Throws
/// std::invalid_argument for a disconnected graph or invalid config.
TrainOutcome train(const Adjacency& adjacency, const TrainConfig& config);

/// One exploitation-only rollout, returned in transmission order.
Schedule evaluate_greedy(const Adjacency& adjacency, const QTable& qtable);

struct QlearnResult {
    TrainOutcome training;
    Schedule greedy_schedule;
    /// The shorter of the best training episode and the greedy rollout
    /// (training episode wins ties).
    Schedule schedule;
};

/// train() followed by evaluate_greedy() on the best table.
QlearnResult run_qlearning(const Adjacency& adjacency, const TrainConfig& config);

std::string qtable_to_json(const QTable& table);
QTable qtable_from_json(std::string_view text);
void save_qtable(const QTable& table, const std::filesystem::path& path);
QTable load_qtable(const std::filesystem::path& path);

}  // namespace qagg

#endif  // QAGG_QLEARN_HPP
