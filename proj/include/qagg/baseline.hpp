#ifndef QAGG_BASELINE_HPP
#define QAGG_BASELINE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qagg/schedule.hpp"
#include "qagg/topology.hpp"

namespace qagg {

// Comparator schedulers. The BFS heuristic is a plain two-phase scheduler
// (fixed shortest-path tree, then greedy slot filling); it is not the
// break-and-join algorithm and only serves as a reference point.

struct BfsTree {
    std::vector<NodeId> parent;  // kNoNode for the sink
    std::vector<std::size_t> depth;
};

/// Shortest-hop tree from the sink; each node hangs under its lowest-id
/// neighbour one level up. Throws std::invalid_argument when disconnected.
BfsTree bfs_tree(const Adjacency& adjacency);

/// Slot-by-slot greedy over the BFS tree. A node is ready once all of its
/// children have transmitted. Each slot admits ready nodes in (depth desc,
/// id asc) order whenever the parent is free this slot and the slot stays
/// interference-free.
Schedule baseline_schedule(const Adjacency& adjacency);

struct ExactOptions {
    /// Refuse graphs with more sensors than this.
    std::size_t sensor_limit = 8;
    /// Upper bound on search nodes; hitting it yields Status::exhausted.
    std::uint64_t node_budget = 5'000'000;
};

struct ExactResult {
    enum class Status { optimal, exhausted };

    Status status = Status::optimal;
    /// Minimum delay when optimal, best found so far when exhausted.
    std::size_t delay = 0;
    Schedule schedule;
    std::uint64_t nodes_expanded = 0;
};

/// Exhaustive top-down search. At each state every sender set that admits a
/// collision-free aggregator assignment and cannot be extended by one more
/// sender is tried; restricting to such sets loses no optimal schedule because
/// pulling a later sender into an earlier slot never lengthens the schedule.
/// Pruned by the hop-distance lower bound, the incumbent, and a table of the
/// shallowest depth at which each aggregated set was reached. Throws
/// std::invalid_argument above the sensor limit or for a disconnected graph.
ExactResult brute_force_optimal(const Adjacency& adjacency, const ExactOptions& options = {});

}  // namespace qagg

#endif  // QAGG_BASELINE_HPP
