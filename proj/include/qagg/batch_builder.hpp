#ifndef QAGG_BATCH_BUILDER_HPP
#define QAGG_BATCH_BUILDER_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "qagg/node_set.hpp"
#include "qagg/schedule.hpp"
#include "qagg/topology.hpp"

namespace qagg {

/// Split of the nodes into those already placed in the (top-down) schedule and
/// those still pending. The sink is always aggregated.
class Partition {
public:
    /// Initial partition: only the sink is aggregated.
    explicit Partition(std::size_t node_count);
    /// Throws std::invalid_argument when `aggregated` lacks the sink.
    explicit Partition(NodeSet aggregated);

    const NodeSet& aggregated() const { return aggregated_; }
    const NodeSet& pending() const { return pending_; }
    std::size_t node_count() const { return aggregated_.universe(); }
    bool done() const { return pending_.empty(); }

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    NodeSet aggregated_;
    NodeSet pending_;
};

/// Senders that transmit together in one slot with their aggregators.
struct BatchResult {
    std::vector<Link> links;

    std::size_t size() const { return links.size(); }
    NodeSet senders(std::size_t node_count) const;
    NodeSet aggregators(std::size_t node_count) const;
};

/// Pending nodes with at least one aggregated neighbour: the action space.
NodeSet eligible_initial_senders(const Partition& partition, const Adjacency& adjacency);

/// Candidate pools for one batch.
struct Candidates {
    NodeSet senders;      // T_cand
    NodeSet aggregators;  // C_cand
};

/// Drops the chosen sender, every candidate sender that would collide at the
/// chosen aggregator, the chosen aggregator, and every candidate aggregator
/// the chosen sender would disturb.
void remove_collisions(NodeId sender, NodeId aggregator, Candidates& pool,
                       const Adjacency& adjacency);

/// Neighbour of `sender` in `aggregator_pool` with the fewest pending
/// neighbours, lowest id on ties; nullopt when there is none.
std::optional<NodeId> select_aggregator(NodeId sender, const NodeSet& aggregator_pool,
                                        const NodeSet& pending, const Adjacency& adjacency);

/// Grows the batch started by `initial_sender`: after pairing it, repeatedly
/// takes the candidate sender with the fewest aggregated neighbours (lowest id
/// on ties) and pairs it via select_aggregator, pruning collisions after every
/// pick. A candidate left with no usable aggregator is discarded. Throws
/// std::invalid_argument if `initial_sender` is not eligible.
BatchResult greedy_spread(const Partition& partition, NodeId initial_sender,
                          const Adjacency& adjacency);

/// Moves the batch's senders into the aggregated set.
Partition apply_batch(const Partition& partition, const BatchResult& batch);

}  // namespace qagg

#endif  // QAGG_BATCH_BUILDER_HPP
