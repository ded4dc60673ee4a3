#include "qagg/batch_builder.hpp"

#include <stdexcept>
#include <string>

namespace qagg {

Partition::Partition(std::size_t node_count) : aggregated_(node_count) {
    if (node_count == 0) throw std::invalid_argument("partition over an empty network");
    aggregated_.insert(kSink);
    pending_ = aggregated_.complement();
}

Partition::Partition(NodeSet aggregated) : aggregated_(std::move(aggregated)) {
    if (!aggregated_.contains(kSink))
        throw std::invalid_argument("aggregated set must contain the sink");
    pending_ = aggregated_.complement();
}

NodeSet BatchResult::senders(std::size_t node_count) const {
    NodeSet out(node_count);
    for (const Link& l : links) out.insert(l.sender);
    return out;
}

NodeSet BatchResult::aggregators(std::size_t node_count) const {
    NodeSet out(node_count);
    for (const Link& l : links) out.insert(l.aggregator);
    return out;
}

NodeSet eligible_initial_senders(const Partition& partition, const Adjacency& adjacency) {
    NodeSet out(partition.node_count());
    partition.pending().for_each([&](NodeId u) {
        if (adjacency.row(u).intersects(partition.aggregated())) out.insert(u);
    });
    return out;
}

void remove_collisions(NodeId sender, NodeId aggregator, Candidates& pool,
                       const Adjacency& adjacency) {
    pool.senders.erase(sender);
    pool.senders.subtract(adjacency.row(aggregator));
    pool.aggregators.erase(aggregator);
    pool.aggregators.subtract(adjacency.row(sender));
}

std::optional<NodeId> select_aggregator(NodeId sender, const NodeSet& aggregator_pool,
                                        const NodeSet& pending, const Adjacency& adjacency) {
    std::optional<NodeId> best;
    std::size_t best_load = 0;
    for (NodeId v : adjacency.neighbors(sender)) {
        if (!aggregator_pool.contains(v)) continue;
        const std::size_t load = adjacency.row(v).intersection_size(pending);
        if (!best || load < best_load) {
            best = v;
            best_load = load;
        }
    }
    return best;
}

BatchResult greedy_spread(const Partition& partition, NodeId initial_sender,
                          const Adjacency& adjacency) {
    const NodeSet& aggregated = partition.aggregated();
    const NodeSet& pending = partition.pending();
    if (initial_sender >= partition.node_count() || !pending.contains(initial_sender) ||
        !adjacency.row(initial_sender).intersects(aggregated))
        throw std::invalid_argument("node " + std::to_string(initial_sender) +
                                    " is not an eligible initial sender");

    Candidates pool{NodeSet(partition.node_count()), NodeSet(partition.node_count())};
    pending.for_each([&](NodeId u) {
        if (u != initial_sender && adjacency.row(u).intersects(aggregated)) pool.senders.insert(u);
    });
    aggregated.for_each([&](NodeId u) {
        if (adjacency.row(u).intersects(pending)) pool.aggregators.insert(u);
    });

    BatchResult batch;
    // Every aggregated neighbour of an eligible sender has a pending neighbour
    // (the sender itself), so the first pick always succeeds.
    const NodeId first = *select_aggregator(initial_sender, pool.aggregators, pending, adjacency);
    batch.links.push_back({initial_sender, first});
    remove_collisions(initial_sender, first, pool, adjacency);

    while (!pool.senders.empty()) {
        NodeId next = kNoNode;
        std::size_t next_links = 0;
        pool.senders.for_each([&](NodeId u) {
            const std::size_t links = adjacency.row(u).intersection_size(aggregated);
            if (next == kNoNode || links < next_links) {
                next = u;
                next_links = links;
            }
        });
        const auto target = select_aggregator(next, pool.aggregators, pending, adjacency);
        if (!target) {
            pool.senders.erase(next);
            continue;
        }
        batch.links.push_back({next, *target});
        remove_collisions(next, *target, pool, adjacency);
    }
    return batch;
}

Partition apply_batch(const Partition& partition, const BatchResult& batch) {
    NodeSet aggregated = partition.aggregated();
    for (const Link& l : batch.links) aggregated.insert(l.sender);
    return Partition(std::move(aggregated));
}

}  // namespace qagg
