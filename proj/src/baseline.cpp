#include "qagg/baseline.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace qagg {

BfsTree bfs_tree(const Adjacency& adjacency) {
    const std::size_t n = adjacency.size();
    if (n == 0) return {};
    const auto dist = hop_distances(adjacency);
    BfsTree tree;
    tree.parent.assign(n, kNoNode);
    tree.depth.assign(n, 0);
    for (NodeId u = 0; u < n; ++u) {
        if (dist[u] == kNoNode) throw std::invalid_argument("bfs_tree: graph is disconnected");
        tree.depth[u] = dist[u];
        if (u == kSink) continue;
        for (NodeId v : adjacency.neighbors(u)) {
            if (dist[v] + 1 == dist[u]) {
                tree.parent[u] = v;  // neighbours are sorted, so this is the lowest id
                break;
            }
        }
    }
    return tree;
}

Schedule baseline_schedule(const Adjacency& adjacency) {
    const std::size_t n = adjacency.size();
    const BfsTree tree = bfs_tree(adjacency);
    Schedule schedule{Direction::transmission_order, {}};
    if (n <= 1) return schedule;

    std::vector<std::size_t> waiting_children(n, 0);
    for (NodeId u = 1; u < n; ++u) ++waiting_children[tree.parent[u]];

    std::vector<NodeId> order;
    for (NodeId u = 1; u < n; ++u) order.push_back(u);
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        if (tree.depth[a] != tree.depth[b]) return tree.depth[a] > tree.depth[b];
        return a < b;
    });

    std::vector<bool> sent(n, false);
    std::size_t remaining = n - 1;
    while (remaining > 0) {
        std::vector<NodeId> ready;
        for (NodeId u : order)
            if (!sent[u] && waiting_children[u] == 0) ready.push_back(u);

        Slot slot;
        NodeSet receivers(n);
        NodeSet senders(n);
        for (NodeId u : ready) {
            const NodeId p = tree.parent[u];
            if (receivers.contains(p)) continue;
            // u must not be heard at another receiver, and nobody already
            // sending may be heard at p.
            if (adjacency.row(u).intersects(receivers)) continue;
            if (adjacency.row(p).intersects(senders)) continue;
            slot.push_back({u, p});
            receivers.insert(p);
            senders.insert(u);
        }
        for (const Link& l : slot) {
            sent[l.sender] = true;
            --waiting_children[l.aggregator];
            --remaining;
        }
        schedule.slots.push_back(std::move(slot));
    }
    return schedule;
}

namespace {

class ExactSearch {
public:
    ExactSearch(const Adjacency& adjacency, const ExactOptions& options)
        : adj_(adjacency), options_(options), n_(adjacency.size()) {
        for (NodeId u = 0; u < n_; ++u) {
            std::uint64_t row = 0;
            for (NodeId v : adj_.neighbors(u)) row |= bit(v);
            rows_.push_back(row);
        }
    }

    ExactResult run() {
        ExactResult result;
        all_ = bit(static_cast<NodeId>(n_)) - 1;
        // The heuristic schedule is the starting incumbent, so a witness
        // exists even when the budget runs out.
        const Schedule incumbent = reverse_schedule(baseline_schedule(adj_));
        best_delay_ = delay_of(incumbent);
        best_ = incumbent.slots;
        dfs(bit(kSink), 0);
        result.status = exhausted_ ? ExactResult::Status::exhausted : ExactResult::Status::optimal;
        result.delay = best_delay_;
        result.schedule = to_transmission_order(Schedule{Direction::construction_order, best_});
        result.nodes_expanded = expanded_;
        return result;
    }

private:
    static std::uint64_t bit(NodeId v) { return std::uint64_t{1} << v; }

    // Largest hop distance from any pending node to the aggregated set.
    std::size_t lower_bound(std::uint64_t aggregated) const {
        std::uint64_t reached = aggregated;
        std::uint64_t frontier = aggregated;
        std::size_t hops = 0;
        while (reached != all_) {
            std::uint64_t next = 0;
            for (NodeId u = 0; u < n_; ++u)
                if (frontier & bit(u)) next |= rows_[u];
            next &= ~reached;
            if (next == 0) break;  // unreachable; cannot happen on connected input
            reached |= next;
            frontier = next;
            ++hops;
        }
        return hops;
    }

    // Lowest-id aggregated neighbour of `s` not adjacent to any other sender.
    std::optional<NodeId> private_aggregator(NodeId s, std::uint64_t senders,
                                             std::uint64_t aggregated) const {
        std::uint64_t heard = 0;
        for (NodeId o = 0; o < n_; ++o)
            if (o != s && (senders & bit(o))) heard |= rows_[o];
        const std::uint64_t options = rows_[s] & aggregated & ~heard;
        if (!options) return std::nullopt;
        return static_cast<NodeId>(std::countr_zero(options));
    }

    bool feasible(std::uint64_t senders, std::uint64_t aggregated) const {
        for (NodeId s = 0; s < n_; ++s)
            if ((senders & bit(s)) && !private_aggregator(s, senders, aggregated)) return false;
        return true;
    }

    void dfs(std::uint64_t aggregated, std::size_t depth) {
        if (aggregated == all_) {
            if (depth < best_delay_) {
                best_delay_ = depth;
                best_ = path_;
            }
            return;
        }
        if (expanded_ >= options_.node_budget) {
            exhausted_ = true;
            return;
        }
        ++expanded_;
        if (depth + lower_bound(aggregated) >= best_delay_) return;
        auto [it, fresh] = shallowest_.try_emplace(aggregated, depth);
        if (!fresh) {
            if (it->second <= depth) return;
            it->second = depth;
        }

        std::vector<NodeId> eligible;
        for (NodeId u = 0; u < n_; ++u)
            if (!(aggregated & bit(u)) && (rows_[u] & aggregated)) eligible.push_back(u);

        // Collect maximal feasible sender sets, largest first.
        std::vector<std::uint64_t> batches;
        const std::uint64_t subsets = std::uint64_t{1} << eligible.size();
        for (std::uint64_t mask = 1; mask < subsets; ++mask) {
            std::uint64_t senders = 0;
            for (std::size_t i = 0; i < eligible.size(); ++i)
                if (mask & (std::uint64_t{1} << i)) senders |= bit(eligible[i]);
            if (!feasible(senders, aggregated)) continue;
            bool maximal = true;
            for (NodeId u : eligible) {
                if (senders & bit(u)) continue;
                if (feasible(senders | bit(u), aggregated)) {
                    maximal = false;
                    break;
                }
            }
            if (maximal) batches.push_back(senders);
        }
        std::stable_sort(batches.begin(), batches.end(), [](std::uint64_t a, std::uint64_t b) {
            return std::popcount(a) > std::popcount(b);
        });

        for (std::uint64_t senders : batches) {
            Slot slot;
            for (NodeId s = 0; s < n_; ++s)
                if (senders & bit(s)) slot.push_back({s, *private_aggregator(s, senders, aggregated)});
            path_.push_back(std::move(slot));
            dfs(aggregated | senders, depth + 1);
            path_.pop_back();
            if (exhausted_) return;
        }
    }

    const Adjacency& adj_;
    ExactOptions options_;
    std::size_t n_;
    std::vector<std::uint64_t> rows_;
    std::uint64_t all_ = 0;
    std::size_t best_delay_ = std::numeric_limits<std::size_t>::max();
    std::vector<Slot> best_;
    std::vector<Slot> path_;
    std::unordered_map<std::uint64_t, std::size_t> shallowest_;
    std::uint64_t expanded_ = 0;
    bool exhausted_ = false;
};

}  // namespace

ExactResult brute_force_optimal(const Adjacency& adjacency, const ExactOptions& options) {
    const std::size_t n = adjacency.size();
    if (n == 0) throw std::invalid_argument("brute_force_optimal: empty network");
    if (n - 1 > options.sensor_limit)
        throw std::invalid_argument("brute_force_optimal: " + std::to_string(n - 1) +
                                    " sensors exceed the limit of " +
                                    std::to_string(options.sensor_limit));
    if (n > 63) throw std::invalid_argument("brute_force_optimal: at most 63 sensors supported");
    if (!is_connected(adjacency))
        throw std::invalid_argument("brute_force_optimal: graph is disconnected");
    return ExactSearch(adjacency, options).run();
}

}  // namespace qagg
