#include <doctest.h>

#include "fixtures.hpp"
#include "qagg/batch_builder.hpp"

using namespace qagg;
using namespace qagg::testing;

namespace {

Partition example_partition() { return Partition(set_of(8, {A, B, C})); }

// Interference-freedom written directly from the protocol model, independent
// of the collision-removal bookkeeping.
void check_batch_invariants(const BatchResult& batch, const Partition& p, const Adjacency& adj) {
    REQUIRE(batch.size() >= 1);
    for (const Link& l : batch.links) {
        CHECK(p.pending().contains(l.sender));
        CHECK(p.aggregated().contains(l.aggregator));
        CHECK(adj.adjacent(l.sender, l.aggregator));
        for (const Link& o : batch.links) {
            if (&o == &l) continue;
            CHECK(o.sender != l.sender);
            CHECK(o.aggregator != l.aggregator);
            CHECK_FALSE(adj.adjacent(o.sender, l.aggregator));
        }
    }
    CHECK(batch.senders(p.node_count()).size() == batch.size());
    CHECK(batch.aggregators(p.node_count()).size() == batch.size());
}

}  // namespace

TEST_CASE("eligible_initial_senders") {
    const Adjacency adj = batch_example();
    CHECK(eligible_initial_senders(example_partition(), adj) == set_of(8, {D, E, F, G}));
    CHECK(eligible_initial_senders(Partition(3), path_graph(3)) == set_of(3, {1}));

    NodeSet everyone(3);
    for (NodeId v = 0; v < 3; ++v) everyone.insert(v);
    CHECK(eligible_initial_senders(Partition(everyone), path_graph(3)).empty());
}

TEST_CASE("remove_collisions applies the four removals") {
    const Adjacency adj = batch_example();

    SUBCASE("D to B wipes out every other option") {
        Candidates pool{set_of(8, {E, F, G}), set_of(8, {B, C})};
        remove_collisions(D, B, pool, adj);
        CHECK(pool.senders == set_of(8, {F, G}));
        CHECK(pool.aggregators.empty());
    }
    SUBCASE("E to B leaves C open for F or G") {
        Candidates pool{set_of(8, {D, F, G}), set_of(8, {B, C})};
        remove_collisions(E, B, pool, adj);
        CHECK(pool.senders == set_of(8, {F, G}));
        CHECK(pool.aggregators == set_of(8, {C}));
    }
    SUBCASE("sender without candidate neighbours only costs its aggregator") {
        // H is adjacent to G only; removing the pair (H, G) touches nothing else.
        Candidates pool{set_of(8, {E}), set_of(8, {B, C, G})};
        remove_collisions(H, G, pool, adj);
        CHECK(pool.senders == set_of(8, {E}));
        CHECK(pool.aggregators == set_of(8, {B, C}));
    }
}

TEST_CASE("select_aggregator") {
    const Adjacency adj = batch_example();
    const Partition p = example_partition();
    CHECK(select_aggregator(E, set_of(8, {B, C}), p.pending(), adj) == B);
    // D sees B (pending neighbours D, E) and C (D, F, G).
    CHECK(select_aggregator(D, set_of(8, {B, C}), p.pending(), adj) == B);
    CHECK_FALSE(select_aggregator(F, set_of(8, {B}), p.pending(), adj).has_value());

    // Hub 1 with pending load 3, hub 2 with load 1; sender 3 sees both.
    const Adjacency hubs = Adjacency::from_edges(
        8, {{0, 1}, {0, 2}, {3, 1}, {3, 2}, {1, 4}, {1, 5}, {6, 7}, {0, 6}});
    const Partition q(set_of(8, {0, 1, 2, 6}));
    CHECK(select_aggregator(3, set_of(8, {1, 2}), q.pending(), hubs) == 2);

    // Equal loads: lowest id.
    const Adjacency tie = Adjacency::from_edges(4, {{0, 1}, {0, 2}, {3, 1}, {3, 2}});
    const Partition t(set_of(4, {0, 1, 2}));
    CHECK(select_aggregator(3, set_of(4, {1, 2}), t.pending(), tie) == 1);
}

TEST_CASE("greedy_spread on the example graph") {
    const Adjacency adj = batch_example();
    const Partition p = example_partition();

    const BatchResult from_d = greedy_spread(p, D, adj);
    CHECK(from_d.size() == 1);
    CHECK(from_d.links[0] == Link{D, B});

    const BatchResult from_e = greedy_spread(p, E, adj);
    REQUIRE(from_e.size() == 2);
    CHECK(from_e.links[0] == Link{E, B});
    CHECK(from_e.links[1] == Link{F, C});

    CHECK_THROWS_AS(greedy_spread(p, H, adj), std::invalid_argument);
    CHECK_THROWS_AS(greedy_spread(p, B, adj), std::invalid_argument);

    const BatchResult chain = greedy_spread(Partition(3), 1, path_graph(3));
    REQUIRE(chain.size() == 1);
    CHECK(chain.links[0] == Link{1, 0});
}

TEST_CASE("apply_batch") {
    const Partition start(3);
    const Partition next = apply_batch(start, greedy_spread(start, 1, path_graph(3)));
    CHECK(next.aggregated() == set_of(3, {0, 1}));
    CHECK_FALSE(next.done());
    const Partition last = apply_batch(next, greedy_spread(next, 2, path_graph(3)));
    CHECK(last.done());
    CHECK(last.aggregated().size() == 3);
}

TEST_CASE("greedy batches are interference-free and deterministic (randomized)") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + uniform_index(rng, 40);
        const Adjacency adj = random_connected_graph(n, 0.05 + 0.4 * uniform01(rng), rng);

        // Random reachable partition: run a few random batches from {sink}.
        Partition p(n);
        const std::size_t steps = uniform_index(rng, n / 2 + 1);
        for (std::size_t k = 0; k < steps && !p.done(); ++k) {
            const auto eligible = eligible_initial_senders(p, adj).to_vector();
            p = apply_batch(p, greedy_spread(p, eligible[uniform_index(rng, eligible.size())], adj));
        }
        if (p.done()) continue;

        const NodeSet eligible = eligible_initial_senders(p, adj);
        REQUIRE_FALSE(eligible.empty());
        eligible.for_each([&](NodeId a) {
            const BatchResult batch = greedy_spread(p, a, adj);
            check_batch_invariants(batch, p, adj);
            CHECK(batch.links.front().sender == a);
            const BatchResult again = greedy_spread(p, a, adj);
            CHECK(again.links == batch.links);
            const Partition next = apply_batch(p, batch);
            CHECK(next.aggregated().size() == p.aggregated().size() + batch.size());
        });
    }
}
