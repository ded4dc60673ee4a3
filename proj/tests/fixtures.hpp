#ifndef QAGG_TESTS_FIXTURES_HPP
#define QAGG_TESTS_FIXTURES_HPP

#include <initializer_list>
#include <utility>
#include <vector>

#include "qagg/node_set.hpp"
#include "qagg/random.hpp"
#include "qagg/topology.hpp"

namespace qagg::testing {

// Letters of the eight-node example graph with sink A.
enum : NodeId { A = 0, B, C, D, E, F, G, H };

// Batch example graph: V_s = {A, B, C} reaches D..G; H hangs off G and is
// two hops from the aggregated set.
inline Adjacency batch_example() {
    return Adjacency::from_edges(8, {{A, B}, {A, C}, {B, D}, {C, D}, {B, E}, {C, F}, {C, G},
                                     {D, E}, {D, F}, {D, G}, {G, H}});
}

inline NodeSet set_of(std::size_t universe, std::initializer_list<NodeId> ids) {
    NodeSet s(universe);
    for (NodeId v : ids) s.insert(v);
    return s;
}

inline Adjacency path_graph(std::size_t n) {
    Adjacency adj(n);
    for (NodeId u = 0; u + 1 < n; ++u) adj.add_edge(u, u + 1);
    return adj;
}

inline Adjacency star_graph(std::size_t leaves) {
    Adjacency adj(leaves + 1);
    for (NodeId u = 1; u <= leaves; ++u) adj.add_edge(0, u);
    return adj;
}

inline Adjacency triangle() { return Adjacency::from_edges(3, {{0, 1}, {0, 2}, {1, 2}}); }

// Connected Erdos-Renyi style graph; used where geometry does not matter.
inline Adjacency random_connected_graph(std::size_t n, double p, Rng& rng) {
    while (true) {
        Adjacency adj(n);
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v)
                if (uniform01(rng) < p) adj.add_edge(u, v);
        if (is_connected(adj)) return adj;
    }
}

// Same graph with every sensor id passed through `perm`; the sink stays 0.
inline Adjacency relabel(const Adjacency& adj, const std::vector<NodeId>& perm) {
    Adjacency out(adj.size());
    for (NodeId u = 0; u < adj.size(); ++u)
        for (NodeId v : adj.neighbors(u))
            if (u < v) out.add_edge(perm[u], perm[v]);
    return out;
}

}  // namespace qagg::testing

#endif  // QAGG_TESTS_FIXTURES_HPP
