#ifndef QAGG_TOPOLOGY_HPP
#define QAGG_TOPOLOGY_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qagg/node_set.hpp"

namespace qagg {

/// Raised when a persisted document cannot be turned back into a value.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when random generation cannot meet its postconditions.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Node {
    NodeId id = 0;
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Node&, const Node&) = default;
};

struct Area {
    double width = 100.0;
    double height = 100.0;

    friend bool operator==(const Area&, const Area&) = default;
};

enum class SinkPosition { center, corner };

std::string_view to_string(SinkPosition pos);
SinkPosition parse_sink_position(std::string_view text);

/// Static deployment: node 0 is the sink, nodes 1..N are sensors.
struct Topology {
    std::vector<Node> nodes;
    NodeId sink_id = kSink;
    double range = 20.0;
    Area area;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t sensor_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }

    friend bool operator==(const Topology&, const Topology&) = default;
};

/// Throws std::invalid_argument describing the first broken invariant.
void validate_topology(const Topology& topology);

/// Undirected neighbour relation over nodes 0..n-1 with no self loops.
class Adjacency {
public:
    Adjacency() = default;
    explicit Adjacency(std::size_t node_count);

    /// Builds from an explicit edge list; used for hand-made graphs that have
    /// no geometric embedding.
    static Adjacency from_edges(std::size_t node_count,
                                const std::vector<std::pair<NodeId, NodeId>>& edges);

    void add_edge(NodeId u, NodeId v);

    std::size_t size() const { return rows_.size(); }
    bool adjacent(NodeId u, NodeId v) const { return rows_[u].contains(v); }
    const NodeSet& row(NodeId u) const { return rows_[u]; }
    /// Neighbours in ascending id order.
    const std::vector<NodeId>& neighbors(NodeId u) const { return lists_[u]; }
    std::size_t degree(NodeId u) const { return lists_[u].size(); }
    std::size_t edge_count() const;

    friend bool operator==(const Adjacency& a, const Adjacency& b) { return a.rows_ == b.rows_; }

private:
    std::vector<NodeSet> rows_;
    std::vector<std::vector<NodeId>> lists_;
};

/// Closed-disk unit disk graph: u~v iff distance(u, v) <= range.
Adjacency build_adjacency(const Topology& topology);

/// True iff a traversal from the sink reaches every node. A graph with no
/// nodes is reported as connected.
bool is_connected(const Adjacency& adjacency);

/// Hop distance from the sink to every node; unreachable nodes get kNoNode.
std::vector<NodeId> hop_distances(const Adjacency& adjacency, NodeId source = kSink);

/// Largest hop distance from the sink. Throws std::invalid_argument when the
/// graph is disconnected.
std::size_t sink_eccentricity(const Adjacency& adjacency);

struct GeneratorOptions {
    std::size_t sensors = 50;
    Area area;
    double range = 20.0;
    SinkPosition sink = SinkPosition::center;
    std::uint64_t seed = 1;
    std::size_t max_attempts = 1000;
};

/// Uniform random deployment, redrawn until connected.
///
/// Sensor coordinates come from std::mt19937_64 seeded with `seed`, converted
/// to [0, 1) by taking the top 53 bits and scaled to the area; draws are taken
/// in the order x then y for sensor ids 1, 2, ... On a disconnected draw every
/// sensor is redrawn from the same stream. After `max_attempts` disconnected
/// draws a GenerationError is thrown.
Topology generate_topology(const GeneratorOptions& options);

/// JSON document: {version, area{width,height}, range_R, sink_id, nodes[{id,x,y}]}.
std::string topology_to_json(const Topology& topology);
Topology topology_from_json(std::string_view text);

void save_topology(const Topology& topology, const std::filesystem::path& path);
Topology load_topology(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace qagg

#endif  // QAGG_TOPOLOGY_HPP
