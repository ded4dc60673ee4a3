#include "qagg/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "qagg/random.hpp"

namespace qagg {

namespace {

constexpr int kTopologyVersion = 1;

using nlohmann::json;

const json& require(const json& obj, const char* field, const std::string& where) {
    if (!obj.is_object() || !obj.contains(field))
        throw ParseError("topology: missing field '" + where + field + "'");
    return obj.at(field);
}

double require_number(const json& obj, const char* field, const std::string& where) {
    const json& v = require(obj, field, where);
    if (!v.is_number())
        throw ParseError("topology: field '" + where + field + "' must be a number");
    return v.get<double>();
}

std::uint64_t require_unsigned(const json& obj, const char* field, const std::string& where) {
    const json& v = require(obj, field, where);
    if (!v.is_number_unsigned())
        throw ParseError("topology: field '" + where + field + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

}  // namespace

std::string_view to_string(SinkPosition pos) {
    return pos == SinkPosition::center ? "center" : "corner";
}

SinkPosition parse_sink_position(std::string_view text) {
    if (text == "center") return SinkPosition::center;
    if (text == "corner") return SinkPosition::corner;
    throw std::invalid_argument("unknown sink position '" + std::string(text) +
                                "' (expected center or corner)");
}

void validate_topology(const Topology& t) {
    if (!(t.range > 0.0) || !std::isfinite(t.range))
        throw std::invalid_argument("range_R must be positive and finite");
    if (!(t.area.width >= 0.0) || !(t.area.height >= 0.0) || !std::isfinite(t.area.width) ||
        !std::isfinite(t.area.height))
        throw std::invalid_argument("area dimensions must be finite and non-negative");
    if (t.sink_id != kSink) throw std::invalid_argument("sink_id must be 0");
    if (t.nodes.empty()) throw std::invalid_argument("topology has no nodes (sink missing)");
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const Node& n = t.nodes[i];
        if (n.id != i)
            throw std::invalid_argument("node ids must be contiguous from 0; found id " +
                                        std::to_string(n.id) + " at position " +
                                        std::to_string(i));
        if (!(n.x >= 0.0 && n.x <= t.area.width && n.y >= 0.0 && n.y <= t.area.height))
            throw std::invalid_argument("node " + std::to_string(n.id) +
                                        " lies outside the deployment area");
    }
}

Adjacency::Adjacency(std::size_t node_count)
    : rows_(node_count, NodeSet(node_count)), lists_(node_count) {}

Adjacency Adjacency::from_edges(std::size_t node_count,
                                const std::vector<std::pair<NodeId, NodeId>>& edges) {
    Adjacency adj(node_count);
    for (auto [u, v] : edges) adj.add_edge(u, v);
    return adj;
}

void Adjacency::add_edge(NodeId u, NodeId v) {
    if (u >= size() || v >= size()) throw std::out_of_range("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self loops are not allowed");
    if (rows_[u].contains(v)) return;
    rows_[u].insert(v);
    rows_[v].insert(u);
    // Keep the lists sorted so iteration order is by ascending id.
    auto place = [](std::vector<NodeId>& list, NodeId w) {
        list.insert(std::lower_bound(list.begin(), list.end(), w), w);
    };
    place(lists_[u], v);
    place(lists_[v], u);
}

std::size_t Adjacency::edge_count() const {
    std::size_t twice = 0;
    for (const auto& l : lists_) twice += l.size();
    return twice / 2;
}

Adjacency build_adjacency(const Topology& topology) {
    const std::size_t n = topology.node_count();
    Adjacency adj(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const double dx = topology.nodes[u].x - topology.nodes[v].x;
            const double dy = topology.nodes[u].y - topology.nodes[v].y;
            if (std::sqrt(dx * dx + dy * dy) <= topology.range)
                adj.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
        }
    }
    return adj;
}

std::vector<NodeId> hop_distances(const Adjacency& adjacency, NodeId source) {
    std::vector<NodeId> dist(adjacency.size(), kNoNode);
    if (source >= adjacency.size()) return dist;
    std::queue<NodeId> frontier;
    dist[source] = 0;
    frontier.push(source);
    while (!frontier.empty()) {
        const NodeId u = frontier.front();
        frontier.pop();
        for (NodeId v : adjacency.neighbors(u)) {
            if (dist[v] == kNoNode) {
                dist[v] = dist[u] + 1;
                frontier.push(v);
            }
        }
    }
    return dist;
}

bool is_connected(const Adjacency& adjacency) {
    if (adjacency.size() == 0) return true;
    for (NodeId d : hop_distances(adjacency))
        if (d == kNoNode) return false;
    return true;
}

std::size_t sink_eccentricity(const Adjacency& adjacency) {
    std::size_t ecc = 0;
    for (NodeId d : hop_distances(adjacency)) {
        if (d == kNoNode) throw std::invalid_argument("graph is disconnected");
        ecc = std::max<std::size_t>(ecc, d);
    }
    return ecc;
}

Topology generate_topology(const GeneratorOptions& opt) {
    if (opt.sensors < 1) throw std::invalid_argument("at least one sensor is required");
    if (!(opt.range > 0.0)) throw std::invalid_argument("range must be positive");

    Topology t;
    t.range = opt.range;
    t.area = opt.area;
    t.nodes.resize(opt.sensors + 1);
    t.nodes[0] = opt.sink == SinkPosition::center
                     ? Node{kSink, opt.area.width / 2.0, opt.area.height / 2.0}
                     : Node{kSink, 0.0, 0.0};

    Rng rng(opt.seed);
    for (std::size_t attempt = 0; attempt < opt.max_attempts; ++attempt) {
        for (std::size_t i = 1; i <= opt.sensors; ++i) {
            const double x = uniform01(rng) * opt.area.width;
            const double y = uniform01(rng) * opt.area.height;
            t.nodes[i] = Node{static_cast<NodeId>(i), x, y};
        }
        if (is_connected(build_adjacency(t))) return t;
    }
    std::ostringstream msg;
    msg << "no connected deployment of " << opt.sensors << " sensors with range " << opt.range
        << " after " << opt.max_attempts << " attempts (density too low?)";
    throw GenerationError(msg.str());
}

std::string topology_to_json(const Topology& t) {
    json doc;
    doc["version"] = kTopologyVersion;
    doc["area"] = {{"width", t.area.width}, {"height", t.area.height}};
    doc["range_R"] = t.range;
    doc["sink_id"] = t.sink_id;
    json nodes = json::array();
    for (const Node& n : t.nodes) nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

Topology topology_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("topology: malformed JSON: ") + e.what());
    }
    const auto version = require_unsigned(doc, "version", "");
    if (version != kTopologyVersion)
        throw ParseError("topology: unsupported version " + std::to_string(version));

    Topology t;
    const json& area = require(doc, "area", "");
    t.area.width = require_number(area, "width", "area.");
    t.area.height = require_number(area, "height", "area.");
    t.range = require_number(doc, "range_R", "");
    t.sink_id = static_cast<NodeId>(require_unsigned(doc, "sink_id", ""));

    const json& nodes = require(doc, "nodes", "");
    if (!nodes.is_array()) throw ParseError("topology: field 'nodes' must be an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "nodes[" + std::to_string(i) + "].";
        Node n;
        n.id = static_cast<NodeId>(require_unsigned(nodes[i], "id", where));
        n.x = require_number(nodes[i], "x", where);
        n.y = require_number(nodes[i], "y", where);
        t.nodes.push_back(n);
    }
    try {
        validate_topology(t);
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("topology: invalid: ") + e.what());
    }
    return t;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void save_topology(const Topology& topology, const std::filesystem::path& path) {
    validate_topology(topology);
    write_file(path, topology_to_json(topology));
}

Topology load_topology(const std::filesystem::path& path) {
    return topology_from_json(read_file(path));
}

}  // namespace qagg
