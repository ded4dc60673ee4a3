#include "qagg/schedule.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qagg {

namespace {

constexpr int kScheduleVersion = 1;
using nlohmann::json;

Direction parse_direction(std::string_view text) {
    if (text == "construction_order") return Direction::construction_order;
    if (text == "transmission_order") return Direction::transmission_order;
    throw ParseError("schedule: unknown direction '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(Direction d) {
    return d == Direction::construction_order ? "construction_order" : "transmission_order";
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::non_edge_link: return "non-edge-link";
        case ViolationKind::multi_sender_per_receiver: return "multi-sender-per-receiver";
        case ViolationKind::neighbor_interference: return "neighbor-interference";
        case ViolationKind::dependency: return "dependency";
        case ViolationKind::duplicate_sender: return "duplicate-sender";
        case ViolationKind::missing_node: return "missing-node";
    }
    return "unknown";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
}

std::string ValidationReport::summary() const {
    if (valid()) return "valid";
    std::ostringstream out;
    out << violations.size() << " violation(s)";
    for (const Violation& v : violations) {
        out << "\n  [" << to_string(v.kind) << "]";
        if (v.slot != 0) out << " slot " << v.slot;
        out << " nodes";
        for (NodeId n : v.nodes) out << ' ' << n;
        if (!v.detail.empty()) out << ": " << v.detail;
    }
    return out.str();
}

ValidationReport validate_schedule(const Schedule& schedule, const Adjacency& adjacency) {
    if (schedule.direction != Direction::transmission_order)
        throw std::invalid_argument("validate_schedule expects a transmission-order schedule");

    const std::size_t n = adjacency.size();
    auto in_range = [n](NodeId v) { return v < n; };
    ValidationReport report;
    auto add = [&](ViolationKind kind, std::size_t slot, std::vector<NodeId> nodes,
                   std::string detail) {
        report.violations.push_back({kind, slot, std::move(nodes), std::move(detail)});
    };

    // (a) links must be edges.
    for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
        for (const Link& l : schedule.slots[t]) {
            if (!in_range(l.sender) || !in_range(l.aggregator) ||
                !adjacency.adjacent(l.sender, l.aggregator))
                add(ViolationKind::non_edge_link, t + 1, {l.sender, l.aggregator},
                    "sender and aggregator are not neighbours");
        }
    }

    // (b) one sender per receiver per slot.
    for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
        std::map<NodeId, std::vector<NodeId>> by_receiver;
        for (const Link& l : schedule.slots[t]) by_receiver[l.aggregator].push_back(l.sender);
        for (auto& [receiver, senders] : by_receiver) {
            if (senders.size() < 2) continue;
            std::vector<NodeId> nodes{receiver};
            nodes.insert(nodes.end(), senders.begin(), senders.end());
            add(ViolationKind::multi_sender_per_receiver, t + 1, std::move(nodes),
                "receiver addressed by several senders");
        }
    }

    // (c) protocol interference. Links sharing a receiver are already covered by (b).
    for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
        const Slot& slot = schedule.slots[t];
        for (const Link& l : slot) {
            if (!in_range(l.aggregator)) continue;
            for (const Link& other : slot) {
                if (other.aggregator == l.aggregator || other.sender == l.sender) continue;
                if (!in_range(other.sender)) continue;
                if (adjacency.adjacent(other.sender, l.aggregator))
                    add(ViolationKind::neighbor_interference, t + 1,
                        {other.sender, l.aggregator, l.sender},
                        "interferer is a neighbour of another link's receiver");
            }
        }
    }

    // (d) dependency: receptions strictly precede the receiver's own transmission.
    std::vector<std::size_t> first_send(n, 0);
    for (std::size_t t = 0; t < schedule.slots.size(); ++t)
        for (const Link& l : schedule.slots[t])
            if (in_range(l.sender) && first_send[l.sender] == 0) first_send[l.sender] = t + 1;
    for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
        for (const Link& l : schedule.slots[t]) {
            if (l.sender == kSink)
                add(ViolationKind::dependency, t + 1, {l.sender, l.aggregator},
                    "the sink never transmits");
            if (!in_range(l.aggregator)) continue;
            const std::size_t sent = first_send[l.aggregator];
            if (sent != 0 && sent <= t + 1)
                add(ViolationKind::dependency, t + 1, {l.sender, l.aggregator},
                    "aggregator transmits in slot " + std::to_string(sent) +
                        ", not after this reception");
        }
    }

    // (e) every sensor sends exactly once.
    std::vector<std::size_t> sends(n, 0);
    for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
        for (const Link& l : schedule.slots[t]) {
            if (!in_range(l.sender) || l.sender == kSink) continue;
            if (++sends[l.sender] == 2)
                add(ViolationKind::duplicate_sender, t + 1, {l.sender},
                    "sensor transmits more than once");
        }
    }
    for (NodeId u = 1; u < n; ++u)
        if (sends[u] == 0) add(ViolationKind::missing_node, 0, {u}, "sensor never transmits");

    return report;
}

Schedule reverse_schedule(const Schedule& schedule) {
    Schedule out;
    out.direction = schedule.direction == Direction::construction_order
                        ? Direction::transmission_order
                        : Direction::construction_order;
    out.slots.assign(schedule.slots.rbegin(), schedule.slots.rend());
    return out;
}

Schedule to_transmission_order(const Schedule& schedule) {
    if (schedule.direction != Direction::construction_order)
        throw std::invalid_argument("schedule is already in transmission order");
    return reverse_schedule(schedule);
}

std::size_t AggregationTree::edge_count() const {
    return static_cast<std::size_t>(
        std::count_if(parent.begin(), parent.end(), [](NodeId p) { return p != kNoNode; }));
}

AggregationTree schedule_to_tree(const Schedule& schedule, const Adjacency& adjacency) {
    const ValidationReport report = validate_schedule(schedule, adjacency);
    if (!report.valid())
        throw std::invalid_argument("schedule_to_tree needs a valid schedule (run "
                                    "validate_schedule first): " +
                                    report.summary());
    AggregationTree tree;
    tree.parent.assign(adjacency.size(), kNoNode);
    for (const Slot& slot : schedule.slots)
        for (const Link& l : slot) tree.parent[l.sender] = l.aggregator;
    return tree;
}

std::vector<std::size_t> transmission_slots(const Schedule& schedule, std::size_t node_count) {
    std::vector<std::size_t> slot_of(node_count, 0);
    for (std::size_t t = 0; t < schedule.slots.size(); ++t)
        for (const Link& l : schedule.slots[t])
            if (l.sender < node_count && slot_of[l.sender] == 0) slot_of[l.sender] = t + 1;
    return slot_of;
}

std::string schedule_to_json(const Schedule& schedule) {
    json doc;
    doc["version"] = kScheduleVersion;
    doc["direction"] = std::string(to_string(schedule.direction));
    json slots = json::array();
    for (const Slot& slot : schedule.slots) {
        json links = json::array();
        for (const Link& l : slot)
            links.push_back({{"sender", l.sender}, {"aggregator", l.aggregator}});
        slots.push_back(std::move(links));
    }
    doc["slots"] = std::move(slots);
    return doc.dump(2) + "\n";
}

Schedule schedule_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("schedule: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("schedule: document must be an object");
    if (!doc.contains("version") || !doc["version"].is_number_unsigned() ||
        doc["version"].get<int>() != kScheduleVersion)
        throw ParseError("schedule: missing or unsupported field 'version'");
    if (!doc.contains("direction") || !doc["direction"].is_string())
        throw ParseError("schedule: missing field 'direction'");
    if (!doc.contains("slots") || !doc["slots"].is_array())
        throw ParseError("schedule: missing field 'slots'");

    Schedule s;
    s.direction = parse_direction(doc["direction"].get<std::string>());
    for (std::size_t t = 0; t < doc["slots"].size(); ++t) {
        const json& links = doc["slots"][t];
        if (!links.is_array())
            throw ParseError("schedule: field 'slots[" + std::to_string(t) + "]' must be an array");
        Slot slot;
        for (std::size_t i = 0; i < links.size(); ++i) {
            const json& l = links[i];
            const std::string where = "slots[" + std::to_string(t) + "][" + std::to_string(i) + "]";
            for (const char* field : {"sender", "aggregator"}) {
                if (!l.is_object() || !l.contains(field) || !l[field].is_number_unsigned())
                    throw ParseError("schedule: field '" + where + "." + field +
                                     "' must be a node id");
            }
            slot.push_back({l["sender"].get<NodeId>(), l["aggregator"].get<NodeId>()});
        }
        s.slots.push_back(std::move(slot));
    }
    return s;
}

void save_schedule(const Schedule& schedule, const std::filesystem::path& path) {
    write_file(path, schedule_to_json(schedule));
}

Schedule load_schedule(const std::filesystem::path& path) {
    return schedule_from_json(read_file(path));
}

}  // namespace qagg
