#ifndef QAGG_SCHEDULE_HPP
#define QAGG_SCHEDULE_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qagg/node_set.hpp"
#include "qagg/topology.hpp"

namespace qagg {

struct Link {
    NodeId sender = 0;
    NodeId aggregator = 0;

    friend bool operator==(const Link&, const Link&) = default;
    friend auto operator<=>(const Link&, const Link&) = default;
};

using Slot = std::vector<Link>;

/// Slot order. Construction order lists the last transmissions first, which is
/// how the top-down builders produce them; only transmission order is
/// executable.
enum class Direction { construction_order, transmission_order };

std::string_view to_string(Direction d);

struct Schedule {
    Direction direction = Direction::transmission_order;
    std::vector<Slot> slots;

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

enum class ViolationKind {
    non_edge_link,
    multi_sender_per_receiver,
    neighbor_interference,
    dependency,
    duplicate_sender,
    missing_node,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    /// 1-based slot number, 0 when the violation is not tied to one slot.
    std::size_t slot = 0;
    std::vector<NodeId> nodes;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool valid() const { return violations.empty(); }
    std::size_t count(ViolationKind kind) const;
    std::string summary() const;
};

/// Exhaustive check of a transmission-order schedule against the protocol
/// interference model and the aggregation dependency rule.
///
/// Checks, in this order: every link is an edge; no aggregator is used twice
/// in a slot; no sender is adjacent to another link's aggregator in its slot;
/// every aggregator other than the sink transmits strictly after each slot in
/// which it receives (and the sink never transmits); every sensor transmits
/// exactly once. All violations are reported, not just the first.
ValidationReport validate_schedule(const Schedule& schedule, const Adjacency& adjacency);

/// Flips slot order and the direction tag; an involution. Pairs are untouched.
Schedule reverse_schedule(const Schedule& schedule);

/// reverse_schedule restricted to construction-order input. Throws
/// std::invalid_argument for a schedule that is already executable.
Schedule to_transmission_order(const Schedule& schedule);

inline std::size_t delay_of(const Schedule& schedule) { return schedule.slots.size(); }

/// Aggregation tree implied by a schedule: parent[u] is u's aggregator and
/// parent[sink] is kNoNode.
struct AggregationTree {
    std::vector<NodeId> parent;

    std::size_t edge_count() const;
};

/// Throws std::invalid_argument (with the validation summary) when the
/// schedule does not validate.
AggregationTree schedule_to_tree(const Schedule& schedule, const Adjacency& adjacency);

/// Transmission slot (1-based) of every node; the sink maps to 0.
std::vector<std::size_t> transmission_slots(const Schedule& schedule, std::size_t node_count);

/// JSON document: {version, direction, slots: [[{sender, aggregator}], ...]}.
std::string schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(std::string_view text);

void save_schedule(const Schedule& schedule, const std::filesystem::path& path);
Schedule load_schedule(const std::filesystem::path& path);

}  // namespace qagg

#endif  // QAGG_SCHEDULE_HPP
