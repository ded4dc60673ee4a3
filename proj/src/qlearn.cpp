#include "qagg/qlearn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace qagg {

namespace {

constexpr int kQTableVersion = 1;
using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<NodeId> sorted_ids(const NodeSet& set) { return set.to_vector(); }

}  // namespace

std::string_view to_string(KeyMode mode) {
    return mode == KeyMode::canonical ? "canonical" : "digest";
}

KeyMode parse_key_mode(std::string_view text) {
    if (text == "canonical") return KeyMode::canonical;
    if (text == "digest") return KeyMode::digest;
    throw std::invalid_argument("unknown key mode '" + std::string(text) + "'");
}

StateKey canonical_state_key(const NodeSet& aggregated, KeyMode mode) {
    StateKey key;
    key.reserve(aggregated.words().size() * 8);
    for (std::uint64_t w : aggregated.words())
        for (int b = 0; b < 8; ++b) key.push_back(static_cast<char>((w >> (8 * b)) & 0xff));
    while (!key.empty() && key.back() == '\0') key.pop_back();
    if (mode == KeyMode::canonical) return key;

    const std::uint64_t h = fnv1a(key);
    StateKey digest(8, '\0');
    for (int b = 0; b < 8; ++b) digest[b] = static_cast<char>((h >> (8 * b)) & 0xff);
    return digest;
}

std::string describe_state_key(const StateKey& key, KeyMode mode) {
    std::string out;
    if (mode == KeyMode::digest) {
        std::uint64_t h = 0;
        for (std::size_t b = 0; b < key.size() && b < 8; ++b)
            h |= static_cast<std::uint64_t>(static_cast<unsigned char>(key[b])) << (8 * b);
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
    for (std::size_t byte = 0; byte < key.size(); ++byte) {
        const auto bits = static_cast<unsigned char>(key[byte]);
        for (int b = 0; b < 8; ++b) {
            if (!((bits >> b) & 1u)) continue;
            if (!out.empty()) out.push_back(' ');
            out += std::to_string(byte * 8 + static_cast<std::size_t>(b));
        }
    }
    return out;
}

StateKey parse_state_key(std::string_view text, KeyMode mode) {
    if (mode == KeyMode::digest) {
        std::uint64_t h = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), h, 16);
        if (ec != std::errc{} || ptr != text.data() + text.size() || text.size() != 16)
            throw ParseError("qtable: bad digest key '" + std::string(text) + "'");
        StateKey key(8, '\0');
        for (int b = 0; b < 8; ++b) key[b] = static_cast<char>((h >> (8 * b)) & 0xff);
        return key;
    }
    std::vector<NodeId> ids;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] == ' ') {
            ++pos;
            continue;
        }
        NodeId id = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), id);
        if (ec != std::errc{})
            throw ParseError("qtable: bad state key '" + std::string(text) + "'");
        ids.push_back(id);
        pos = static_cast<std::size_t>(ptr - text.data());
    }
    if (ids.empty()) throw ParseError("qtable: empty state key");
    const NodeId top = *std::max_element(ids.begin(), ids.end());
    NodeSet set(static_cast<std::size_t>(top) + 1);
    for (NodeId id : ids) set.insert(id);
    return canonical_state_key(set, KeyMode::canonical);
}

std::size_t QTable::entry_count() const {
    std::size_t n = 0;
    for (const auto& [key, row] : rows_) n += row.size();
    return n;
}

const std::vector<ActionValue>* QTable::row(const StateKey& state) const {
    auto it = rows_.find(state);
    return it == rows_.end() ? nullptr : &it->second;
}

double QTable::value(const StateKey& state, NodeId action) const {
    const auto* r = row(state);
    if (!r) return 0.0;
    auto it = std::lower_bound(r->begin(), r->end(), action,
                               [](const ActionValue& av, NodeId a) { return av.action < a; });
    return (it != r->end() && it->action == action) ? it->value : 0.0;
}

double QTable::max_value(const StateKey& state) const {
    const auto* r = row(state);
    if (!r || r->empty()) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const ActionValue& av : *r) best = std::max(best, av.value);
    return best;
}

void QTable::set(const StateKey& state, NodeId action, double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("Q-values must be finite");
    auto& r = rows_[state];
    auto it = std::lower_bound(r.begin(), r.end(), action,
                               [](const ActionValue& av, NodeId a) { return av.action < a; });
    if (it != r.end() && it->action == action)
        it->value = value;
    else
        r.insert(it, ActionValue{action, value});
}

void validate_config(const TrainConfig& c) {
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
    if (!(c.epsilon_init >= 0.0 && c.epsilon_init <= 1.0))
        throw std::invalid_argument("epsilon_init must be in [0, 1]");
    if (c.epsilon_decay && !(*c.epsilon_decay >= 0.0 && std::isfinite(*c.epsilon_decay)))
        throw std::invalid_argument("epsilon_decay must be a non-negative number");
    if (c.episodes == 0) throw std::invalid_argument("episodes must be positive");
}

double epsilon_at(const TrainConfig& config, std::size_t episode) {
    const auto k = static_cast<double>(episode);
    const double spent = config.epsilon_decay ? k * *config.epsilon_decay
                                              : k / static_cast<double>(config.episodes);
    return std::max(config.epsilon_init - spent, 0.0);
}

NodeId greedy_action(const QTable& q, const StateKey& state, const std::vector<NodeId>& eligible) {
    if (eligible.empty()) throw std::invalid_argument("no eligible action");
    // Unseen state: every value is 0 and the tie rule picks the lowest id.
    if (!q.row(state)) return eligible.front();
    NodeId best = eligible.front();
    double best_value = q.value(state, best);
    for (std::size_t i = 1; i < eligible.size(); ++i) {
        const double v = q.value(state, eligible[i]);
        if (v > best_value) {
            best = eligible[i];
            best_value = v;
        }
    }
    return best;
}

NodeId choose_action(const QTable& q, const StateKey& state, const std::vector<NodeId>& eligible,
                     double epsilon, Rng& rng) {
    if (eligible.empty()) throw std::invalid_argument("choose_action: eligible set is empty");
    if (uniform01(rng) < epsilon) return eligible[uniform_index(rng, eligible.size())];
    return greedy_action(q, state, eligible);
}

TrainOutcome train(const Adjacency& adjacency, const TrainConfig& config) {
    validate_config(config);
    if (adjacency.size() == 0) throw std::invalid_argument("train: empty network");
    if (!is_connected(adjacency)) throw std::invalid_argument("train: topology is disconnected");

    const std::size_t n = adjacency.size();
    Rng rng(config.seed);
    TrainOutcome out;
    out.qtable = QTable(config.key_mode);
    out.best_qtable = QTable(config.key_mode);
    out.best_delay = std::numeric_limits<std::size_t>::max();
    out.trace.reserve(config.episodes);

    QTable& q = out.qtable;
    std::vector<Slot> slots;
    for (std::size_t episode = 0; episode < config.episodes; ++episode) {
        const double epsilon = epsilon_at(config, episode);
        Partition partition(n);
        StateKey state = canonical_state_key(partition.aggregated(), config.key_mode);
        slots.clear();
        double total_reward = 0.0;

        while (!partition.done()) {
            const auto eligible = sorted_ids(eligible_initial_senders(partition, adjacency));
            const NodeId action = choose_action(q, state, eligible, epsilon, rng);
            BatchResult batch = greedy_spread(partition, action, adjacency);
            const double reward = reward_of(batch);
            partition = apply_batch(partition, batch);
            StateKey next = canonical_state_key(partition.aggregated(), config.key_mode);
            const double max_next = partition.done() ? 0.0 : q.max_value(next);
            q.set(state, action,
                  bellman_update(q.value(state, action), reward, max_next, config.alpha,
                                 config.gamma));
            total_reward += reward;
            slots.push_back(std::move(batch.links));
            state = std::move(next);
        }

        const std::size_t delay = slots.size();
        out.trace.push_back({delay, epsilon, total_reward});
        if (delay < out.best_delay) {
            out.best_delay = delay;
            out.best_schedule = to_transmission_order(
                Schedule{Direction::construction_order, slots});
            out.best_qtable = q;
        }
    }
    return out;
}

Schedule evaluate_greedy(const Adjacency& adjacency, const QTable& qtable) {
    Schedule construction{Direction::construction_order, {}};
    if (adjacency.size() == 0) return to_transmission_order(construction);
    Partition partition(adjacency.size());
    while (!partition.done()) {
        const auto eligible = sorted_ids(eligible_initial_senders(partition, adjacency));
        if (eligible.empty()) throw std::invalid_argument("evaluate_greedy: disconnected graph");
        const StateKey state = canonical_state_key(partition.aggregated(), qtable.key_mode());
        BatchResult batch = greedy_spread(partition, greedy_action(qtable, state, eligible),
                                          adjacency);
        partition = apply_batch(partition, batch);
        construction.slots.push_back(std::move(batch.links));
    }
    return to_transmission_order(construction);
}

QlearnResult run_qlearning(const Adjacency& adjacency, const TrainConfig& config) {
    QlearnResult result;
    result.training = train(adjacency, config);
    result.greedy_schedule = evaluate_greedy(adjacency, result.training.best_qtable);
    result.schedule = delay_of(result.greedy_schedule) < result.training.best_delay
                          ? result.greedy_schedule
                          : result.training.best_schedule;
    return result;
}

std::string qtable_to_json(const QTable& table) {
    std::vector<std::pair<std::string, const std::vector<ActionValue>*>> rows;
    rows.reserve(table.state_count());
    for (const auto& [key, row] : table.rows())
        rows.emplace_back(describe_state_key(key, table.key_mode()), &row);
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    json states = json::array();
    for (const auto& [text, row] : rows) {
        json actions = json::array();
        for (const ActionValue& av : *row) actions.push_back({{"node", av.action}, {"value", av.value}});
        states.push_back({{"key", text}, {"actions", std::move(actions)}});
    }
    json doc;
    doc["version"] = kQTableVersion;
    doc["key_mode"] = std::string(to_string(table.key_mode()));
    doc["states"] = std::move(states);
    return doc.dump() + "\n";
}

QTable qtable_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("qtable: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_unsigned())
        throw ParseError("qtable: missing field 'version'");
    if (doc["version"].get<int>() != kQTableVersion)
        throw ParseError("qtable: unsupported version " + doc["version"].dump());
    if (!doc.contains("key_mode") || !doc["key_mode"].is_string())
        throw ParseError("qtable: missing field 'key_mode'");
    if (!doc.contains("states") || !doc["states"].is_array())
        throw ParseError("qtable: missing field 'states'");

    KeyMode mode;
    try {
        mode = parse_key_mode(doc["key_mode"].get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("qtable: ") + e.what());
    }
    QTable table(mode);
    for (std::size_t i = 0; i < doc["states"].size(); ++i) {
        const json& s = doc["states"][i];
        const std::string where = "states[" + std::to_string(i) + "]";
        if (!s.is_object() || !s.contains("key") || !s["key"].is_string())
            throw ParseError("qtable: field '" + where + ".key' must be a string");
        if (!s.contains("actions") || !s["actions"].is_array())
            throw ParseError("qtable: field '" + where + ".actions' must be an array");
        const StateKey key = parse_state_key(s["key"].get<std::string>(), mode);
        if (table.row(key)) throw ParseError("qtable: duplicate state " + where);
        for (const json& a : s["actions"]) {
            if (!a.is_object() || !a.contains("node") || !a["node"].is_number_unsigned() ||
                !a.contains("value") || !a["value"].is_number())
                throw ParseError("qtable: malformed action entry in " + where);
            table.set(key, a["node"].get<NodeId>(), a["value"].get<double>());
        }
    }
    return table;
}

void save_qtable(const QTable& table, const std::filesystem::path& path) {
    write_file(path, qtable_to_json(table));
}

QTable load_qtable(const std::filesystem::path& path) { return qtable_from_json(read_file(path)); }

}  // namespace qagg
