#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "fixtures.hpp"
#include "qagg/baseline.hpp"
#include "qagg/qlearn.hpp"

using namespace qagg;
using namespace qagg::testing;

namespace {

TrainConfig quick(std::size_t episodes, std::uint64_t seed = 1) {
    TrainConfig c;
    c.episodes = episodes;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("state keys") {
    CHECK(canonical_state_key(set_of(8, {0})) == canonical_state_key(set_of(8, {0})));
    CHECK(canonical_state_key(set_of(8, {0, 3, 1})) == canonical_state_key(set_of(8, {1, 0, 3})));
    CHECK(canonical_state_key(set_of(8, {0, 1})) != canonical_state_key(set_of(8, {0, 2})));
    // The universe size does not leak into the key.
    CHECK(canonical_state_key(set_of(8, {0, 2})) == canonical_state_key(set_of(300, {0, 2})));

    // Every subset of a 10-node universe gets its own key.
    std::vector<StateKey> keys;
    for (unsigned mask = 0; mask < 1024; ++mask) {
        NodeSet s(10);
        for (NodeId v = 0; v < 10; ++v)
            if (mask >> v & 1U) s.insert(v);
        keys.push_back(canonical_state_key(s));
    }
    std::sort(keys.begin(), keys.end());
    CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());

    for (KeyMode mode : {KeyMode::canonical, KeyMode::digest}) {
        const StateKey k = canonical_state_key(set_of(200, {0, 5, 64, 199}), mode);
        CHECK(parse_state_key(describe_state_key(k, mode), mode) == k);
    }
    CHECK(describe_state_key(canonical_state_key(set_of(8, {3, 0, 5})), KeyMode::canonical) ==
          "0 3 5");
    CHECK(describe_state_key(canonical_state_key(set_of(8, {0}), KeyMode::digest), KeyMode::digest)
              .size() == 16);
    CHECK(parse_key_mode("digest") == KeyMode::digest);
    CHECK_THROWS(parse_key_mode("md5"));
}

TEST_CASE("bellman_update") {
    CHECK(bellman_update(0.0, 4.0, 0.0, 0.1, 0.9) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(bellman_update(1.0, 1.0, 1.0, 0.1, 0.9) == doctest::Approx(1.09).epsilon(1e-15));
    CHECK(bellman_update(3.25, 9.0, 2.0, 0.0, 0.9) == 3.25);
}

TEST_CASE("reward_of is the squared batch size") {
    for (std::size_t t : {1U, 2U, 5U}) {
        BatchResult b;
        for (std::size_t i = 0; i < t; ++i) b.links.push_back({static_cast<NodeId>(i + 1), 0});
        CHECK(reward_of(b) == static_cast<double>(t * t));
    }
}

TEST_CASE("greedy and epsilon-greedy action choice") {
    QTable q;
    const StateKey s = canonical_state_key(set_of(10, {0}));
    q.set(s, 5, 0.3);
    q.set(s, 9, 0.7);
    Rng rng(1);
    CHECK(choose_action(q, s, {5, 9}, 0.0, rng) == 9);
    CHECK(choose_action(q, s, {2, 5}, 0.0, rng) == 5);

    QTable flat;
    flat.set(s, 4, 1.0);
    flat.set(s, 7, 1.0);
    CHECK(choose_action(flat, s, {4, 7}, 0.0, rng) == 4);
    CHECK(greedy_action(QTable{}, s, {3, 6, 8}) == 3);

    Rng r1(99), r2(99);
    std::vector<NodeId> picks1, picks2;
    for (int i = 0; i < 50; ++i) {
        picks1.push_back(choose_action(q, s, {1, 2, 3, 4, 5, 9}, 1.0, r1));
        picks2.push_back(choose_action(q, s, {1, 2, 3, 4, 5, 9}, 1.0, r2));
    }
    CHECK(picks1 == picks2);
    CHECK(std::count(picks1.begin(), picks1.end(), picks1.front()) < 50);

    CHECK_THROWS_AS(choose_action(q, s, {}, 0.5, rng), std::invalid_argument);
}

TEST_CASE("QTable basics") {
    QTable q;
    const StateKey s = canonical_state_key(set_of(4, {0, 1}));
    CHECK(q.value(s, 2) == 0.0);
    CHECK(q.max_value(s) == 0.0);
    CHECK(q.row(s) == nullptr);
    q.set(s, 3, 2.0);
    q.set(s, 2, 1.5);
    REQUIRE(q.row(s) != nullptr);
    CHECK(q.row(s)->front().action == 2);
    CHECK(q.max_value(s) == 2.0);
    CHECK(q.entry_count() == 2);
    CHECK(q.state_count() == 1);
}

TEST_CASE("epsilon schedule") {
    TrainConfig c = quick(4);
    for (std::size_t k = 0; k <= 6; ++k)
        CHECK(epsilon_at(c, k) == std::max(1.0 - static_cast<double>(k) / 4.0, 0.0));

    c.epsilon_decay = 0.3;
    for (std::size_t k = 0; k <= 6; ++k)
        CHECK(epsilon_at(c, k) == std::max(1.0 - static_cast<double>(k) * 0.3, 0.0));

    c.alpha = 0.0;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c.alpha = 0.1;
    c.episodes = 0;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
}

TEST_CASE("train on small topologies") {
    SUBCASE("star with three leaves") {
        const TrainOutcome out = train(star_graph(3), quick(200));
        CHECK(out.best_delay == 3);
        CHECK(validate_schedule(out.best_schedule, star_graph(3)).valid());
    }
    SUBCASE("path of four") {
        const TrainOutcome out = train(path_graph(4), quick(200));
        CHECK(out.best_delay == 3);
    }
    SUBCASE("example graph reaches the exact optimum") {
        const Adjacency adj = batch_example();
        const ExactResult exact = brute_force_optimal(adj);
        REQUIRE(exact.status == ExactResult::Status::optimal);
        const TrainOutcome out = train(adj, quick(2000));
        CHECK(out.best_delay == exact.delay);
    }
    SUBCASE("bad inputs") {
        CHECK_THROWS_AS(train(Adjacency(3), quick(10)), std::invalid_argument);
        CHECK_THROWS_AS(train(Adjacency(0), quick(10)), std::invalid_argument);
    }
}

TEST_CASE("training invariants (randomized)") {
    Rng rng(5);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 5 + uniform_index(rng, 30);
        const Adjacency adj = random_connected_graph(n, 0.15, rng);
        const TrainConfig c = quick(300, 100 + trial);
        const TrainOutcome a = train(adj, c);
        const TrainOutcome b = train(adj, c);

        REQUIRE(a.trace.size() == c.episodes);
        bool same = true;
        for (std::size_t k = 0; k < a.trace.size(); ++k) {
            same = same && a.trace[k].delay == b.trace[k].delay &&
                   a.trace[k].epsilon == b.trace[k].epsilon &&
                   a.trace[k].total_reward == b.trace[k].total_reward;
            CHECK(a.trace[k].epsilon == epsilon_at(c, k));
            CHECK(a.trace[k].delay <= n - 1);
        }
        CHECK(same);
        CHECK(a.qtable == b.qtable);

        const auto best = std::min_element(a.trace.begin(), a.trace.end(),
                                           [](const auto& x, const auto& y) { return x.delay < y.delay; });
        CHECK(a.best_delay == best->delay);
        CHECK(delay_of(a.best_schedule) == a.best_delay);
        CHECK(validate_schedule(a.best_schedule, adj).valid());
        CHECK(a.best_delay >= sink_eccentricity(adj));

        const QlearnResult r = run_qlearning(adj, c);
        CHECK(validate_schedule(r.greedy_schedule, adj).valid());
        CHECK(delay_of(r.schedule) ==
              std::min(r.training.best_delay, delay_of(r.greedy_schedule)));
    }
}

TEST_CASE("evaluate_greedy") {
    const TrainOutcome out = train(star_graph(3), quick(100));
    const Schedule g = evaluate_greedy(star_graph(3), out.best_qtable);
    CHECK(delay_of(g) == 3);
    CHECK(validate_schedule(g, star_graph(3)).valid());
    CHECK(evaluate_greedy(star_graph(3), out.best_qtable) == g);

    // A table from another graph only leads to unseen states; still valid.
    const TrainOutcome other = train(path_graph(6), quick(100));
    const Adjacency adj = batch_example();
    CHECK(validate_schedule(evaluate_greedy(adj, other.qtable), adj).valid());
    CHECK(validate_schedule(evaluate_greedy(adj, QTable{}), adj).valid());
}

TEST_CASE("Q-table files") {
    const Adjacency adj = Adjacency::from_edges(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    const TrainOutcome out = train(adj, quick(200));
    const auto path = std::filesystem::temp_directory_path() / "qagg_qtable_roundtrip.json";
    save_qtable(out.best_qtable, path);
    const QTable back = load_qtable(path);
    std::filesystem::remove(path);
    CHECK(back == out.best_qtable);
    CHECK(evaluate_greedy(adj, back) == evaluate_greedy(adj, out.best_qtable));

    CHECK(qtable_from_json(qtable_to_json(QTable{})).empty());

    TrainConfig digest = quick(200);
    digest.key_mode = KeyMode::digest;
    const TrainOutcome d = train(adj, digest);
    const QTable dback = qtable_from_json(qtable_to_json(d.qtable));
    CHECK(dback == d.qtable);
    CHECK(dback.key_mode() == KeyMode::digest);

    QTable tiny;
    tiny.set(canonical_state_key(set_of(4, {0})), 1, 0.1 + 0.2);
    CHECK(qtable_from_json(qtable_to_json(tiny)) == tiny);

    CHECK_THROWS_AS(qtable_from_json("[]"), ParseError);
    CHECK_THROWS_AS(qtable_from_json(R"({"key_mode":"canonical","states":[]})"), ParseError);
    CHECK_THROWS_AS(qtable_from_json(
                        R"({"version":1,"key_mode":"canonical","states":[{"key":"0 x","actions":[]}]})"),
                    ParseError);
}
