#include "doctest.h"

#include "blockrel/construction.hpp"
#include "blockrel/errors.hpp"
#include "blockrel/order_list.hpp"
#include "support/golden.hpp"
#include "support/replay.hpp"

#include <algorithm>
#include <map>
#include <random>

using namespace blockrel;

namespace {

const std::string kFixtures = BLOCKREL_FIXTURE_DIR;

/// Plays back fixed on-sets, one per stage.
class ScriptedOn : public OnProvider {
public:
    explicit ScriptedOn(std::vector<std::vector<ElementId>> sets) : sets_(std::move(sets)) {}
    std::vector<ElementId> on_set(const StageIndex& view) override {
        const auto s = view.stage();
        return s <= sets_.size() ? sets_[s - 1] : std::vector<ElementId>{};
    }

private:
    std::vector<std::vector<ElementId>> sets_;
};

std::unique_ptr<OnProvider> scripted(std::vector<std::vector<ElementId>> sets) {
    return std::make_unique<ScriptedOn>(std::move(sets));
}

std::vector<std::string> dumps(const std::vector<Json>& events) {
    std::vector<std::string> out;
    for (const auto& e : events) out.push_back(e.dump());
    return out;
}

// Every structural property that must hold after each stage.
void check_state(const Engine& eng) {
    const MState& m = eng.m();
    const auto order = m.ordered();
    std::map<MId, std::size_t> at;
    for (std::size_t k = 0; k < order.size(); ++k) at[order[k]] = k;

    std::vector<LabelId> live;
    for (LabelId l = 1; l <= m.label_count(); ++l)
        if (m.label_alive(l)) live.push_back(l);

    for (LabelId l : live) {
        const auto& c = m.label(l).cluster;
        REQUIRE_FALSE(c.empty());
        for (std::size_t k = 1; k < c.size(); ++k) REQUIRE(at[c[k]] == at[c[k - 1]] + 1);
        for (MId x : c) {
            const auto& on = m.labels_on(x);
            REQUIRE(std::find(on.begin(), on.end(), l) != on.end());
        }
    }
    // Labels on one element are nested.
    for (MId x : order) {
        const auto& on = m.labels_on(x);
        for (LabelId a : on)
            for (LabelId b : on) {
                const auto& ca = m.label(a).cluster;
                const auto& cb = m.label(b).cluster;
                const bool a_in_b = at[ca.front()] >= at[cb.front()] && at[ca.back()] <= at[cb.back()];
                const bool b_in_a = at[cb.front()] >= at[ca.front()] && at[cb.back()] <= at[ca.back()];
                REQUIRE((a_in_b || b_in_a));
            }
    }
    // f is injective and order-preserving.
    const auto& f = eng.f();
    std::vector<std::pair<std::uint32_t, MId>> pairs;
    for (ElementId a = 1; a < f.map.size(); ++a)
        if (f.map[a]) pairs.emplace_back(eng.index().pos(a), f.map[a]);
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t k = 1; k < pairs.size(); ++k) REQUIRE(at[pairs[k - 1].second] < at[pairs[k].second]);
    // Logged pairs never share a live label.
    for (const auto& cut : m.nonblock().cuts()) REQUIRE_FALSE(m.share_label(cut.left, cut.right));
}

}  // namespace

TEST_CASE("order list keeps insertion order under dense inserts") {
    OrderList list;
    std::vector<OrderList::Handle> seq;
    std::mt19937_64 rng(5);
    for (int k = 0; k < 5000; ++k) {
        const auto at = std::uniform_int_distribution<std::size_t>(0, seq.size())(rng);
        const auto h = list.insert_after(at ? seq[at - 1] : OrderList::kHead);
        seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(at), h);
    }
    // Hammer one gap to force relabelling.
    for (int k = 0; k < 200; ++k) seq.insert(seq.begin() + 1, list.insert_after(seq[0]));
    for (std::size_t k = 1; k < seq.size(); ++k) REQUIRE(list.less(seq[k - 1], seq[k]));
    CHECK(list.size() == seq.size());
    std::vector<OrderList::Handle> walk;
    for (auto h = list.first(); h != OrderList::kHead; h = list.next(h)) walk.push_back(h);
    CHECK(walk == seq);
}

TEST_CASE("order list reuses erased handles") {
    OrderList list;
    const auto a = list.insert_after(OrderList::kHead);
    const auto b = list.insert_after(a);
    list.erase(a);
    CHECK_FALSE(list.alive(a));
    CHECK(list.first() == b);
    const auto c = list.insert_after(b);
    CHECK(c == a);
    CHECK(list.less(b, c));
    CHECK_THROWS_AS(list.erase(OrderList::kHead), std::logic_error);
}

TEST_CASE("first stage with 1 on creates a one-point image") {
    Engine eng(make_presentation(staircase(), 7), scripted({{1}}));
    eng.run_stage();
    CHECK(eng.m().size() == 1);
    CHECK(eng.f().at(1) == 1);
    CHECK(eng.m().labels_on(1).size() == 1);
    CHECK(eng.m().nonblock().cuts().empty());
}

TEST_CASE("first stage with nothing on leaves M empty") {
    MemorySink sink;
    Engine eng(make_presentation(staircase(), 7), scripted({{}}), &sink);
    eng.run_stage();
    CHECK(eng.m().size() == 0);
    CHECK(eng.f().defined() == 0);
    // The right branch at level 1, then the skip pair below it.
    std::vector<std::string> kinds;
    for (const auto& e : sink.events) kinds.push_back(e["kind"]);
    CHECK(kinds == std::vector<std::string>{"stage-begin", "on-set", "path-node", "path-node", "path-node",
                                            "f-snapshot"});
    CHECK(sink.events[2]["key"] == Json::array({1, 0, 0}));
}

TEST_CASE("an image persists while its element stays on") {
    Engine eng(make_presentation(staircase(), 7), scripted({{1}, {1}, {1}}));
    eng.run_to(3);
    CHECK(eng.f().at(1) == 1);
    CHECK(eng.m().size() == 1);
}

TEST_CASE("an element that goes off loses its path cluster but keeps its M-elements") {
    Engine eng(make_presentation(staircase(), 7), scripted({{1}, {}, {1}}));
    eng.run_stage();
    eng.run_stage();
    CHECK(eng.f().at(1) == 0);
    CHECK(eng.m().size() == 1);
    eng.run_stage();
    CHECK(eng.f().at(1) != 0);
}

TEST_CASE("structural invariants hold after every stage") {
    for (bool primes : {false, true})
        for (std::uint64_t seed : {1, 2, 3, 4}) {
            CAPTURE(primes);
            CAPTURE(seed);
            const auto p = make_presentation(primes ? prime_blocks() : staircase(), seed);
            ProviderConfig cfg;
            cfg.sync_period = 10;
            cfg.seed = seed;
            Engine eng(p, make_provider(p, cfg));
            for (Stage s = 1; s <= 150; ++s) {
                eng.run_stage();
                check_state(eng);
            }
        }
}

TEST_CASE("intrinsic provider runs keep the invariants") {
    const auto p = make_presentation(staircase(), 11);
    ProviderConfig cfg;
    cfg.kind = ProviderConfig::Kind::intrinsic;
    Engine eng(p, make_provider(p, cfg));
    for (Stage s = 1; s <= 150; ++s) {
        eng.run_stage();
        check_state(eng);
    }
}

TEST_CASE("engine runs are deterministic") {
    auto once = [] {
        const auto p = make_presentation(staircase(), 3);
        ProviderConfig cfg;
        cfg.sync_period = 10;
        cfg.seed = 3;
        MemorySink sink;
        Engine eng(p, make_provider(p, cfg), &sink);
        eng.run_to(80);
        return dumps(sink.events);
    };
    CHECK(once() == once());
}

TEST_CASE("f-snapshot deltas rebuild f") {
    const auto p = make_presentation(staircase(), 5);
    ProviderConfig cfg;
    cfg.sync_period = 10;
    cfg.seed = 5;
    MemorySink sink;
    Engine eng(p, make_provider(p, cfg), &sink);
    std::map<ElementId, MId> f;
    std::size_t seen = 0;
    for (Stage s = 1; s <= 60; ++s) {
        eng.run_stage();
        for (; seen < sink.events.size(); ++seen) {
            const auto& e = sink.events[seen];
            if (e["kind"] != "f-snapshot") continue;
            for (const auto& kv : e["set"]) f[kv[0]] = kv[1];
            for (const auto& a : e["unset"]) f.erase(a.get<ElementId>());
        }
        for (ElementId a = 1; a <= s; ++a) {
            const auto it = f.find(a);
            REQUIRE(eng.f().at(a) == (it == f.end() ? 0 : it->second));
        }
    }
}

TEST_CASE("engine and straight-line interpreter agree on fresh runs") {
    for (std::uint64_t seed : {1, 4, 9}) {
        CAPTURE(seed);
        const auto p = make_presentation(staircase(), seed);
        ProviderConfig cfg;
        cfg.sync_period = 5;
        cfg.seed = seed;
        MemorySink sink;
        Engine eng(p, make_provider(p, cfg), &sink);
        eng.run_to(70);
        testsupport::Replay replay(p, make_provider(p, cfg));
        CHECK(dumps(replay.run(70)) == dumps(sink.events));
    }
}

TEST_CASE("golden traces") {
    for (const auto& run : testsupport::golden_runs()) {
        CAPTURE(run.name);
        const auto golden = dumps(read_trace(kFixtures + "/golden/" + run.name + ".ndjson"));
        REQUIRE(golden.size() > 100);
        const auto p = run.presentation();
        MemorySink sink;
        Engine eng(p, make_provider(p, run.provider_config()), &sink);
        eng.run_to(run.stages);
        CHECK(dumps(sink.events) == golden);
        testsupport::Replay replay(p, make_provider(p, run.provider_config()));
        CHECK(dumps(replay.run(run.stages)) == golden);
    }
}
