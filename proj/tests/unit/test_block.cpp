#include "doctest.h"

#include "blockrel/block.hpp"
#include "blockrel/errors.hpp"
#include "support/block_scenarios.hpp"
#include "support/brute_block.hpp"

using namespace blockrel;
using testsupport::OnSets;

namespace {

const std::string kFixtures = BLOCKREL_FIXTURE_DIR;

struct Replay {
    StageIndex view;
    OnHistory hist;

    Replay(const OrderPresentation& p, const OnSets& on, Stage s) : view(p) {
        for (Stage t = 1; t <= s; ++t) {
            view.advance();
            hist.record(t, std::vector<ElementId>(on[t].begin(), on[t].end()));
        }
    }
};

}  // namespace

TEST_CASE("on-history runs") {
    OnHistory h;
    CHECK_THROWS_AS(h.record(1, {1, 2}), std::invalid_argument);
    h = OnHistory();
    h.record(1, {1});
    h.record(2, {1, 2});
    h.record(3, {1, 2});
    h.record(4, {});
    CHECK(h.on(2, 2));
    CHECK_FALSE(h.on(2, 1));
    CHECK(h.on_stages(1) == std::vector<Stage>{1, 2, 3});
    CHECK(h.last_on_before(2, 3) == 2);
    CHECK(h.last_on_before(2, 4) == 3);
    CHECK(h.last_on_before(3, 4) == 1);
    CHECK(h.last_on_at_or_before(1, 4) == Stage{3});
    CHECK_FALSE(h.last_on_at_or_before(3, 4).has_value());
    CHECK_THROWS(h.record(6, {}));
}

TEST_CASE("block of an element that was never on is itself") {
    auto p = make_presentation(fin(5), 0);
    OnSets on(6);
    Replay r(p, on, 5);
    for (ElementId n = 1; n <= 5; ++n) CHECK(block_elements(r.view, block_at_stage(r.view, r.hist, n)) ==
                                             std::vector<ElementId>{n});
}

TEST_CASE("L^1 block of 1 is {1}") {
    auto p = make_presentation(fin(5), 0);
    OnSets on{{}, {1}};
    Replay r(p, on, 1);
    CHECK(block_elements(r.view, block_at_stage(r.view, r.hist, 1)) == std::vector<ElementId>{1});
    CHECK_THROWS_AS(block_at_stage(r.view, r.hist, 2), std::invalid_argument);
}

TEST_CASE("BLK1 block of 4 at stage 12") {
    auto p = load_scripted_file(kFixtures + "/blk1.order");
    const OnSets on = testsupport::load_on_sets(kFixtures + "/blk1.on");
    Replay r(p, on, 12);
    // Frozen from tests/oracles/blk1.py.
    CHECK(block_elements(r.view, block_at_stage(r.view, r.hist, 4)) == std::vector<ElementId>{7, 4, 9});
    CHECK(testsupport::brute_block(p, on, 4, 12) == std::vector<ElementId>{7, 4, 9});
    CHECK(r.view.ordered() == std::vector<ElementId>{8, 1, 6, 11, 3, 10, 7, 4, 9, 5, 12, 2});
}

TEST_CASE("block_at_stage agrees with the straight-line evaluator") {
    const auto r = testsupport::run_block_scenarios(200, 11);
    CHECK(r.scenarios == 200);
    CHECK_MESSAGE(r.mismatches == 0, r.first_mismatch);
}

TEST_CASE("block properties: contains n, contiguous, no smaller ids") {
    auto p = make_presentation(staircase(), 2);
    StageIndex view(p);
    OnHistory hist;
    IntrinsicProvider prov;
    for (Stage s = 1; s <= 150; ++s) {
        view.advance();
        hist.record(s, prov.on_set(view));
        for (ElementId n = 1; n <= s; n += 3) {
            const auto b = block_at_stage(view, hist, n);
            CHECK(b.contains_pos(view.pos(n)));
            for (auto m : block_elements(view, b)) CHECK(m >= n);
        }
    }
}

TEST_CASE("intrinsic provider on BLK1") {
    auto p = load_scripted_file(kFixtures + "/blk1.order");
    StageIndex view(p);
    IntrinsicProvider prov;
    std::vector<Stage> stages;
    for (Stage s = 1; s <= 30; ++s) {
        view.advance();
        const auto on = prov.on_set(view);
        CHECK(on.front() == 1);
        if (std::find(on.begin(), on.end(), 3) != on.end()) stages.push_back(s);
    }
    // Frozen from tests/oracles/blk1.py.
    CHECK(stages == std::vector<Stage>{6, 11, 13, 15, 18, 21, 23});
}

TEST_CASE("oracle provider is exact at sync stages and deterministic") {
    auto p = make_presentation(staircase(), 7);
    ProviderConfig cfg;
    cfg.sync_period = 50;
    cfg.noise_num = 1;
    cfg.noise_den = 10;
    cfg.seed = 3;
    OracleProvider a(p, cfg), b(p, cfg);
    StageIndex view(p);
    auto truth = p.truth();
    int flips = 0;
    for (Stage s = 1; s <= 200; ++s) {
        view.advance();
        const auto on = a.on_set(view);
        CHECK(on == b.on_set(view));
        for (ElementId n = 1; n <= s; ++n) {
            const bool is_on = std::binary_search(on.begin(), on.end(), n);
            if (s % 50 == 0 || s >= n + cfg.effective_window()) {
                CHECK(is_on == truth.is_lbe(n));
            } else if (is_on != truth.is_lbe(n)) {
                ++flips;
            }
        }
    }
    CHECK(flips > 0);
    CHECK(a.on(1, 100));

    cfg.noise_den = 0;
    CHECK_THROWS_AS(OracleProvider(p, cfg), std::invalid_argument);
    std::istringstream text("insert 1 MIN MAX\n");
    CHECK_THROWS_AS(OracleProvider(load_scripted(text), ProviderConfig{}), Unsupported);
}

TEST_CASE("intrinsic provider: non-LBEs stop being on") {
    auto p = make_presentation(staircase(), 4);
    auto truth = p.truth();
    StageIndex view(p);
    OnHistory hist;
    IntrinsicProvider prov;
    for (Stage s = 1; s <= 1500; ++s) {
        view.advance();
        hist.record(s, prov.on_set(view));
    }
    // An element of a completed block that is not its least element goes quiet
    // once the block is complete and the counter has passed its in-block gap.
    for (ElementId n = 2; n <= 20; ++n) {
        if (truth.is_lbe(n)) continue;
        const auto done = truth.block_complete_at(truth.block_key(n));
        REQUIRE(done.has_value());
        const auto stages = hist.on_stages(n);
        const auto after = std::count_if(stages.begin(), stages.end(), [&](Stage t) { return t > *done + 200; });
        CHECK(after == 0);
    }
}
