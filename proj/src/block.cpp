#include "blockrel/block.hpp"

#include <stdexcept>

namespace blockrel {

BlockRange block_at_stage(const StageIndex& view, const OnHistory& hist, ElementId n) {
    const Stage s = view.stage();
    if (n == 0 || n > s) throw std::invalid_argument("block_at_stage requires 1 <= n <= s");
    if (hist.stage() < s) throw std::logic_error("on-history lags the stage index");
    const Stage last_on = hist.last_on_before(n, s);
    auto admissible = [&](ElementId m) {
        if (m < n || m >= last_on) return false;
        const auto t = hist.last_on_at_or_before(m, s);
        return !(t && *t >= last_on);
    };
    BlockRange b;
    b.center = b.lo = b.hi = view.pos(n);
    while (b.lo > 0 && admissible(view.at(b.lo - 1))) --b.lo;
    while (b.hi + 1 < view.ordered().size() && admissible(view.at(b.hi + 1))) ++b.hi;
    return b;
}

std::vector<ElementId> block_elements(const StageIndex& view, const BlockRange& b) {
    return {view.ordered().begin() + b.lo, view.ordered().begin() + b.hi + 1};
}

}  // namespace blockrel
