#pragma once

#include "blockrel/on_provider.hpp"
#include "blockrel/stage_index.hpp"

#include <cstdint>
#include <vector>

namespace blockrel {

/// Contiguous run of L^s given by positions [lo, hi] in comparator order.
struct BlockRange {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    std::uint32_t center = 0;  // position of the element the block is around

    std::uint32_t size() const { return hi - lo + 1; }
    std::uint32_t left_count() const { return center - lo; }
    std::uint32_t right_count() const { return hi - center; }
    bool contains_pos(std::uint32_t p) const { return lo <= p && p <= hi; }
};

/// The block at the current stage around n: the maximal run of L^s around n that
/// avoids ids below n, elements enumerated at or after n's last on-stage before s
/// (stage 1 if none), and elements other than n that were on at or after that
/// stage, up to and including s. `hist` must already hold stage s.
BlockRange block_at_stage(const StageIndex& view, const OnHistory& hist, ElementId n);

std::vector<ElementId> block_elements(const StageIndex& view, const BlockRange& b);

}  // namespace blockrel
