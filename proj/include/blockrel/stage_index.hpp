#pragma once

#include "blockrel/order.hpp"

#include <vector>

namespace blockrel {

/// L^s kept incrementally: elements in comparator order plus their positions.
class StageIndex {
public:
    explicit StageIndex(OrderPresentation p) : p_(std::move(p)) {}

    /// Enumerate the next element (stage() + 1).
    void advance();
    void advance_to(Stage s) {
        while (stage_ < s) advance();
    }

    Stage stage() const { return stage_; }
    const std::vector<ElementId>& ordered() const { return ordered_; }
    std::uint32_t pos(ElementId e) const { return pos_[e]; }
    ElementId at(std::uint32_t pos) const { return ordered_[pos]; }
    const PositionKey& key(ElementId e) const { return keys_[e]; }
    bool less(ElementId a, ElementId b) const { return pos_[a] < pos_[b]; }
    const OrderPresentation& presentation() const { return p_; }
    StageView view() const { return StageView{stage_, ordered_}; }

private:
    OrderPresentation p_;
    Stage stage_ = 0;
    std::vector<ElementId> ordered_;
    std::vector<std::uint32_t> pos_{0};
    std::vector<PositionKey> keys_{PositionKey{}};
};

}  // namespace blockrel
