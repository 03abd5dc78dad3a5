#include "blockrel/stage_index.hpp"

#include <algorithm>

namespace blockrel {

void StageIndex::advance() {
    const ElementId e = ++stage_;
    keys_.push_back(p_.key(e));
    const PositionKey& k = keys_[e];
    auto it = std::lower_bound(ordered_.begin(), ordered_.end(), k,
                               [&](ElementId a, const PositionKey& key) { return keys_[a] < key; });
    const auto at = static_cast<std::uint32_t>(it - ordered_.begin());
    ordered_.insert(it, e);
    pos_.push_back(at);
    for (std::uint32_t i = at + 1; i < ordered_.size(); ++i) pos_[ordered_[i]] = i;
}

}  // namespace blockrel
