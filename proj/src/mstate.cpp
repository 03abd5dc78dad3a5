#include "blockrel/construction.hpp"

#include <algorithm>

namespace blockrel {

std::vector<MId> MState::ordered() const {
    std::vector<MId> out;
    out.reserve(size());
    for (MId x = first(); x != 0; x = next(x)) out.push_back(x);
    return out;
}

bool MState::share_label(MId a, MId b) const {
    for (LabelId l : on_[a])
        if (std::find(on_[b].begin(), on_[b].end(), l) != on_[b].end()) return true;
    return false;
}

LabelId MState::largest_label(MId m) const {
    LabelId best = 0;
    for (LabelId l : on_[m])
        if (!best || labels_[l]->cluster.size() > labels_[best]->cluster.size()) best = l;
    return best;
}

std::optional<Stage> MState::logged_at(MId u, MId v) const {
    if (u == v || !exists(u) || !exists(v)) return std::nullopt;
    if (less(v, u)) std::swap(u, v);
    std::optional<Stage> best;
    for (MId x = u; x != v; x = next(x)) {
        auto it = by_left_.find(x);
        if (it == by_left_.end()) continue;
        for (std::size_t k : it->second) {
            const auto& c = log_.cuts()[k];
            if (c.right == v || less(c.right, v))
                if (!best || c.stage < *best) best = c.stage;
        }
    }
    if (!best) return std::nullopt;
    return std::max({*best, created(u), created(v)});
}

const std::vector<std::size_t>& MState::cuts_from(MId m) const {
    static const std::vector<std::size_t> none;
    const auto it = by_left_.find(m);
    return it == by_left_.end() ? none : it->second;
}

bool MState::logged(MId u, MId v) const { return logged_at(u, v).has_value(); }

MId MState::insert_after(MId after, Stage s) {
    const MId x = order_.insert_after(after);
    created_.push_back(s);
    on_.emplace_back();
    dirty_.push_back(x);
    return x;
}

LabelId MState::new_label(NodeId node) {
    auto l = std::make_unique<Label>();
    l->node = node;
    l->alive = true;
    labels_.push_back(std::move(l));
    return static_cast<LabelId>(labels_.size() - 1);
}

void MState::attach(LabelId l, MId m) { on_[m].push_back(l); }

void MState::detach(LabelId l, MId m) {
    auto& v = on_[m];
    v.erase(std::remove(v.begin(), v.end(), l), v.end());
    dirty_.push_back(m);
}

void MState::kill(LabelId l) {
    for (MId m : labels_[l]->cluster) detach(l, m);
    labels_[l].reset();
}

void MState::record_cut(MId x, MId y, Stage s) {
    by_left_[x].push_back(log_.cuts().size());
    log_.add(x, y, s);
}

std::size_t PartialIso::defined() const {
    return static_cast<std::size_t>(std::count_if(map.begin(), map.end(), [](MId m) { return m != 0; }));
}

}  // namespace blockrel
