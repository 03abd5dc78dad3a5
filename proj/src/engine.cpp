#include "blockrel/construction.hpp"
#include "blockrel/errors.hpp"

#include <algorithm>

namespace blockrel {

namespace {

constexpr NodeKey kZero{0, 0, 0};
constexpr NodeKey kRight{1, 0, 0};
constexpr NodeKey kWait2{kKeyMax, kKeyMax, kKeyMax};
constexpr NodeKey kWait3{kKeyMax, 0, 0};

Json key_json(const NodeKey& k) { return Json::array({k[0], k[1], k[2]}); }

std::vector<MId> sorted(std::vector<MId> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

Engine::Engine(OrderPresentation p, std::unique_ptr<OnProvider> provider, TraceSink* sink,
               EngineOptions opts)
    : p_(std::move(p)), provider_(std::move(provider)), sink_(sink), opts_(opts), index_(p_) {
    TreeNode root;
    root.alive = true;
    root.enter = euler_.insert_after(OrderList::kHead);
    root.exit = euler_.insert_after(root.enter);
    nodes_.push_back(std::move(root));
}

void Engine::emit(const Json& ev) { sink_->emit(ev); }

void Engine::fault(const std::string& what) {
    if (sink_) emit(Json{{"kind", "fault"}, {"stage", stage_}, {"message", what}});
    if (sink_) sink_->flush();
    throw ConstructionFault(stage_, what);
}

void Engine::split_fault(ElementId n, MId x, MId y) {
    fault("growth for " + std::to_string(n) + " would split a labeled cluster between M-elements " +
          std::to_string(x) + " and " + std::to_string(y));
}

// ---------------------------------------------------------------- tree

NodeId Engine::child(NodeId parent, ElementId n, std::uint8_t sub, const NodeKey& key) {
    auto& kids = nodes_[parent].children;
    if (auto it = kids.find(key); it != kids.end()) return it->second;
    const NodeId id = static_cast<NodeId>(nodes_.size());
    TreeNode node;
    node.parent = parent;
    node.level = n;
    node.sub = sub;
    node.key = key;
    node.created = stage_;
    node.alive = true;
    auto after = kids.lower_bound(key);
    if (after == kids.begin())
        node.enter = euler_.insert_after(nodes_[parent].enter);
    else
        node.enter = euler_.insert_after(nodes_[std::prev(after)->second].exit);
    node.exit = euler_.insert_after(node.enter);
    kids.emplace(key, id);
    nodes_.push_back(std::move(node));
    return id;
}

bool Engine::descends(NodeId a, NodeId anc) const {
    const auto& x = nodes_[a];
    const auto& y = nodes_[anc];
    return euler_.less(y.enter, x.enter) && euler_.less(x.exit, y.exit);
}

void Engine::collect_subtree(NodeId root, std::vector<NodeId>& out) const {
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        out.push_back(id);
        for (const auto& [k, c] : nodes_[id].children) stack.push_back(c);
    }
}

void Engine::delete_nodes(std::vector<NodeId> ids) {
    std::sort(ids.begin(), ids.end());
    for (NodeId id : ids) {
        if (nodes_[id].label) drop_label(id, "prune");
        if (sink_) emit(Json{{"kind", "prune"}, {"stage", stage_}, {"node", id}});
    }
    for (NodeId id : ids) {
        const auto& node = nodes_[id];
        auto& siblings = nodes_[node.parent].children;
        if (auto it = siblings.find(node.key); it != siblings.end() && it->second == id) siblings.erase(it);
        euler_.erase(node.enter);
        euler_.erase(node.exit);
    }
    for (NodeId id : ids) nodes_.release(id);
}

void Engine::prune_right(NodeId id) {
    const auto& node = nodes_[id];
    const auto& kids = nodes_[node.parent].children;
    std::vector<NodeId> doomed;
    for (auto it = kids.upper_bound(node.key); it != kids.end(); ++it) collect_subtree(it->second, doomed);
    if (!doomed.empty()) delete_nodes(std::move(doomed));
}

void Engine::visit(NodeId id) {
    nodes_[id].path_stage = stage_;
    path_.push_back(id);
    tip_ = id;
    prune_right(id);
}

void Engine::emit_path_node(ElementId n, std::uint8_t sub, NodeId id) {
    const auto& node = nodes_[id];
    const std::array<std::uint32_t, 3> now{id, node.referent, node.label};
    const bool fresh_level = last_path_.size() <= n;
    if (fresh_level) last_path_.resize(n + 1, {});
    auto& prev = last_path_[n][sub - 1];
    if (!fresh_level && prev == now) return;
    prev = now;
    if (sink_) emit(Json{{"kind", "path-node"},
              {"stage", stage_},
              {"n", n},
              {"sub", sub},
              {"node", id},
              {"key", key_json(node.key)},
              {"ref", node.referent},
              {"label", node.label}});
}

// ---------------------------------------------------------------- labels

void Engine::remove_label_elements(LabelId l, const std::vector<MId>& ms, const char* cause) {
    if (ms.empty()) return;
    for (MId m : ms) m_.detach(l, m);
    if (sink_) emit(Json{{"kind", "label-remove"},
              {"stage", stage_},
              {"node", m_.label(l).node},
              {"label", l},
              {"m", sorted(ms)},
              {"cause", cause}});
}

void Engine::drop_label(NodeId id, const char* cause) {
    const LabelId l = nodes_[id].label;
    const auto& lab = m_.label(l);
    if (sink_) emit(Json{{"kind", "label-remove"},
              {"stage", stage_},
              {"node", id},
              {"label", l},
              {"m", sorted({lab.cluster.begin(), lab.cluster.end()})},
              {"cause", cause}});
    m_.kill(l);
    nodes_[id].label = 0;
}

bool Engine::carries_path_label(MId m) const {
    for (LabelId l : m_.labels_on(m))
        if (nodes_[m_.label(l).node].path_stage == stage_) return true;
    return false;
}

MId Engine::fresh_after(MId after) {
    const MId x = m_.insert_after(after, stage_);
    if (sink_) emit(Json{{"kind", "m-insert"}, {"stage", stage_}, {"m", x}, {"after", after}});
    return x;
}

void Engine::add_path_cluster(LabelId l) {
    const auto& lab = m_.label(l);
    auto next = path_clusters_.upper_bound(Probe{lab.cluster.front()});
    if (next != path_clusters_.end() && !m_.less(lab.cluster.back(), m_.label(*next).cluster.front()))
        fault("on-path clusters overlap (label " + std::to_string(l) + ")");
    if (next != path_clusters_.begin()) {
        const auto& left = m_.label(*std::prev(next));
        if (!m_.less(left.cluster.back(), lab.cluster.front()))
            fault("on-path clusters overlap (label " + std::to_string(l) + ")");
    }
    path_clusters_.insert(l);
    path_labels_.push_back(l);
}

// ---------------------------------------------------------------- stage

void Engine::run_stage() {
    ++stage_;
    const Stage s = stage_;
    index_.advance();
    const auto on = provider_->on_set(index_);
    hist_.record(s, on);
    on_now_.assign(s + 1, 0);
    for (ElementId e : on) on_now_[e] = 1;
    ref_stamp_.resize(s + 1, 0);
    if (sink_) emit(Json{{"kind", "stage-begin"}, {"stage", s}});
    if (sink_) emit(Json{{"kind", "on-set"}, {"stage", s}, {"on", on}});

    path_.clear();
    path_labels_.clear();
    path_clusters_.clear();
    nodes_[0].path_stage = s;
    tip_ = 0;
    for (ElementId n = 1; n <= s; ++n) {
        sublevel_one(n);
        sublevels_two_three(n);
    }
    finalize();
}

// Step 1.
void Engine::sublevel_one(ElementId n) {
    const bool on = is_on(n);
    const NodeId id = child(tip_, n, 1, on ? kZero : kRight);
    visit(id);
    if (on) {
        if (referenced(n)) {
            if (nodes_[id].label) drop_label(id, "release");
            nodes_[id].referent = 0;
        } else {
            nodes_[id].referent = n;
            ref_stamp_[n] = stage_;
            sync_image(id, n);
            add_path_cluster(nodes_[id].label);
        }
    }
    emit_path_node(n, 1, id);
}

// Step 2.
void Engine::sync_image(NodeId sigma, ElementId n) {
    const BlockRange b = block(n);
    std::vector<MId> added;
    std::vector<MId> shrunk;
    LabelId l = nodes_[sigma].label;
    if (!l) {
        l = m_.new_label(sigma);
        nodes_[sigma].label = l;
        // Left constraint: the on-path cluster whose referent is nearest below n in L.
        const std::uint32_t here = index_.pos(n);
        LabelId left = 0, right = 0;
        std::uint32_t left_pos = 0, right_pos = 0;
        for (LabelId q : path_labels_) {
            const std::uint32_t at = index_.pos(nodes_[m_.label(q).node].referent);
            if (at < here && (!left || at > left_pos)) left = q, left_pos = at;
            if (at > here && (!right || at < right_pos)) right = q, right_pos = at;
        }
        MId after = 0;
        if (left) {
            const MId r = m_.label(left).cluster.back();
            after = m_.label(m_.largest_label(r)).cluster.back();
        }
        if (right && after && !m_.less(after, m_.label(right).cluster.front()))
            fault("no admissible place for the image of " + std::to_string(n));
        const MId x = fresh_after(after);
        m_.attach(l, x);
        m_.label_mut(l).cluster.push_back(x);
        added.push_back(x);
    }
    auto& cl = m_.label_mut(l).cluster;
    const MId anchor = *std::min_element(cl.begin(), cl.end());
    std::size_t have = static_cast<std::size_t>(std::find(cl.begin(), cl.end(), anchor) - cl.begin());
    const std::size_t want_left = b.left_count();
    while (have > want_left) {
        shrunk.push_back(cl.front());
        m_.detach(l, cl.front());
        cl.erase(cl.begin());
        --have;
    }
    while (have < want_left) {
        const MId front = cl.front();
        const MId pv = m_.prev(front);
        if (pv && m_.share_label(pv, front)) split_fault(n, pv, front);
        const MId x = fresh_after(pv);
        m_.attach(l, x);
        cl.insert(cl.begin(), x);
        added.push_back(x);
        ++have;
    }
    std::size_t have_right = cl.size() - 1 - have;
    const std::size_t want_right = b.right_count();
    while (have_right > want_right) {
        shrunk.push_back(cl.back());
        m_.detach(l, cl.back());
        cl.pop_back();
        --have_right;
    }
    while (have_right < want_right) {
        const MId back = cl.back();
        const MId nx = m_.next(back);
        if (nx && m_.share_label(back, nx)) split_fault(n, back, nx);
        const MId x = fresh_after(back);
        m_.attach(l, x);
        cl.push_back(x);
        added.push_back(x);
        ++have_right;
    }
    m_.label_mut(l).lblock = block_elements(index_, b);
    if (sink_ && !shrunk.empty())
        emit(Json{{"kind", "label-remove"},
                  {"stage", stage_},
                  {"node", sigma},
                  {"label", l},
                  {"m", sorted(shrunk)},
                  {"cause", "shrink"}});
    if (sink_ && !added.empty())
        emit(Json{{"kind", "label-add"}, {"stage", stage_}, {"node", sigma}, {"label", l}, {"m", sorted(added)}});
}

// Steps 3 to 8.
void Engine::sublevels_two_three(ElementId n) {
    const NodeId s1 = tip_;
    const MId nm = n;
    auto pass_through = [&](const NodeKey& k2) {
        const NodeId a = child(tip_, n, 2, k2);
        visit(a);
        emit_path_node(n, 2, a);
        const NodeId b = child(a, n, 3, kZero);
        visit(b);
        emit_path_node(n, 3, b);
    };

    // Step 3.
    if (!m_.exists(nm) || carries_path_label(nm)) {
        pass_through(kZero);
        return;
    }

    // Step 4: the L-interval between the preimages of the neighbouring on-path clusters.
    std::int64_t lo = 0;
    std::int64_t hi = static_cast<std::int64_t>(stage_) - 1;
    {
        auto it = path_clusters_.upper_bound(Probe{nm});
        if (it != path_clusters_.end()) hi = static_cast<std::int64_t>(index_.pos(m_.label(*it).lblock.front())) - 1;
        if (it != path_clusters_.begin())
            lo = static_cast<std::int64_t>(index_.pos(m_.label(*std::prev(it)).lblock.back())) + 1;
    }
    std::vector<ElementId> on_in;  // L order
    for (std::int64_t x = lo; x <= hi; ++x) {
        const ElementId e = index_.at(static_cast<std::uint32_t>(x));
        if (is_on(e)) on_in.push_back(e);
    }
    if (on_in.size() < 2) {
        pass_through(kWait2);
        return;
    }
    const Stage c = nodes_[s1].created;
    ElementId p = 0, q = 0;
    std::vector<ElementId> early;
    for (ElementId e : on_in)
        if (e <= c) early.push_back(e);
    if (early.size() >= 2) {
        p = *std::min_element(early.begin(), early.end() - 1);
        for (ElementId e : early)
            if (index_.less(p, e) && (!q || e < q)) q = e;
    } else {
        std::vector<ElementId> two = on_in;
        std::partial_sort(two.begin(), two.begin() + 2, two.end());
        p = two[0];
        q = two[1];
        if (index_.less(q, p)) std::swap(p, q);
    }
    const NodeId pi = child(tip_, n, 2, NodeKey{std::max<std::uint32_t>(c, std::max(p, q)), p, q});
    visit(pi);
    emit_path_node(n, 2, pi);

    // Step 5: fallow cluster and selected preimage.
    LabelId fallow = 0;
    for (LabelId l : m_.labels_on(nm))
        if (!descends(m_.label(l).node, pi) &&
            (!fallow || m_.label(l).cluster.size() > m_.label(fallow).cluster.size()))
            fallow = l;
    const MId f_lo = fallow ? m_.label(fallow).cluster.front() : nm;
    const MId f_hi = fallow ? m_.label(fallow).cluster.back() : nm;
    const std::uint32_t fsize = fallow ? static_cast<std::uint32_t>(m_.label(fallow).cluster.size()) : 1;
    {
        auto& node = nodes_[pi];
        if (node.fallow_size != fsize) {
            node.fallow_size = fsize;
            node.list_start = stage_;
            node.preimage.clear();
        }
        bool intact = !node.preimage.empty();
        for (std::size_t j = 1; intact && j < node.preimage.size(); ++j)
            intact = index_.pos(node.preimage[j]) == index_.pos(node.preimage[j - 1]) + 1;
        if (!intact) {
            node.preimage.clear();
            const std::uint32_t a = index_.pos(p) + 1;
            const std::uint32_t z = index_.pos(q);  // exclusive
            std::pair<Stage, std::vector<ElementId>> best{kKeyMax, {}};
            for (std::uint32_t w = a; w + fsize <= z; ++w) {
                std::vector<ElementId> win(index_.ordered().begin() + w, index_.ordered().begin() + w + fsize);
                const Stage first = std::max(node.list_start, *std::max_element(win.begin(), win.end()));
                std::pair<Stage, std::vector<ElementId>> cand{first, std::move(win)};
                if (best.second.empty() || cand < best) best = std::move(cand);
            }
            node.preimage = std::move(best.second);
        }
    }
    if (nodes_[pi].preimage.empty()) {
        const NodeId w = child(pi, n, 3, kWait3);
        visit(w);
        emit_path_node(n, 3, w);
        return;
    }
    const std::vector<ElementId> pre = nodes_[pi].preimage;
    {
        auto& node = nodes_[pi];
        const std::pair<MId, MId> seen{f_lo, f_hi};
        if (node.seen_fallow != seen || node.seen_preimage != pre) {
            node.seen_fallow = seen;
            node.seen_preimage = pre;
            std::vector<NodeId> below;
            for (const auto& [k, ch] : node.children) collect_subtree(ch, below);
            if (!below.empty()) delete_nodes(std::move(below));
        }
    }

    auto in_fallow = [&](MId x) {
        if (!fallow) return x == nm;
        const auto& fc = m_.label(fallow).cluster;
        return std::find(fc.begin(), fc.end(), x) != fc.end();
    };

    // Step 6: candidate list, ordered by the last disturbance between candidate and preimage.
    const std::uint32_t plo = index_.pos(pre.front());
    const std::uint32_t phi = index_.pos(pre.back());
    const ElementId pmin = *std::min_element(pre.begin(), pre.end());
    std::vector<std::pair<ElementId, ElementId>> ranked;  // (stamp, x)
    {
        ElementId run = 0;
        for (std::uint32_t x = plo; x-- > index_.pos(p);) {
            const ElementId e = index_.at(x);
            if (e <= pmin) ranked.emplace_back(run, e);
            run = std::max(run, e);
        }
        for (std::uint32_t x = plo; x <= phi; ++x)
            if (index_.at(x) <= pmin) ranked.emplace_back(0, index_.at(x));
        run = 0;
        for (std::uint32_t x = phi + 1; x <= index_.pos(q); ++x) {
            const ElementId e = index_.at(x);
            if (e <= pmin) ranked.emplace_back(run, e);
            run = std::max(run, e);
        }
        std::sort(ranked.begin(), ranked.end());
    }
    std::vector<ElementId> ilist;
    for (const auto& r : ranked) ilist.push_back(r.second);

    {
        std::vector<std::pair<NodeKey, NodeId>> kids(nodes_[pi].children.begin(), nodes_[pi].children.end());
        for (const auto& [k, ch] : kids) {
            if (k == kWait3) continue;
            if (k[0] > ilist.size() || nodes_[ch].referent != ilist[k[0] - 1]) {
                std::vector<NodeId> sub;
                collect_subtree(ch, sub);
                delete_nodes(std::move(sub));
                continue;
            }
            const LabelId l = nodes_[ch].label;
            if (!l) continue;
            const BlockRange bi = block(nodes_[ch].referent);
            const auto& lab = m_.label(l);
            std::size_t front = 0, back = lab.lblock.size();
            while (front < back && !bi.contains_pos(index_.pos(lab.lblock[front]))) ++front;
            while (back > front && !bi.contains_pos(index_.pos(lab.lblock[back - 1]))) --back;
            if (front == 0 && back == lab.lblock.size()) continue;
            // A cut through a nested cluster would break laminarity; drop the node instead.
            auto kept = [&](MId x) {
                const auto it = std::find(lab.cluster.begin(), lab.cluster.end(), x);
                const auto at = static_cast<std::size_t>(it - lab.cluster.begin());
                return it != lab.cluster.end() && front <= at && at < back;
            };
            bool splits = false;
            for (std::size_t k = 0; k < lab.cluster.size() && !splits; ++k) {
                if (front <= k && k < back) continue;
                splits = in_fallow(lab.cluster[k]);
                for (LabelId o : m_.labels_on(lab.cluster[k])) {
                    if (o == l) continue;
                    const auto& oc = m_.label(o).cluster;
                    splits = splits || kept(oc.front()) || kept(oc.back());
                }
            }
            if (splits) {
                std::vector<NodeId> sub;
                collect_subtree(ch, sub);
                delete_nodes(std::move(sub));
                continue;
            }
            auto& mut = m_.label_mut(l);
            std::vector<MId> cut(mut.cluster.begin(), mut.cluster.begin() + static_cast<std::ptrdiff_t>(front));
            cut.insert(cut.end(), mut.cluster.begin() + static_cast<std::ptrdiff_t>(back), mut.cluster.end());
            mut.cluster.erase(mut.cluster.begin() + static_cast<std::ptrdiff_t>(back), mut.cluster.end());
            mut.cluster.erase(mut.cluster.begin(), mut.cluster.begin() + static_cast<std::ptrdiff_t>(front));
            mut.lblock.erase(mut.lblock.begin() + static_cast<std::ptrdiff_t>(back), mut.lblock.end());
            mut.lblock.erase(mut.lblock.begin(), mut.lblock.begin() + static_cast<std::ptrdiff_t>(front));
            remove_label_elements(l, cut, "cut");
        }
    }

    // Step 7.
    std::vector<std::optional<BlockRange>> blocks(ilist.size());
    auto block_of = [&](std::size_t j) -> const BlockRange& {
        if (!blocks[j]) blocks[j] = block(ilist[j]);
        return *blocks[j];
    };
    std::size_t chosen = 0;
    for (std::size_t k = 1; k <= ilist.size() && !chosen; ++k) {
        const ElementId i = ilist[k - 1];
        if (!is_on(i) || referenced(i)) continue;
        const BlockRange& bi = block_of(k - 1);
        if (!(bi.lo <= plo && phi <= bi.hi)) continue;
        bool nested = true;
        for (std::size_t j = 0; j + 1 < k && nested; ++j) {
            const BlockRange& bj = block_of(j);
            nested = bi.lo <= bj.lo && bj.hi <= bi.hi;
        }
        if (!nested) continue;
        // The cluster absorbed in step 8 must fit around the preimage inside block(i).
        std::vector<NodeId> doomed;
        for (auto it = nodes_[pi].children.upper_bound(NodeKey{static_cast<std::uint32_t>(k), 0, 0});
             it != nodes_[pi].children.end(); ++it)
            doomed.push_back(it->second);
        LabelId c0 = 0;
        for (LabelId l : m_.labels_on(nm)) {
            const NodeId owner = m_.label(l).node;
            bool gone = false;
            for (NodeId d : doomed) gone = gone || owner == d || descends(owner, d);
            if (!gone && (!c0 || m_.label(l).cluster.size() > m_.label(c0).cluster.size())) c0 = l;
        }
        std::size_t left = 0, right = 0;
        if (c0) {
            const auto& cl = m_.label(c0).cluster;
            left = static_cast<std::size_t>(std::find(cl.begin(), cl.end(), f_lo) - cl.begin());
            right = static_cast<std::size_t>(cl.end() - std::find(cl.begin(), cl.end(), f_hi)) - 1;
        }
        if (left <= plo - bi.lo && right <= bi.hi - phi) chosen = k;
    }
    if (!chosen) {
        const NodeId w = child(pi, n, 3, kWait3);
        visit(w);
        emit_path_node(n, 3, w);
        return;
    }

    // Step 8.
    const ElementId i = ilist[chosen - 1];
    const NodeId iota = child(pi, n, 3, NodeKey{static_cast<std::uint32_t>(chosen), 0, 0});
    nodes_[iota].referent = i;
    visit(iota);
    ref_stamp_[i] = stage_;
    if (!nodes_[iota].label) nodes_[iota].label = m_.new_label(iota);
    absorb(iota, nm, *blocks[chosen - 1], plo, phi, f_lo, f_hi);
    add_path_cluster(nodes_[iota].label);
    emit_path_node(n, 3, iota);
}

void Engine::absorb(NodeId iota, MId nm, const BlockRange& b, std::uint32_t plo, std::uint32_t phi, MId f_lo,
                    MId f_hi) {
    const LabelId big = m_.largest_label(nm);
    std::vector<MId> cl = big ? m_.label(big).cluster : std::vector<MId>{nm};
    const std::size_t left = static_cast<std::size_t>(std::find(cl.begin(), cl.end(), f_lo) - cl.begin());
    const std::size_t right = static_cast<std::size_t>(cl.end() - std::find(cl.begin(), cl.end(), f_hi)) - 1;
    const std::size_t want_left = plo - b.lo;
    const std::size_t want_right = b.hi - phi;
    if (left > want_left || right > want_right) fault("absorbed cluster does not fit the block");
    for (std::size_t k = left; k < want_left; ++k) {
        const MId pv = m_.prev(cl.front());
        if (pv && m_.share_label(pv, cl.front())) split_fault(nm, pv, cl.front());
        cl.insert(cl.begin(), fresh_after(pv));
    }
    for (std::size_t k = right; k < want_right; ++k) {
        const MId nx = m_.next(cl.back());
        if (nx && m_.share_label(cl.back(), nx)) split_fault(nm, cl.back(), nx);
        cl.push_back(fresh_after(cl.back()));
    }
    const LabelId l = nodes_[iota].label;
    for (MId x : m_.label(l).cluster)
        if (std::find(cl.begin(), cl.end(), x) == cl.end())
            fault("absorbed cluster for " + std::to_string(nm) + " drops M-element " + std::to_string(x));
    std::vector<MId> added;
    for (MId x : cl) {
        const auto& on = m_.labels_on(x);
        if (std::find(on.begin(), on.end(), l) == on.end()) {
            m_.attach(l, x);
            added.push_back(x);
        }
    }
    auto& lab = m_.label_mut(l);
    lab.cluster = std::move(cl);
    lab.lblock = block_elements(index_, b);
    if (sink_ && !added.empty())
        emit(Json{{"kind", "label-add"}, {"stage", stage_}, {"node", iota}, {"label", l}, {"m", sorted(added)}});
}

void Engine::finalize() {
    // Only adjacencies next to an inserted or unlabeled element can be new cuts.
    std::vector<MId> lefts;
    for (MId d : m_.dirty_) {
        if (const MId pv = m_.prev(d)) lefts.push_back(pv);
        if (m_.next(d)) lefts.push_back(d);
    }
    m_.dirty_.clear();
    std::sort(lefts.begin(), lefts.end());
    lefts.erase(std::unique(lefts.begin(), lefts.end()), lefts.end());
    std::sort(lefts.begin(), lefts.end(), [&](MId a, MId b) { return m_.less(a, b); });
    for (MId x : lefts) {
        const MId y = m_.next(x);
        if (!m_.share_label(x, y) && !m_.log_.has_cut(x, y)) {
            m_.record_cut(x, y, stage_);
            if (sink_) emit(Json{{"kind", "nonblock-pair"}, {"stage", stage_}, {"left", x}, {"right", y}});
        }
    }
    std::vector<MId> map(stage_ + 1, 0);
    for (LabelId l : path_labels_) {
        const auto& lab = m_.label(l);
        if (lab.lblock.size() != lab.cluster.size()) fault("cluster and block sizes disagree");
        for (std::size_t k = 0; k < lab.lblock.size(); ++k)
            if (!map[lab.lblock[k]]) map[lab.lblock[k]] = lab.cluster[k];
    }
    if (sink_ && opts_.emit_fsnapshot) {
        Json set = Json::array();
        Json unset = Json::array();
        for (ElementId a = 1; a <= stage_; ++a) {
            const MId old = f_.at(a);
            if (map[a] && map[a] != old) set.push_back(Json::array({a, map[a]}));
            if (!map[a] && old) unset.push_back(a);
        }
        emit(Json{{"kind", "f-snapshot"}, {"stage", stage_}, {"set", set}, {"unset", unset}});
    }
    f_.stage = stage_;
    f_.map = std::move(map);
}

}  // namespace blockrel
