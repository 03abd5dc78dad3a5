#include "blockrel/surgery.hpp"

#include "blockrel/detail/presentation_impl.hpp"
#include "blockrel/errors.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace blockrel {

// ---------------------------------------------------------------- prepending

OrderPresentation prepend_decidable(const OrderPresentation& p, const TypeExpr& t) {
    if (!std::holds_alternative<OmegaTimesEta>(t.node) && !std::holds_alternative<OmegaStar>(t.node))
        throw std::invalid_argument("only omega x eta or omega* can be prepended, got " + to_string(t));
    if (!p.expr()) throw Unsupported("prepending needs a generated presentation");
    auto impl = std::make_shared<detail::PresentationImpl>();
    impl->expr = sum({t, *p.expr()});
    impl->seed = p.seed();
    detail::append_items(t, Dyadic(0, 0), 1, impl->items);
    const auto split = static_cast<std::uint32_t>(impl->items.size());
    detail::append_items(*p.expr(), Dyadic(1, 1), 1, impl->items);
    detail::finish_layout(*impl);
    std::vector<std::uint32_t> left(split), right(impl->items.size() - split);
    std::iota(left.begin(), left.end(), 0u);
    std::iota(right.begin(), right.end(), split);
    detail::add_source(*impl, left, p.seed() ^ 0x9e3779b97f4a7c15ULL);
    detail::add_source(*impl, right, p.seed());
    return OrderPresentation(std::move(impl));
}

std::optional<ElementId> original_element(const OrderPresentation& composite, ElementId e) {
    const auto& impl = composite.impl();
    std::lock_guard lock(impl.mu);
    if (impl.element(e).source != 1) return std::nullopt;
    ElementId j = 0;
    for (ElementId x = 1; x <= e; ++x)
        if (impl.elements[x - 1].source == 1) ++j;
    return j;
}

ElementId composite_element(const OrderPresentation& composite, ElementId original) {
    const auto& impl = composite.impl();
    std::lock_guard lock(impl.mu);
    ElementId j = 0;
    for (ElementId x = 1;; ++x)
        if (impl.element(x).source == 1 && ++j == original) return x;
}

// ---------------------------------------------------------------- excision

bool PresentedCopy::contains(MId x) const { return std::find(order.begin(), order.end(), x) != order.end(); }

bool PresentedCopy::logged(MId u, MId v) const {
    std::unordered_map<MId, std::size_t> at;
    for (std::size_t k = 0; k < order.size(); ++k) at[order[k]] = k;
    if (!at.count(u) || !at.count(v) || u == v) return false;
    auto lo = at[u], hi = at[v];
    if (lo > hi) std::swap(lo, hi);
    for (const auto& c : cuts)
        if (lo <= at[c.left] && at[c.right] <= hi) return true;
    return false;
}

PresentedCopy snapshot_copy(const MState& m) {
    PresentedCopy copy;
    copy.order = m.ordered();
    copy.cuts = m.nonblock().cuts();
    return copy;
}

PresentedCopy excise_and_patch(const PresentedCopy& copy, MId cut, PatchMode mode) {
    const auto it = std::find(copy.order.begin(), copy.order.end(), cut);
    if (it == copy.order.end()) throw std::invalid_argument("cut element " + std::to_string(cut) + " not in the copy");
    PresentedCopy out;
    out.order.assign(it, copy.order.end());
    const std::set<MId> kept(out.order.begin(), out.order.end());
    for (const auto& c : copy.cuts)
        if (kept.count(c.left) && kept.count(c.right)) out.cuts.push_back(c);
    out.omega_star_prefix = copy.omega_star_prefix || mode == PatchMode::inside_block_plus_omega_star;
    return out;
}

// ---------------------------------------------------------------- classification

std::string to_string(CaseKind k) {
    switch (k) {
        case CaseKind::adjacent_blocks: return "adjacent_blocks";
        case CaseKind::strongly_eta_like_interval: return "strongly_eta_like_interval";
        case CaseKind::general: return "general";
    }
    return "?";
}

std::string to_string(AdjacentType t) {
    switch (t) {
        case AdjacentType::omega_plus_one: return "omega+1";
        case AdjacentType::one_plus_omega_star: return "1+omega*";
        case AdjacentType::omega_plus_omega_star: return "omega+omega*";
    }
    return "?";
}

Classification classify_case(const OrderPresentation& p) {
    if (!p.has_truth() || !p.expr()) throw Unsupported("classification needs ground truth");
    const auto& impl = p.impl();
    const auto& items = impl.items;
    Classification c;
    for (std::size_t i = 1; i < items.size(); ++i) {
        const auto& a = items[i - 1];
        const auto& b = items[i];
        if (a.kind != detail::ItemKind::single || b.kind != detail::ItemKind::single || a.group == b.group) continue;
        c.kind = CaseKind::adjacent_blocks;
        c.left_block = impl.canonicals[a.group].key;
        c.right_block = impl.canonicals[b.group].key;
        if (a.shape.right_inf && b.shape.left_inf) c.interval = AdjacentType::omega_plus_omega_star;
        else if (a.shape.right_inf) c.interval = AdjacentType::omega_plus_one;
        else c.interval = AdjacentType::one_plus_omega_star;
        return c;
    }
    for (const auto& item : items) {
        if (item.kind != detail::ItemKind::dense || item.stride != 0) continue;
        std::uint64_t largest = 0;
        bool finite = true;
        for (const auto& d : item.descriptors) {
            finite = finite && !d.infinite();
            largest = std::max(largest, d.fin);
        }
        if (!finite) continue;
        c.kind = CaseKind::strongly_eta_like_interval;
        c.bound = static_cast<std::uint32_t>(largest + 1);
        c.range_lo = item.lo;
        c.range_hi = Dyadic(1, 0).scaled_into(item.lo, item.shift);
        return c;
    }
    const bool dense = std::any_of(items.begin(), items.end(),
                                   [](const detail::Item& i) { return i.kind != detail::ItemKind::single; });
    if (!dense) throw Unsupported("the order is a single block");
    c.kind = CaseKind::general;
    return c;
}

// ---------------------------------------------------------------- embeddings

bool EmbeddingPrefix::injective() const {
    std::set<std::uint32_t> images;
    for (const auto& [x, y] : map)
        if (!images.insert(y).second) return false;
    return true;
}

bool EmbeddingPrefix::order_preserving(const std::function<bool(std::uint32_t, std::uint32_t)>& less) const {
    for (const auto& [a, fa] : map)
        for (const auto& [b, fb] : map)
            if (a != b && less(a, b) != less(fa, fb)) return false;
    return true;
}

bool EmbeddingPrefix::nontrivial() const {
    return std::any_of(map.begin(), map.end(), [](const auto& kv) { return kv.first != kv.second; });
}

void write_embedding(std::ostream& out, const EmbeddingPrefix& e, const std::string& kind) {
    out << "# embedding kind=" << kind << " horizon=" << e.horizon << " complete=" << (e.complete ? "true" : "false")
        << " size=" << e.map.size() << '\n';
    for (const auto& [x, y] : e.map) out << x << " -> " << y << '\n';
}

namespace {

// Immediate neighbour of x inside its canonical block (dir +1 successor, -1
// predecessor), found by enumerating up to `limit`; 0 if not found.
ElementId block_neighbour(const OrderPresentation& p, ElementId x, int dir, ElementId limit) {
    const auto& impl = p.impl();
    std::lock_guard lock(impl.mu);
    const auto rx = impl.element(x);
    const auto bx = impl.blocks[rx.block];
    auto adjacent = [&](const detail::ElementRec& z) {
        const auto& bz = impl.blocks[z.block];
        if (bz.canonical != bx.canonical) return false;
        if (z.block == rx.block) return z.key.intra == rx.key.intra + dir;
        const auto& c = impl.canonicals[bx.canonical].blocks;
        const auto ix = std::find(c.begin(), c.end(), rx.block) - c.begin();
        const auto iz = std::find(c.begin(), c.end(), z.block) - c.begin();
        if (iz != ix + dir) return false;
        return dir > 0 ? rx.key.intra == bx.max_intra && z.key.intra == bz.min_intra
                       : rx.key.intra == bx.min_intra && z.key.intra == bz.max_intra;
    };
    for (ElementId z = 1; z <= limit; ++z)
        if (z != x && adjacent(impl.element(z))) return z;
    return 0;
}

}  // namespace

EmbeddingPrefix embed_adjacent_blocks(const OrderPresentation& p, const Classification& c, std::uint32_t k) {
    if (c.kind != CaseKind::adjacent_blocks) throw std::invalid_argument("classification is not adjacent_blocks");
    const GroundTruth truth = p.truth();
    const bool shift_left = c.interval != AdjacentType::one_plus_omega_star;   // left block ends in omega
    const bool shift_right = c.interval != AdjacentType::omega_plus_one;       // right block starts with omega*
    const ElementId limit = std::max<ElementId>(4 * k, k + 4096);
    EmbeddingPrefix e;
    e.complete = true;
    for (ElementId x = 1; x <= k; ++x) {
        const Dyadic b = truth.block_key(x);
        ElementId y = x;
        if (shift_left && b == c.left_block) y = block_neighbour(p, x, +1, limit);
        else if (shift_right && b == c.right_block) y = block_neighbour(p, x, -1, limit);
        if (!y) {
            e.complete = false;
            continue;
        }
        e.map[x] = y;
        e.horizon = std::max<Stage>({e.horizon, x, y});
    }
    return e;
}

EmbeddingPrefix embed_via_nonblock(const std::vector<std::uint32_t>& domain,
                                   const std::function<std::vector<LoggedPair>(std::uint32_t)>& partners,
                                   const std::function<bool(std::uint32_t, std::uint32_t)>& less, std::uint32_t k,
                                   Stage horizon) {
    EmbeddingPrefix e;
    e.horizon = horizon;
    std::vector<std::uint32_t> order = domain;
    std::sort(order.begin(), order.end());
    std::set<std::uint32_t> used;
    for (std::uint32_t x : order) {
        if (e.map.size() == k) break;
        auto cands = partners(x);
        std::sort(cands.begin(), cands.end(),
                  [](const LoggedPair& a, const LoggedPair& b) { return std::tie(a.stage, a.y) < std::tie(b.stage, b.y); });
        for (const auto& c : cands) {
            if (c.y == x || used.count(c.y)) continue;
            bool fits = true;
            for (const auto& [a, fa] : e.map)
                if (less(a, x) != less(fa, c.y)) {
                    fits = false;
                    break;
                }
            if (!fits) continue;
            e.map[x] = c.y;
            used.insert(c.y);
            break;
        }
    }
    e.complete = e.map.size() == k;
    return e;
}

std::vector<LoggedPair> logged_partners(const MState& m, MId x) {
    std::vector<LoggedPair> out;
    const auto& cuts = m.nonblock().cuts();
    // Rightwards: a cut (a, b) lies in [x, y] once a was passed and y reached b.
    {
        std::unordered_map<MId, Stage> closing;
        std::optional<Stage> best;
        for (MId y = x; y; y = m.next(y)) {
            if (auto it = closing.find(y); it != closing.end()) best = best ? std::min(*best, it->second) : it->second;
            if (best && y != x) out.push_back({x, y, std::max({*best, m.created(x), m.created(y)})});
            for (std::size_t c : m.cuts_from(y)) {
                auto [it, fresh] = closing.emplace(cuts[c].right, cuts[c].stage);
                if (!fresh) it->second = std::min(it->second, cuts[c].stage);
            }
        }
    }
    // Leftwards: a cut (a, b) lies in [y, x] once b was passed and y reached a.
    {
        std::vector<char> passed(m.size() + 1, 0);
        std::optional<Stage> best;
        for (MId y = x; y; y = m.prev(y)) {
            for (std::size_t c : m.cuts_from(y))
                if (passed[cuts[c].right]) best = best ? std::min(*best, cuts[c].stage) : cuts[c].stage;
            passed[y] = 1;
            if (best && y != x) out.push_back({x, y, std::max({*best, m.created(x), m.created(y)})});
        }
    }
    return out;
}

std::vector<ElementId> eta_like_domain(const OrderPresentation& p, const Classification& c, Stage horizon) {
    const GroundTruth truth = p.truth();
    std::vector<ElementId> out;
    for (ElementId e = 1; e <= horizon; ++e) {
        const Dyadic b = truth.block_key(e);
        if (c.range_lo <= b && b < c.range_hi) out.push_back(e);
    }
    return out;
}

std::vector<LoggedPair> eta_like_partners(const OrderPresentation& p, const Classification& c, ElementId x,
                                          Stage horizon) {
    std::vector<PositionKey> keys(horizon + 1);
    for (ElementId e = 1; e <= horizon; ++e) keys[e] = p.key(e);
    const std::size_t need = c.bound > 0 ? c.bound - 1 : 0;
    std::vector<LoggedPair> out;
    for (ElementId y : eta_like_domain(p, c, horizon)) {
        if (y == x) continue;
        const auto& lo = std::min(keys[x], keys[y]);
        const auto& hi = std::max(keys[x], keys[y]);
        std::vector<ElementId> between;
        for (ElementId e = 1; e <= horizon; ++e)
            if (lo < keys[e] && keys[e] < hi) between.push_back(e);
        if (between.size() < need) continue;
        Stage at = std::max(x, y);
        if (need) at = std::max(at, between[need - 1]);
        out.push_back({x, y, at});
    }
    return out;
}

CopyEmbedding embed_general(const OrderPresentation& p, const ProviderConfig& cfg, Stage stages, std::uint32_t k) {
    const auto cond = p.truth().condensation();
    if (cond != Condensation::eta && cond != Condensation::one_eta)
        throw Unsupported("general-case surgery is implemented for condensation eta and 1+eta, got " +
                          to_string(cond));
    const bool surgery = cond == Condensation::one_eta;
    const OrderPresentation q = surgery ? prepend_decidable(p, omega_times_eta()) : p;
    Engine eng(q, make_provider(q, cfg));
    eng.run_to(stages);
    const MState& m = eng.m();

    CopyEmbedding out;
    out.copy = snapshot_copy(m);
    if (surgery) {
        // The image of L's leftmost enumerated point marks where L starts in M.
        ElementId first = 0;
        for (ElementId e = 1; e <= stages; ++e)
            if (original_element(q, e) && (!first || q.key(e) < q.key(first))) first = e;
        const MId cut = first ? eng.f().at(first) : 0;
        if (!cut) {
            out.embedding.horizon = stages;
            return out;
        }
        const bool left_inf = p.impl().items.front().shape.left_inf;
        out.copy = excise_and_patch(out.copy, cut,
                                    left_inf ? PatchMode::inside_block_plus_omega_star : PatchMode::at_leftmost);
    }
    const std::set<MId> alive(out.copy.order.begin(), out.copy.order.end());
    std::vector<std::uint32_t> domain(alive.begin(), alive.end());
    auto partners = [&](std::uint32_t x) {
        auto all = logged_partners(m, x);
        std::erase_if(all, [&](const LoggedPair& lp) { return !alive.count(lp.y); });
        return all;
    };
    auto less = [&](std::uint32_t a, std::uint32_t b) { return m.less(a, b); };
    out.embedding = embed_via_nonblock(domain, partners, less, k, stages);
    for (const auto& [x, y] : out.embedding.map) out.pairs.push_back({x, y, *m.logged_at(x, y)});
    return out;
}

}  // namespace blockrel
