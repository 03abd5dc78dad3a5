#include "blockrel/order.hpp"

#include "blockrel/detail/presentation_impl.hpp"
#include "blockrel/errors.hpp"

#include <algorithm>
#include <numeric>

namespace blockrel {

std::uint64_t nth_prime(std::uint32_t n) {
    static std::mutex mu;
    static std::vector<std::uint64_t> primes{2};
    if (n == 0) throw std::invalid_argument("nth_prime is 1-based");
    std::lock_guard lock(mu);
    for (std::uint64_t c = primes.back() + 1; primes.size() < n; ++c) {
        bool prime = true;
        for (auto p : primes) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(c);
    }
    return primes[n - 1];
}

namespace detail {

namespace {

BlockShape shape_of(const TypeExpr& e) {
    if (auto f = std::get_if<Fin>(&e.node)) return {false, f->k, false};
    if (std::holds_alternative<Omega>(e.node)) return {false, 0, true};
    if (std::holds_alternative<OmegaStar>(e.node)) return {true, 0, false};
    if (std::holds_alternative<Zeta>(e.node)) return {true, 0, true};
    throw ValidationError("not a single-block type: " + to_string(e));
}

void flatten(const TypeExpr& e, std::vector<const TypeExpr*>& out) {
    if (auto s = std::get_if<Sum>(&e.node)) {
        for (const auto& p : s->parts) flatten(p, out);
    } else {
        out.push_back(&e);
    }
}

int ceil_log2(std::size_t n) {
    int m = 0;
    while ((std::size_t{1} << m) < n) ++m;
    return m;
}

bool current_member(const std::vector<ToggleEntry>& script, std::uint32_t pos, Stage s) {
    bool member = true;
    for (const auto& t : script)
        if (t.position == pos && t.stage <= s) member = t.member;
    return member;
}

bool final_member(const std::vector<ToggleEntry>& script, std::uint32_t pos) {
    bool member = true;
    for (const auto& t : script)
        if (t.position == pos) member = t.member;
    return member;
}

}  // namespace

void append_items(const TypeExpr& expr, const Dyadic& lo, int shift, std::vector<Item>& out) {
    std::vector<const TypeExpr*> leaves;
    flatten(expr, leaves);
    const int m = ceil_log2(leaves.size());
    for (std::size_t j = 0; j < leaves.size(); ++j) {
        const TypeExpr& leaf = *leaves[j];
        Item item;
        item.shift = shift + m;
        item.lo = Dyadic(static_cast<std::int64_t>(j), m).scaled_into(lo, shift);
        if (auto sh = std::get_if<EtaShuffle>(&leaf.node)) {
            item.kind = ItemKind::dense;
            for (const auto& d : sh->descriptors) item.descriptors.push_back(shape_of(d));
            item.stride = sh->stride;
        } else if (std::holds_alternative<OmegaTimesEta>(leaf.node)) {
            item.kind = ItemKind::dense;
            item.descriptors.push_back({false, 0, true});
        } else if (auto pr = std::get_if<PrimeBlockReplacement>(&leaf.node)) {
            item.kind = ItemKind::prime;
            item.script = pr->script;
        } else {
            item.kind = ItemKind::single;
            item.shape = shape_of(leaf);
        }
        out.push_back(std::move(item));
    }
}

namespace {

void bound_block(BlockRec& b, const BlockShape& shape, bool top_level) {
    if (top_level) {
        b.min_intra = shape.left_inf ? kNegInf : 0;
        if (shape.right_inf) {
            b.max_intra = kPosInf;
        } else if (shape.fin > 0) {
            b.max_intra = static_cast<std::int64_t>(shape.fin) - 1;
        } else {
            b.max_intra = -1;
        }
    } else {
        // Dense blocks: only the infinite tails constrain the direction of growth.
        b.min_intra = (shape.right_inf && !shape.left_inf) ? 0 : kNegInf;
        b.max_intra = (shape.left_inf && !shape.right_inf) ? -1 : kPosInf;
    }
    b.final_cap = shape.infinite() ? kUnbounded : shape.fin;
}

std::int64_t start_intra(const BlockRec& b) {
    if (b.min_intra != kNegInf) return b.min_intra;
    if (b.max_intra != kPosInf) return b.max_intra;
    return 0;
}

}  // namespace

void finish_layout(PresentationImpl& impl) {
    // Canonical groups: runs of single items whose facing endpoints exist merge
    // into one true block.
    std::vector<char> tokens;  // 'G' point of the condensation, 'D' dense part
    for (std::uint32_t i = 0; i < impl.items.size(); ++i) {
        Item& item = impl.items[i];
        if (item.kind != ItemKind::single) {
            tokens.push_back('D');
            continue;
        }
        const bool merge = i > 0 && impl.items[i - 1].kind == ItemKind::single &&
                           !impl.items[i - 1].shape.right_inf && !item.shape.left_inf;
        if (!merge) {
            CanonicalBlock c;
            c.key = Dyadic(1, item.shift + 1).scaled_into(item.lo, 0);
            impl.canonical_by_key[c.key] = static_cast<std::uint32_t>(impl.canonicals.size());
            impl.canonicals.push_back(c);
            tokens.push_back('G');
        }
        item.group = static_cast<std::uint32_t>(impl.canonicals.size() - 1);

        BlockRec b;
        b.key = Dyadic(1, item.shift + 1).scaled_into(item.lo, 0);
        b.item = i;
        b.deterministic = true;
        bound_block(b, item.shape, true);
        b.lo = b.hi = start_intra(b);
        b.canonical = item.group;
        CanonicalBlock& c = impl.canonicals[item.group];
        c.blocks.push_back(static_cast<std::uint32_t>(impl.blocks.size()));
        c.infinite = c.infinite || item.shape.infinite();
        impl.blocks.push_back(b);
    }

    const bool has_dense = std::find(tokens.begin(), tokens.end(), 'D') != tokens.end();
    bool adjacent_points = false;
    for (std::size_t i = 1; i < tokens.size(); ++i)
        if (tokens[i] == 'G' && tokens[i - 1] == 'G') adjacent_points = true;
    if (!has_dense || adjacent_points) {
        impl.condensation = Condensation::other;
    } else {
        const bool left = tokens.front() == 'G';
        const bool right = tokens.back() == 'G';
        impl.condensation = left ? (right ? Condensation::one_eta_one : Condensation::one_eta)
                                 : (right ? Condensation::eta_one : Condensation::eta);
    }

    if (!has_dense) {
        std::uint64_t total = 0;
        bool finite = true;
        for (const auto& b : impl.blocks) {
            if (b.final_cap == kUnbounded) finite = false;
            else total += b.final_cap;
        }
        if (finite) impl.capacity = static_cast<Stage>(total);
    }
}

void add_source(PresentationImpl& impl, const std::vector<std::uint32_t>& item_indices,
                std::uint64_t seed) {
    SourceState src;
    src.seed = seed;
    src.rng = SplitMix64(seed);
    for (auto idx : item_indices) {
        const Item& item = impl.items[idx];
        if (item.kind == ItemKind::single) {
            for (std::uint32_t b = 0; b < impl.blocks.size(); ++b)
                if (impl.blocks[b].item == idx) src.pending.push_back(b);
        } else {
            DenseCursor d;
            d.item = idx;
            src.dense.push_back(std::move(d));
        }
    }
    impl.sources.push_back(std::move(src));
}

namespace {

std::uint64_t cap_now(const PresentationImpl& impl, const BlockRec& b, Stage s) {
    const Item& item = impl.items[b.item];
    if (item.kind != ItemKind::prime) return b.final_cap;
    const std::uint64_t p = nth_prime(b.prime_index);
    const bool fin_member = final_member(item.script, b.prime_index);
    if (current_member(item.script, b.prime_index, s)) return p;
    return fin_member ? p - 1 : kUnbounded;
}

bool growable(const PresentationImpl& impl, const BlockRec& b, Stage s) {
    if (b.count >= cap_now(impl, b, s)) return false;
    if (b.count == 0) return true;
    return (b.lo > b.min_intra) || (b.hi < b.max_intra);
}

ElementRec emit(const PresentationImpl& impl, std::uint32_t block_idx, std::int64_t intra, Stage s) {
    BlockRec& b = impl.blocks[block_idx];
    if (b.count == 0) {
        b.lo = b.hi = intra;
    } else {
        b.lo = std::min(b.lo, intra);
        b.hi = std::max(b.hi, intra);
    }
    ++b.count;
    if (b.count == b.final_cap) b.completed_at = s;
    CanonicalBlock& c = impl.canonicals[b.canonical];
    if (c.first == 0) c.first = s;
    return ElementRec{PositionKey{b.key, intra}, block_idx};
}

ElementRec grow(const PresentationImpl& impl, SourceState& src, std::uint32_t block_idx, Stage s) {
    BlockRec& b = impl.blocks[block_idx];
    if (b.count == 0) return emit(impl, block_idx, start_intra(b), s);
    const bool can_left = b.lo > b.min_intra;
    const bool can_right = b.hi < b.max_intra;
    bool right;
    if (can_left && can_right) {
        right = b.deterministic ? (b.count % 2 == 0) : (src.rng.below(2) == 1);
    } else {
        right = can_right;
    }
    return emit(impl, block_idx, right ? b.hi + 1 : b.lo - 1, s);
}

ElementRec create(const PresentationImpl& impl, SourceState& src, Stage s) {
    DenseCursor& d = src.dense[src.dense_ptr];
    src.dense_ptr = (src.dense_ptr + 1) % src.dense.size();
    const Item& item = impl.items[d.item];

    if (d.pos == d.perm.size()) {
        ++d.depth;
        if (d.depth + item.shift > Dyadic::kMaxExp)
            throw std::overflow_error("dense key depth exhausted");
        d.perm.resize(std::size_t{1} << (d.depth - 1));
        std::iota(d.perm.begin(), d.perm.end(), std::uint64_t{0});
        for (std::size_t i = d.perm.size(); i > 1; --i)
            std::swap(d.perm[i - 1], d.perm[src.rng.below(i)]);
        d.pos = 0;
    }
    const std::uint64_t r = d.perm[d.pos++];
    ++d.created;

    BlockRec b;
    b.key = Dyadic(static_cast<std::int64_t>(2 * r + 1), d.depth).scaled_into(item.lo, item.shift);
    b.item = d.item;
    if (item.kind == ItemKind::prime) {
        b.prime_index = d.created;
        const bool member = final_member(item.script, b.prime_index);
        b.final_cap = member ? nth_prime(b.prime_index) : kUnbounded;
    } else {
        const std::size_t n = item.descriptors.size();
        const std::size_t level = static_cast<std::size_t>(d.depth - 1);
        BlockShape shape = item.descriptors[level % n];
        if (!shape.infinite()) shape.fin += static_cast<std::uint64_t>(item.stride) * (level / n);
        bound_block(b, shape, false);
    }
    CanonicalBlock c;
    c.key = b.key;
    c.infinite = b.final_cap == kUnbounded;
    c.blocks.push_back(static_cast<std::uint32_t>(impl.blocks.size()));
    b.canonical = static_cast<std::uint32_t>(impl.canonicals.size());
    impl.canonical_by_key[c.key] = b.canonical;
    impl.canonicals.push_back(c);
    impl.blocks.push_back(b);
    const auto idx = static_cast<std::uint32_t>(impl.blocks.size() - 1);
    ElementRec rec = emit(impl, idx, start_intra(impl.blocks[idx]), s);
    if (impl.blocks[idx].count != impl.blocks[idx].final_cap) src.pending.push_back(idx);
    return rec;
}

void drop_if_complete(const PresentationImpl& impl, SourceState& src, std::size_t pos) {
    const BlockRec& b = impl.blocks[src.pending[pos]];
    if (b.final_cap == kUnbounded || b.count != b.final_cap) return;
    src.pending.erase(src.pending.begin() + static_cast<std::ptrdiff_t>(pos));
    if (pos < src.cursor) --src.cursor;
}

std::optional<ElementRec> grow_oldest_finite(const PresentationImpl& impl, SourceState& src, Stage s) {
    for (std::size_t pos = 0; pos < src.pending.size(); ++pos) {
        const BlockRec& b = impl.blocks[src.pending[pos]];
        if (cap_now(impl, b, s) == kUnbounded || !growable(impl, b, s)) continue;
        ElementRec rec = grow(impl, src, src.pending[pos], s);
        drop_if_complete(impl, src, pos);
        return rec;
    }
    return std::nullopt;
}

std::optional<ElementRec> grow_round_robin(const PresentationImpl& impl, SourceState& src, Stage s) {
    for (std::size_t tries = 0; tries < src.pending.size(); ++tries) {
        if (src.cursor >= src.pending.size()) src.cursor = 0;
        const std::size_t pos = src.cursor++;
        if (!growable(impl, impl.blocks[src.pending[pos]], s)) continue;
        ElementRec rec = grow(impl, src, src.pending[pos], s);
        drop_if_complete(impl, src, pos);
        return rec;
    }
    return std::nullopt;
}

// Dense layouts: a third of the stages create a block, a third grow the oldest
// finite block that can grow, a third grow round-robin (which is how infinite
// blocks grow). Layouts without dense items only grow round-robin.
ElementRec step(const PresentationImpl& impl, SourceState& src, Stage s) {
    std::optional<ElementRec> rec;
    if (src.dense.empty()) {
        rec = grow_round_robin(impl, src, s);
    } else {
        const auto lane = src.rng.below(3);
        if (lane == 0) return create(impl, src, s);
        if (lane == 1) {
            rec = grow_oldest_finite(impl, src, s);
            if (!rec) rec = grow_round_robin(impl, src, s);
        } else {
            rec = grow_round_robin(impl, src, s);
        }
    }
    if (rec) return *rec;
    if (!src.dense.empty()) return create(impl, src, s);
    throw std::out_of_range("presentation exhausted at stage " + std::to_string(s));
}

}  // namespace

void PresentationImpl::extend_to(Stage s) const {
    if (capacity && s > *capacity)
        throw std::out_of_range("presentation has only " + std::to_string(*capacity) + " elements");
    if (scripted) {
        if (s > elements.size()) throw std::out_of_range("scripted order exhausted");
        return;
    }
    // Sources take turns; an exhausted source passes its turn on.
    while (elements.size() < s) {
        const Stage stage = static_cast<Stage>(elements.size() + 1);
        const std::size_t first = (stage - 1) % sources.size();
        for (std::size_t k = 0;; ++k) {
            const std::size_t at = (first + k) % sources.size();
            try {
                ElementRec rec = step(*this, sources[at], stage);
                rec.source = static_cast<std::uint32_t>(at);
                elements.push_back(rec);
                break;
            } catch (const std::out_of_range&) {
                if (k + 1 == sources.size()) throw;
            }
        }
    }
}

const ElementRec& PresentationImpl::element(ElementId e) const {
    if (e == 0) throw std::invalid_argument("element ids start at 1");
    extend_to(e);
    return elements[e - 1];
}

}  // namespace detail

// ---------------------------------------------------------------------------

OrderPresentation::OrderPresentation(std::shared_ptr<detail::PresentationImpl> impl)
    : impl_(std::move(impl)) {}

std::uint64_t OrderPresentation::seed() const { return impl_->seed; }
const std::optional<TypeExpr>& OrderPresentation::expr() const { return impl_->expr; }
std::optional<Stage> OrderPresentation::capacity() const { return impl_->capacity; }
bool OrderPresentation::has_truth() const { return impl_->truth; }

GroundTruth OrderPresentation::truth() const {
    if (!impl_->truth) throw Unsupported("presentation has no ground-truth records");
    return GroundTruth(*this);
}

PositionKey OrderPresentation::key(ElementId e) const {
    std::lock_guard lock(impl_->mu);
    return impl_->element(e).key;
}

OrderPresentation make_presentation(const TypeExpr& expr, std::uint64_t seed) {
    validate(expr);
    auto impl = std::make_shared<detail::PresentationImpl>();
    impl->expr = expr;
    impl->seed = seed;
    detail::append_items(expr, Dyadic(0, 0), 0, impl->items);
    detail::finish_layout(*impl);
    std::vector<std::uint32_t> all(impl->items.size());
    std::iota(all.begin(), all.end(), 0u);
    detail::add_source(*impl, all, seed);
    return OrderPresentation(std::move(impl));
}

StageView enumerate_to(const OrderPresentation& p, Stage s) {
    if (s == 0) throw std::invalid_argument("enumerate_to requires s >= 1");
    const auto& impl = p.impl();
    std::lock_guard lock(impl.mu);
    impl.extend_to(s);
    StageView view;
    view.stage = s;
    view.ordered.resize(s);
    std::iota(view.ordered.begin(), view.ordered.end(), ElementId{1});
    std::sort(view.ordered.begin(), view.ordered.end(), [&](ElementId a, ElementId b) {
        return impl.elements[a - 1].key < impl.elements[b - 1].key;
    });
    return view;
}

Ordering compare(const OrderPresentation& p, ElementId a, ElementId b) {
    if (a == b) throw std::invalid_argument("compare requires distinct elements");
    return p.key(a) < p.key(b) ? Ordering::lt : Ordering::gt;
}

// ---------------------------------------------------------------------------

Dyadic GroundTruth::block_key(ElementId e) const {
    const auto& impl = p_->impl();
    std::lock_guard lock(impl.mu);
    const auto& rec = impl.element(e);
    return impl.canonicals[impl.blocks[rec.block].canonical].key;
}

bool GroundTruth::is_lbe(ElementId e) const {
    const auto& impl = p_->impl();
    std::lock_guard lock(impl.mu);
    const auto& rec = impl.element(e);
    return impl.canonicals[impl.blocks[rec.block].canonical].first == e;
}

Condensation GroundTruth::condensation() const { return p_->impl().condensation; }

std::optional<Stage> GroundTruth::block_complete_at(const Dyadic& key) const {
    const auto& impl = p_->impl();
    std::lock_guard lock(impl.mu);
    auto it = impl.canonical_by_key.find(key);
    if (it == impl.canonical_by_key.end()) throw std::invalid_argument("unknown block key " + key.str());
    const std::uint32_t idx = it->second;
    if (impl.canonicals[idx].infinite) return std::nullopt;
    constexpr Stage kSearchLimit = 50'000'000;
    for (;;) {
        Stage done = 0;
        bool all = true;
        for (auto b : impl.canonicals[idx].blocks) {
            if (impl.blocks[b].completed_at == 0) {
                all = false;
                break;
            }
            done = std::max(done, impl.blocks[b].completed_at);
        }
        if (all) return done;
        const auto next = static_cast<Stage>(impl.elements.size() + 1);
        if (next > kSearchLimit) throw std::runtime_error("block did not complete within search limit");
        impl.extend_to(next);
    }
}

std::optional<std::uint64_t> GroundTruth::block_size(const Dyadic& key) const {
    const auto& impl = p_->impl();
    std::lock_guard lock(impl.mu);
    auto it = impl.canonical_by_key.find(key);
    if (it == impl.canonical_by_key.end()) throw std::invalid_argument("unknown block key " + key.str());
    const auto& c = impl.canonicals[it->second];
    if (c.infinite) return std::nullopt;
    std::uint64_t total = 0;
    for (auto b : c.blocks) total += impl.blocks[b].final_cap;
    return total;
}

TruthValue truth_query(const OrderPresentation& p, TruthKind kind, ElementId arg) {
    const GroundTruth t = p.truth();
    switch (kind) {
        case TruthKind::block_key: return t.block_key(arg);
        case TruthKind::is_lbe: return t.is_lbe(arg);
        case TruthKind::condensation: return t.condensation();
        case TruthKind::block_complete: return t.block_complete_at(t.block_key(arg));
    }
    throw std::invalid_argument("unknown truth kind");
}

}  // namespace blockrel
