#pragma once

// Generator internals shared by order.cpp and surgery.cpp (prepend builds a
// composite layout out of two existing ones).

#include "blockrel/order.hpp"
#include "blockrel/rng.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

namespace blockrel::detail {

inline constexpr std::int64_t kNegInf = std::numeric_limits<std::int64_t>::min();
inline constexpr std::int64_t kPosInf = std::numeric_limits<std::int64_t>::max();
inline constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

/// A single block: optional omega* tail, `fin` points, optional omega tail.
struct BlockShape {
    bool left_inf = false;
    std::uint64_t fin = 0;
    bool right_inf = false;

    bool infinite() const { return left_inf || right_inf; }
};

enum class ItemKind { single, dense, prime };

/// One summand of the flattened layout, occupying the key interval [lo, lo + 2^-shift).
struct Item {
    ItemKind kind = ItemKind::single;
    Dyadic lo;
    int shift = 0;
    BlockShape shape;                      // single
    std::vector<BlockShape> descriptors;   // dense
    std::uint32_t stride = 0;              // dense
    std::vector<ToggleEntry> script;       // prime
    std::uint32_t group = 0;               // single: index of its canonical block
};

struct BlockRec {
    Dyadic key;
    std::uint32_t item = 0;
    bool deterministic = false;  // top-level single blocks fill left to right
    std::int64_t min_intra = kNegInf;
    std::int64_t max_intra = kPosInf;
    std::uint64_t final_cap = kUnbounded;
    std::uint32_t prime_index = 0;  // 1-based, prime items only
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::uint64_t count = 0;
    Stage completed_at = 0;
    std::uint32_t canonical = 0;
};

struct CanonicalBlock {
    Dyadic key;
    ElementId first = 0;
    std::vector<std::uint32_t> blocks;
    bool infinite = false;
};

struct ElementRec {
    PositionKey key;
    std::uint32_t block = 0;
    std::uint32_t source = 0;
};

struct DenseCursor {
    std::uint32_t item = 0;
    int depth = 0;
    std::vector<std::uint64_t> perm;
    std::size_t pos = 0;
    std::uint32_t created = 0;
};

struct SourceState {
    std::uint64_t seed = 0;
    SplitMix64 rng{0};
    std::vector<DenseCursor> dense;
    std::size_t dense_ptr = 0;
    std::vector<std::uint32_t> pending;
    std::size_t cursor = 0;
};

struct PresentationImpl {
    std::optional<TypeExpr> expr;
    std::uint64_t seed = 0;
    bool truth = true;
    bool scripted = false;
    std::optional<Stage> capacity;
    Condensation condensation = Condensation::other;
    std::vector<Item> items;

    mutable std::mutex mu;
    mutable std::vector<SourceState> sources;
    mutable std::vector<BlockRec> blocks;
    mutable std::vector<CanonicalBlock> canonicals;
    mutable std::map<Dyadic, std::uint32_t> canonical_by_key;
    mutable std::vector<ElementRec> elements;  // index e-1

    /// Generate elements up to and including stage s. Caller holds `mu`.
    void extend_to(Stage s) const;
    const ElementRec& element(ElementId e) const;  // caller holds `mu`
};

/// Flatten `expr` into layout items covering [lo, lo + 2^-shift).
void append_items(const TypeExpr& expr, const Dyadic& lo, int shift, std::vector<Item>& out);
/// Assign canonical groups, single blocks, condensation and capacity.
void finish_layout(PresentationImpl& impl);
/// Add a generator source over the items with the given indices.
void add_source(PresentationImpl& impl, const std::vector<std::uint32_t>& item_indices,
                std::uint64_t seed);

}  // namespace blockrel::detail
