#pragma once

// Endpoint surgery on constructed copies and the self-embedding builders.

#include "blockrel/construction.hpp"
#include "blockrel/order.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blockrel {

// ---------------------------------------------------------------- prepending

/// Presentation of t + L: every t-element lies left of every L-element. The two
/// schedules take turns stage by stage. t must be omega_times_eta() or omega_star().
OrderPresentation prepend_decidable(const OrderPresentation& p, const TypeExpr& t);

/// For a presentation built by prepend_decidable: the id in the original
/// presentation of composite element e, or nullopt if e belongs to the prefix.
std::optional<ElementId> original_element(const OrderPresentation& composite, ElementId e);
/// Inverse of original_element.
ElementId composite_element(const OrderPresentation& composite, ElementId original);

// ---------------------------------------------------------------- excision

/// A snapshot of a presented copy: M order, its non-block cuts, and whether a
/// decidable omega* has been added on the left.
struct PresentedCopy {
    std::vector<MId> order;
    std::vector<NonBlockLog::Cut> cuts;
    bool omega_star_prefix = false;

    bool contains(MId x) const;
    /// Is (u, v) logged, i.e. does some cut lie between them?
    bool logged(MId u, MId v) const;
};

PresentedCopy snapshot_copy(const MState& m);

enum class PatchMode { at_leftmost, inside_block_plus_omega_star };

/// Removes every element strictly left of `cut`; the second mode also adds a
/// decidable omega* on the left. Cuts with a removed side are dropped.
PresentedCopy excise_and_patch(const PresentedCopy& copy, MId cut, PatchMode mode);

// ---------------------------------------------------------------- classification

enum class CaseKind { adjacent_blocks, strongly_eta_like_interval, general };
std::string to_string(CaseKind k);

/// Interval types produced by a pair of adjacent blocks.
enum class AdjacentType { omega_plus_one, one_plus_omega_star, omega_plus_omega_star };
std::string to_string(AdjacentType t);

struct Classification {
    CaseKind kind = CaseKind::general;
    AdjacentType interval = AdjacentType::omega_plus_one;  // adjacent_blocks only
    Dyadic left_block;                                     // adjacent_blocks: canonical keys
    Dyadic right_block;
    std::uint32_t bound = 0;  // strongly_eta_like_interval: every block there has size < bound
    Dyadic range_lo;          // strongly_eta_like_interval: block keys in [range_lo, range_hi)
    Dyadic range_hi;
};

/// Ground-truth classifier for built-in presentations, in the order: adjacent
/// blocks, strongly eta-like interval, general. Throws Unsupported for a single
/// block or a presentation without ground truth.
Classification classify_case(const OrderPresentation& p);

// ---------------------------------------------------------------- embeddings

struct EmbeddingPrefix {
    std::map<std::uint32_t, std::uint32_t> map;
    Stage horizon = 0;
    bool complete = false;

    bool injective() const;
    /// `less` is the order of the copy the map lives in.
    bool order_preserving(const std::function<bool(std::uint32_t, std::uint32_t)>& less) const;
    bool nontrivial() const;
};

/// "x -> y" lines after a header carrying the horizon and completeness flag.
void write_embedding(std::ostream& out, const EmbeddingPrefix& e, const std::string& kind);

/// Identity outside the adjacent pair of blocks; successor inside a block that
/// ends in omega, predecessor inside a block that starts with omega*. The
/// built-in generator already presents each top-level block by consecutive
/// integer offsets, so it serves as the decidable copy. Covers elements 1..k,
/// extending the enumeration as far as needed to find images.
EmbeddingPrefix embed_adjacent_blocks(const OrderPresentation& p, const Classification& c, std::uint32_t k);

/// A logged pair with its discovery stage.
struct LoggedPair {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    Stage stage = 0;
};

/// Greedy assignment over the first k elements (id order) of `domain`: each x
/// gets the earliest-discovered partner y (ties by id) that keeps the map
/// injective and order-preserving against the earlier assignments.
EmbeddingPrefix embed_via_nonblock(const std::vector<std::uint32_t>& domain,
                                   const std::function<std::vector<LoggedPair>(std::uint32_t)>& partners,
                                   const std::function<bool(std::uint32_t, std::uint32_t)>& less, std::uint32_t k,
                                   Stage horizon);

/// Partners of x in a copy, with discovery stage max(first cut between them,
/// creation of both).
std::vector<LoggedPair> logged_partners(const MState& m, MId x);

/// Non-block pairs that are known outright inside a strongly eta-like interval:
/// two elements of the interval with at least bound - 1 elements between them at
/// stage s lie in different blocks. Stage = first such stage.
std::vector<LoggedPair> eta_like_partners(const OrderPresentation& p, const Classification& c, ElementId x,
                                          Stage horizon);

/// Elements of p (ids <= horizon) in the strongly eta-like interval.
std::vector<ElementId> eta_like_domain(const OrderPresentation& p, const Classification& c, Stage horizon);

/// General case: run the construction (after prepending omega x eta and excising
/// when the order has a left endpoint block) and embed the first k elements of
/// the copy using only logged pairs.
struct CopyEmbedding {
    EmbeddingPrefix embedding;
    PresentedCopy copy;
    std::vector<LoggedPair> pairs;  // the logged pair behind each assignment
};
CopyEmbedding embed_general(const OrderPresentation& p, const ProviderConfig& cfg, Stage stages, std::uint32_t k);

}  // namespace blockrel
