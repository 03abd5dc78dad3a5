#pragma once

// Computable linear orders presented stage by stage.
//
// A presentation enumerates one new element per stage; element s is the one
// enumerated at stage s. Built-in presentations are generated from a TypeExpr
// and carry ground truth (true blocks, least-block-elements, condensation),
// which only verification code may consult. Scripted presentations are read
// from a line-based text file.

#include "blockrel/dyadic.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace blockrel {

using ElementId = std::uint32_t;  // L-element; also the stage at which it was enumerated
using Stage = std::uint32_t;

// ---------------------------------------------------------------------------
// Type expressions

struct TypeExpr;

struct Fin {
    std::uint32_t k = 1;
};
struct Omega {};
struct OmegaStar {};
struct Zeta {};
struct Sum {
    std::vector<TypeExpr> parts;
};
/// Dense shuffle of blocks. The block created at dyadic depth d (1-based, within
/// the shuffle's interval) has type descriptors[(d-1) % n], with every Fin size
/// grown by stride * ((d-1) / n).
struct EtaShuffle {
    std::vector<TypeExpr> descriptors;
    std::uint32_t stride = 0;
};
struct OmegaTimesEta {};
struct ToggleEntry {
    Stage stage = 0;
    std::uint32_t position = 0;  // 1-based creation index of the block
    bool member = true;
};
/// Dense order whose i-th created block has size p_i (the i-th prime) when
/// position i is a member, and type zeta otherwise. Membership of a position at
/// a stage is the flag of its last script entry at or before that stage.
struct PrimeBlockReplacement {
    std::vector<ToggleEntry> script;
};

struct TypeExpr {
    using Node = std::variant<Fin, Omega, OmegaStar, Zeta, Sum, EtaShuffle, OmegaTimesEta,
                              PrimeBlockReplacement>;
    Node node;
};

TypeExpr fin(std::uint32_t k);
TypeExpr omega();
TypeExpr omega_star();
TypeExpr zeta();
TypeExpr sum(std::vector<TypeExpr> parts);
TypeExpr eta_shuffle(std::vector<TypeExpr> descriptors, std::uint32_t stride = 0);
TypeExpr omega_times_eta();
TypeExpr prime_blocks(std::vector<ToggleEntry> script = {});
/// EtaShuffle([Fin(1), Fin(2), Fin(3), ...]): a block at depth d has size d.
TypeExpr staircase();

/// Throws ValidationError when an invariant of the grammar is broken.
void validate(const TypeExpr& expr);

/// Text form, e.g. "sum(omega,fin(1))", "shuffle(fin(2))", "shuffle+1(fin(1))".
std::string to_string(const TypeExpr& expr);
/// Inverse of to_string; throws ValidationError on malformed input.
TypeExpr parse_type_expr(const std::string& text);

// ---------------------------------------------------------------------------
// Keys and views

struct PositionKey {
    Dyadic block;
    std::int64_t intra = 0;

    friend std::strong_ordering operator<=>(const PositionKey&, const PositionKey&) = default;
    friend bool operator==(const PositionKey&, const PositionKey&) = default;
};

enum class Ordering { lt, gt };

struct StageView {
    Stage stage = 0;
    std::vector<ElementId> ordered;  // {1..stage} sorted by the comparator
};

enum class Condensation { eta, one_eta, eta_one, one_eta_one, other };
std::string to_string(Condensation c);

class OrderPresentation;

/// Read-only access to the generator's ground truth. Verification only.
class GroundTruth {
public:
    explicit GroundTruth(const OrderPresentation& p) : p_(&p) {}

    /// Canonical key of the true block containing e.
    Dyadic block_key(ElementId e) const;
    bool is_lbe(ElementId e) const;
    Condensation condensation() const;
    /// Stage at which the block with this canonical key has all its elements,
    /// or nullopt for infinite blocks.
    std::optional<Stage> block_complete_at(const Dyadic& key) const;
    /// Size of the true block with this key, nullopt if infinite.
    std::optional<std::uint64_t> block_size(const Dyadic& key) const;

private:
    const OrderPresentation* p_;
};

namespace detail {
struct PresentationImpl;
}

class OrderPresentation {
public:
    OrderPresentation() = default;
    explicit OrderPresentation(std::shared_ptr<detail::PresentationImpl> impl);

    std::uint64_t seed() const;
    /// The expression this presentation realizes; nullopt for scripted orders.
    const std::optional<TypeExpr>& expr() const;
    /// Number of elements in the whole order if finite.
    std::optional<Stage> capacity() const;
    bool has_truth() const;
    GroundTruth truth() const;

    /// Key of element e, generating the schedule up to e if needed.
    PositionKey key(ElementId e) const;

    const detail::PresentationImpl& impl() const { return *impl_; }
    const std::shared_ptr<detail::PresentationImpl>& shared_impl() const { return impl_; }

private:
    std::shared_ptr<detail::PresentationImpl> impl_;
};

OrderPresentation make_presentation(const TypeExpr& expr, std::uint64_t seed);
StageView enumerate_to(const OrderPresentation& p, Stage s);
Ordering compare(const OrderPresentation& p, ElementId a, ElementId b);

/// Scripted order file:
///   insert <id> <leftAnchor> <rightAnchor>   (anchors: id, MIN or MAX; must be adjacent)
///   truth-block <id> <label>
///   truth-lbe <id>
///   # comment
OrderPresentation load_scripted(std::istream& in);
OrderPresentation load_scripted_file(const std::string& path);

enum class TruthKind { block_key, is_lbe, condensation, block_complete };
using TruthValue = std::variant<Dyadic, bool, Condensation, std::optional<Stage>>;
/// Ground-truth query; arg is an ElementId (block_complete takes any element of the block).
TruthValue truth_query(const OrderPresentation& p, TruthKind kind, ElementId arg = 1);

/// n-th prime, 1-based (prime(1) == 2).
std::uint64_t nth_prime(std::uint32_t n);

}  // namespace blockrel
