#pragma once

// The "on" relation: n is on at stage s when it currently looks like a
// least-block-element.

#include "blockrel/order.hpp"
#include "blockrel/stage_index.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace blockrel {

/// Stages at which each element was on, stored as runs of consecutive stages.
class OnHistory {
public:
    /// Record the on-set of stage s; stages must be recorded in order 1, 2, ...
    void record(Stage s, const std::vector<ElementId>& on);

    Stage stage() const { return stage_; }
    bool on(ElementId n, Stage s) const;
    /// Latest stage t <= bound at which n was on.
    std::optional<Stage> last_on_at_or_before(ElementId n, Stage bound) const;
    /// Last stage strictly before s at which n was on, or 1 if none.
    Stage last_on_before(ElementId n, Stage s) const;
    std::vector<Stage> on_stages(ElementId n) const;
    const std::vector<ElementId>& current() const { return current_; }

private:
    Stage stage_ = 0;
    std::vector<std::vector<std::pair<Stage, Stage>>> runs_{{}};  // index by element
    std::vector<ElementId> current_;
};

struct ProviderConfig {
    enum class Kind { intrinsic, oracle };
    Kind kind = Kind::oracle;
    Stage sync_period = 25;
    std::uint64_t noise_num = 1;  // noise rate num/den
    std::uint64_t noise_den = 10;
    std::uint64_t seed = 0;
    /// Noise touches element n only while s < n + noise_window; 0 means 4 * sync_period.
    Stage noise_window = 0;

    Stage effective_window() const { return noise_window ? noise_window : 4 * sync_period; }
};

class OnProvider {
public:
    virtual ~OnProvider() = default;
    /// On-set (ascending ids) for stage view.stage(). Called once per stage, in order.
    virtual std::vector<ElementId> on_set(const StageIndex& view) = 0;
};

/// n is on iff for every y <N n at least c_n + 1 elements lie strictly between
/// y and n in L^s, where c_n counts n's earlier on-stages.
class IntrinsicProvider : public OnProvider {
public:
    std::vector<ElementId> on_set(const StageIndex& view) override;
    std::uint64_t counter(ElementId n) const { return n < counters_.size() ? counters_[n] : 0; }

private:
    std::vector<std::uint64_t> counters_{0};
};

/// Ground truth at sync stages; elsewhere ground truth flipped with probability
/// num/den for young elements. Decisions are a pure function of (seed, n, s).
class OracleProvider : public OnProvider {
public:
    OracleProvider(OrderPresentation p, ProviderConfig cfg);
    std::vector<ElementId> on_set(const StageIndex& view) override;
    bool on(ElementId n, Stage s) const;

private:
    bool decide(ElementId n, Stage s, bool truth) const;

    OrderPresentation p_;
    ProviderConfig cfg_;
    std::vector<char> lbe_;  // cached ground truth, index by element
};

std::unique_ptr<OnProvider> make_provider(const OrderPresentation& p, const ProviderConfig& cfg);

/// Query against a recorded history.
bool on(const OnHistory& hist, ElementId n, Stage s);

}  // namespace blockrel
