#pragma once

// Independent checkers over run traces, plus small ground-truth oracles.

#include "blockrel/construction.hpp"
#include "blockrel/on_provider.hpp"
#include "blockrel/order.hpp"
#include "blockrel/trace.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace blockrel {

/// Exact checks must never fail; measurements approximate limit behaviour and
/// do not affect the verify exit status.
enum class CheckClass { exact, measure };
enum class CheckStatus { pass, fail, skip };

struct CheckResult {
    std::string id;
    CheckClass cls = CheckClass::exact;
    CheckStatus status = CheckStatus::pass;
    std::uint64_t seed = 0;
    Stage stage = 0;  // first violating stage on failure
    std::uint64_t violations = 0;
    std::string detail;
};

struct StabilizationTable {
    std::uint32_t bound = 0;
    Stage stages = 0;
    std::map<ElementId, Stage> l_last_change;  // 0: never mapped
    std::map<MId, Stage> m_last_change;
    std::vector<ElementId> unstable_l;  // unmapped at the end or changed in the final half
    std::vector<MId> unstable_m;        // preimage changed in the final half

    bool stable() const { return unstable_l.empty() && unstable_m.empty(); }
};

struct RunReport {
    std::uint64_t seed = 0;
    Stage stages = 0;
    std::vector<CheckResult> checks;
    std::optional<StabilizationTable> stabilization;
    std::map<std::uint32_t, std::uint32_t> jockusch;           // n -> qualifying stages
    std::vector<std::pair<Stage, std::size_t>> condensation;  // stage -> number of true blocks in L^s

    bool exact_pass() const;
    const CheckResult* find(const std::string& id) const;
    /// One record per check: {"check", "status", "class", "seed", "stage", ...}.
    void write_ndjson(std::ostream& out) const;
};

struct VerifyOptions {
    std::set<std::string> checks;  // empty: all
    std::uint32_t prefix = 10;     // stabilization bound
    std::uint32_t jockusch_n = 8;
};

/// All check ids, in report order.
const std::vector<std::string>& check_ids();
/// Parses "all" or a comma-separated list; throws std::invalid_argument on an unknown id.
std::set<std::string> parse_check_list(const std::string& text);

/// Streaming checker: feed it a trace (header optional) as events arrive, then
/// call finish(). Without a presentation, checks that need L or ground truth are
/// reported as skipped.
class TraceChecker : public TraceSink {
public:
    explicit TraceChecker(std::optional<OrderPresentation> p = std::nullopt, std::uint64_t seed = 0,
                          VerifyOptions opt = {});
    ~TraceChecker() override;
    void emit(const Json& event) override;
    RunReport finish();

private:
    struct State;
    std::unique_ptr<State> st_;
};

/// Reads the trace line by line; the header, when present, supplies the
/// presentation. Throws std::runtime_error on unreadable or malformed input.
RunReport verify_trace_file(const std::string& path, const VerifyOptions& opt = {});

/// The finite condensation of L^s: elements grouped by true block, in L order.
std::vector<std::vector<ElementId>> oracle_block_finite(const StageView& view, const GroundTruth& truth);

/// Injective and order-preserving over the whole domain of f.
bool check_partial_iso(const PartialIso& f, const StageIndex& view, const MState& m);

/// For each n <= n_max, the stages s <= s_max at which the on-set restricted to
/// {1..n} equals the true least-block-elements in {1..n}.
std::map<std::uint32_t, std::uint32_t> check_jockusch(OnProvider& provider, const OrderPresentation& p,
                                                     std::uint32_t n_max, Stage s_max);

}  // namespace blockrel
