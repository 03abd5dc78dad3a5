#include "blockrel/on_provider.hpp"

#include "blockrel/errors.hpp"
#include "blockrel/rng.hpp"

#include <algorithm>
#include <limits>

namespace blockrel {

void OnHistory::record(Stage s, const std::vector<ElementId>& on) {
    if (s != stage_ + 1) throw std::logic_error("on-history stages must be recorded in order");
    stage_ = s;
    if (runs_.size() <= s) runs_.resize(s + 1);
    for (ElementId n : on) {
        if (n == 0 || n > s) throw std::invalid_argument("on-set element outside 1..s");
        auto& r = runs_[n];
        if (!r.empty() && r.back().second + 1 == s) {
            r.back().second = s;
        } else {
            r.emplace_back(s, s);
        }
    }
    current_ = on;
}

std::optional<Stage> OnHistory::last_on_at_or_before(ElementId n, Stage bound) const {
    if (n >= runs_.size()) return std::nullopt;
    const auto& r = runs_[n];
    // First run starting after bound; the run before it holds the answer.
    auto it = std::upper_bound(r.begin(), r.end(), bound,
                               [](Stage b, const std::pair<Stage, Stage>& run) { return b < run.first; });
    if (it == r.begin()) return std::nullopt;
    --it;
    return std::min(it->second, bound);
}

bool OnHistory::on(ElementId n, Stage s) const {
    auto t = last_on_at_or_before(n, s);
    return t && *t == s;
}

Stage OnHistory::last_on_before(ElementId n, Stage s) const {
    if (s <= 1) return 1;
    return last_on_at_or_before(n, s - 1).value_or(1);
}

std::vector<Stage> OnHistory::on_stages(ElementId n) const {
    std::vector<Stage> out;
    if (n >= runs_.size()) return out;
    for (auto [a, b] : runs_[n])
        for (Stage t = a; t <= b; ++t) out.push_back(t);
    return out;
}

bool on(const OnHistory& hist, ElementId n, Stage s) { return hist.on(n, s); }

std::vector<ElementId> IntrinsicProvider::on_set(const StageIndex& view) {
    const Stage s = view.stage();
    counters_.resize(s + 1, 0);
    const auto& ord = view.ordered();
    constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();
    // gap[n] = fewest elements strictly between n and any smaller id, over both sides.
    std::vector<std::uint64_t> gap(s + 1, kNone);
    std::vector<std::uint32_t> stack;
    for (int pass = 0; pass < 2; ++pass) {
        stack.clear();
        for (std::size_t k = 0; k < ord.size(); ++k) {
            const std::size_t i = pass == 0 ? k : ord.size() - 1 - k;
            const ElementId n = ord[i];
            while (!stack.empty() && ord[stack.back()] > n) stack.pop_back();
            if (!stack.empty()) {
                const std::uint64_t d = (pass == 0 ? i - stack.back() : stack.back() - i) - 1;
                gap[n] = std::min(gap[n], d);
            }
            stack.push_back(static_cast<std::uint32_t>(i));
        }
    }
    std::vector<ElementId> on;
    for (ElementId n = 1; n <= s; ++n) {
        if (gap[n] == kNone || gap[n] >= counters_[n] + 1) {
            on.push_back(n);
            ++counters_[n];
        }
    }
    return on;
}

OracleProvider::OracleProvider(OrderPresentation p, ProviderConfig cfg) : p_(std::move(p)), cfg_(cfg) {
    if (!p_.has_truth()) throw Unsupported("oracle provider needs ground truth");
    if (cfg_.sync_period == 0) throw std::invalid_argument("sync period must be positive");
    if (cfg_.noise_den == 0 || cfg_.noise_num > cfg_.noise_den)
        throw std::invalid_argument("noise rate must lie in [0,1]");
}

bool OracleProvider::on(ElementId n, Stage s) const { return decide(n, s, p_.truth().is_lbe(n)); }

bool OracleProvider::decide(ElementId n, Stage s, bool truth) const {
    if (s % cfg_.sync_period == 0) return truth;
    if (static_cast<std::uint64_t>(s) >= static_cast<std::uint64_t>(n) + cfg_.effective_window()) return truth;
    const bool flip = mix_hash(cfg_.seed, n, s) % cfg_.noise_den < cfg_.noise_num;
    return flip ? !truth : truth;
}

std::vector<ElementId> OracleProvider::on_set(const StageIndex& view) {
    const Stage s = view.stage();
    const GroundTruth truth = p_.truth();
    while (lbe_.size() <= s) lbe_.push_back(lbe_.empty() ? 0 : truth.is_lbe(static_cast<ElementId>(lbe_.size())));
    std::vector<ElementId> out;
    for (ElementId n = 1; n <= s; ++n)
        if (decide(n, s, lbe_[n] != 0)) out.push_back(n);
    return out;
}

std::unique_ptr<OnProvider> make_provider(const OrderPresentation& p, const ProviderConfig& cfg) {
    if (cfg.kind == ProviderConfig::Kind::intrinsic) return std::make_unique<IntrinsicProvider>();
    return std::make_unique<OracleProvider>(p, cfg);
}

}  // namespace blockrel
