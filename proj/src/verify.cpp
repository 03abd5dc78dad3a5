#include "blockrel/verify.hpp"

#include "blockrel/block.hpp"
#include "blockrel/config.hpp"
#include "blockrel/detail/presentation_impl.hpp"
#include "blockrel/order_list.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace blockrel {

namespace {

const char* status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::skip: return "skip";
    }
    return "?";
}

struct Lab {
    NodeId node = 0;
    std::unordered_set<MId> members;
};

struct Tally {
    Stage first = 0;
    std::uint64_t count = 0;
    std::string detail;
};

struct PathSlot {
    NodeId node = 0;
    ElementId ref = 0;
};

bool needs_truth(const std::string& id) {
    return id == "size-agreement" || id == "nonblock-semantic" || id == "stabilization" ||
           id == "stabilized-referent" || id == "jockusch";
}

bool is_measure(const std::string& id) {
    return id == "stabilization" || id == "stabilized-referent" || id == "jockusch";
}

}  // namespace

const std::vector<std::string>& check_ids() {
    static const std::vector<std::string> ids{
        "no-fault",          "order-permanence",          "contiguity",          "laminarity",
        "on-path-disjoint",  "size-agreement",            "pruned-label-never-return",
        "nonblock-structural", "partial-iso",             "nonblock-semantic",   "stabilization",
        "stabilized-referent", "jockusch"};
    return ids;
}

std::set<std::string> parse_check_list(const std::string& text) {
    if (text.empty() || text == "all") return {};
    std::set<std::string> out;
    std::size_t at = 0;
    while (at <= text.size()) {
        const auto comma = std::min(text.find(',', at), text.size());
        const auto id = text.substr(at, comma - at);
        const auto& ids = check_ids();
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw std::invalid_argument("unknown check '" + id + "'");
        out.insert(id);
        at = comma + 1;
    }
    return out;
}

bool RunReport::exact_pass() const {
    return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) {
        return c.cls == CheckClass::exact && c.status == CheckStatus::fail;
    });
}

const CheckResult* RunReport::find(const std::string& id) const {
    for (const auto& c : checks)
        if (c.id == id) return &c;
    return nullptr;
}

void RunReport::write_ndjson(std::ostream& out) const {
    for (const auto& c : checks) {
        Json j{{"check", c.id},
               {"status", status_name(c.status)},
               {"class", c.cls == CheckClass::exact ? "exact" : "measure"},
               {"seed", c.seed},
               {"stage", c.stage},
               {"violations", c.violations},
               {"detail", c.detail}};
        if (c.id == "stabilization" && stabilization) {
            Json l = Json::array(), m = Json::array();
            for (const auto& [a, s] : stabilization->l_last_change) l.push_back({a, s});
            for (const auto& [x, s] : stabilization->m_last_change) m.push_back({x, s});
            j["table"] = Json{{"l", l}, {"m", m}};
        }
        if (c.id == "jockusch") {
            Json counts = Json::array();
            for (const auto& [n, k] : jockusch) counts.push_back({n, k});
            j["counts"] = counts;
            Json snaps = Json::array();
            for (const auto& [s, k] : condensation) snaps.push_back({s, k});
            j["condensation"] = snaps;
        }
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------- trace checker

struct TraceChecker::State {
    std::optional<OrderPresentation> p;
    std::optional<GroundTruth> truth;
    std::unique_ptr<StageIndex> index;
    OnHistory hist;
    std::uint64_t seed = 0;
    VerifyOptions opt;
    bool any_event = false;
    Stage stage = 0;

    OrderList mlist;
    MId m_count = 0;
    std::vector<std::vector<LabelId>> on{{}};
    std::unordered_map<LabelId, Lab> labels;
    std::unordered_set<LabelId> dead;
    std::unordered_map<NodeId, LabelId> node_label;
    std::vector<std::array<PathSlot, 3>> path{{}};
    std::unordered_map<MId, std::vector<MId>> partners;
    std::vector<NonBlockLog::Cut> cuts;
    std::set<LabelId> touched;

    std::map<ElementId, MId> f;
    std::map<MId, ElementId> finv;
    std::map<ElementId, Stage> l_change;
    std::map<MId, Stage> m_change;
    std::map<std::uint32_t, std::uint32_t> jockusch;
    std::vector<std::pair<Stage, std::size_t>> condensation;
    std::map<std::string, Tally> tallies;

    void fail(const std::string& id, const std::string& detail) {
        auto& t = tallies[id];
        if (!t.count) {
            t.first = stage;
            t.detail = detail;
        }
        ++t.count;
    }

    void attach(OrderPresentation q) {
        p = std::move(q);
        truth.emplace(*p);
        index = std::make_unique<StageIndex>(*p);
    }

    bool share_label(MId a, MId b) const {
        for (LabelId l : on[a])
            if (std::find(on[b].begin(), on[b].end(), l) != on[b].end()) return true;
        return false;
    }

    std::pair<MId, MId> span(const Lab& l) const {
        MId lo = 0, hi = 0;
        for (MId x : l.members) {
            if (!lo || mlist.less(x, lo)) lo = x;
            if (!hi || mlist.less(hi, x)) hi = x;
        }
        return {lo, hi};
    }

    bool le(MId a, MId b) const { return a == b || mlist.less(a, b); }

    void on_header(const Json& e) {
        const RunConfig cfg = config_from_json(e.at("config"));
        seed = cfg.seed;
        if (!p) attach(resolve_order(cfg.order, cfg.seed));
    }

    void on_set(const std::vector<ElementId>& ids) {
        hist.record(stage, ids);
        if (!index) return;
        index->advance_to(stage);
        std::vector<char> is_on(opt.jockusch_n + 1, 0);
        for (ElementId e : ids)
            if (e <= opt.jockusch_n) is_on[e] = 1;
        const auto cap = p->impl().capacity;
        for (ElementId n = 1; n <= opt.jockusch_n && (!cap || n <= *cap); ++n) {
            if (static_cast<bool>(is_on[n]) != truth->is_lbe(n)) break;
            ++jockusch[n];
        }
    }

    void m_insert(MId m, MId after) {
        if (m != m_count + 1 || after > m_count) {
            fail("order-permanence", "m-insert " + std::to_string(m) + " after " + std::to_string(after));
            return;
        }
        if (after) {
            const MId nx = mlist.next(after);
            if (nx && share_label(after, nx))
                fail("contiguity", "insertion of " + std::to_string(m) + " inside a labelled block at " +
                                       std::to_string(after));
        }
        const auto h = mlist.insert_after(after);
        if (h != m) fail("order-permanence", "handle mismatch for " + std::to_string(m));
        ++m_count;
        on.emplace_back();
    }

    void label_add(NodeId node, LabelId l, const std::vector<MId>& ms) {
        if (dead.count(l)) fail("pruned-label-never-return", "label " + std::to_string(l) + " reused");
        auto [it, fresh] = labels.try_emplace(l);
        if (fresh) {
            it->second.node = node;
            node_label[node] = l;
        }
        for (MId x : ms) {
            if (x == 0 || x > m_count) {
                fail("order-permanence", "label " + std::to_string(l) + " on unknown element " + std::to_string(x));
                continue;
            }
            if (it->second.members.insert(x).second) on[x].push_back(l);
        }
        touched.insert(l);
    }

    void label_remove(LabelId l, const std::vector<MId>& ms, const std::string& cause) {
        const auto it = labels.find(l);
        if (it == labels.end()) {
            fail("pruned-label-never-return", "removal from unknown label " + std::to_string(l));
            return;
        }
        for (MId x : ms) {
            if (!it->second.members.erase(x)) continue;
            auto& v = on[x];
            v.erase(std::remove(v.begin(), v.end(), l), v.end());
        }
        if (it->second.members.empty()) {
            if (const auto n = node_label.find(it->second.node); n != node_label.end() && n->second == l)
                node_label.erase(n);
            labels.erase(it);
            dead.insert(l);
        } else {
            if (cause == "prune") fail("pruned-label-never-return", "label " + std::to_string(l) + " survives its prune");
            touched.insert(l);
        }
    }

    void prune(NodeId node) {
        if (node_label.count(node)) fail("pruned-label-never-return", "node " + std::to_string(node) + " pruned with a live label");
    }

    void nonblock(MId x, MId y) {
        if (!x || !y || x > m_count || y > m_count || !mlist.less(x, y)) {
            fail("order-permanence", "bad cut " + std::to_string(x) + "," + std::to_string(y));
            return;
        }
        if (share_label(x, y))
            fail("nonblock-structural", "logged pair " + std::to_string(x) + "," + std::to_string(y) + " shares a label");
        partners[x].push_back(y);
        partners[y].push_back(x);
        cuts.push_back({x, y, stage});
    }

    void path_node(ElementId n, std::uint32_t sub, NodeId node, ElementId ref) {
        if (sub < 1 || sub > 3) throw std::runtime_error("path-node sub out of range");
        if (path.size() <= n) path.resize(n + 1);
        path[n][sub - 1] = {node, ref};
    }

    void f_snapshot(const Json& e) {
        const std::uint32_t bound = opt.prefix;
        auto unmap = [&](ElementId a) {
            const auto it = f.find(a);
            if (it == f.end()) return;
            const MId old = it->second;
            if (const auto r = finv.find(old); r != finv.end() && r->second == a) finv.erase(r);
            if (old <= bound) m_change[old] = stage;
            f.erase(it);
        };
        for (const auto& a : e.at("unset")) {
            const auto id = a.get<ElementId>();
            unmap(id);
            if (id <= bound) l_change[id] = stage;
        }
        for (const auto& kv : e.at("set")) {
            const auto a = kv.at(0).get<ElementId>();
            const auto m = kv.at(1).get<MId>();
            unmap(a);
            f[a] = m;
            finv[m] = a;
            if (a <= bound) l_change[a] = stage;
            if (m <= bound) m_change[m] = stage;
        }
    }

    void end_stage() {
        if (!stage) return;
        for (LabelId l : touched) {
            const auto it = labels.find(l);
            if (it == labels.end()) continue;
            const Lab& lab = it->second;
            const auto [lo, hi] = span(lab);
            MId x = lo;
            for (std::size_t k = 0; k < lab.members.size(); ++k, x = mlist.next(x))
                if (!x || !lab.members.count(x)) {
                    fail("contiguity", "label " + std::to_string(l) + " is not an interval");
                    break;
                }
            std::set<LabelId> seen;
            for (MId y : lab.members)
                for (LabelId k : on[y]) {
                    if (k == l || !seen.insert(k).second) continue;
                    const auto [klo, khi] = span(labels.at(k));
                    const bool inside = le(klo, lo) && le(hi, khi);
                    const bool around = le(lo, klo) && le(khi, hi);
                    if (!inside && !around)
                        fail("laminarity", "labels " + std::to_string(l) + " and " + std::to_string(k) + " cross");
                }
            for (MId y : lab.members)
                if (const auto pit = partners.find(y); pit != partners.end())
                    for (MId z : pit->second)
                        if (lab.members.count(z))
                            fail("nonblock-structural", "logged pair " + std::to_string(y) + "," + std::to_string(z) +
                                                            " inside label " + std::to_string(l));
        }
        touched.clear();

        struct OnPath {
            std::uint32_t pos;
            ElementId ref;
            LabelId label;
            MId lo, hi;
        };
        std::vector<OnPath> clusters;
        for (ElementId n = 1; n < path.size() && n <= stage; ++n)
            for (const auto& slot : path[n]) {
                if (!slot.ref) continue;
                const auto it = node_label.find(slot.node);
                if (it == node_label.end()) continue;
                const auto [lo, hi] = span(labels.at(it->second));
                clusters.push_back({index ? index->pos(slot.ref) : 0, slot.ref, it->second, lo, hi});
            }
        if (index) {
            std::sort(clusters.begin(), clusters.end(), [](const OnPath& a, const OnPath& b) { return a.pos < b.pos; });
        } else {
            std::sort(clusters.begin(), clusters.end(),
                      [&](const OnPath& a, const OnPath& b) { return mlist.less(a.lo, b.lo); });
        }
        for (std::size_t k = 1; k < clusters.size(); ++k)
            if (!mlist.less(clusters[k - 1].hi, clusters[k].lo))
                fail("on-path-disjoint", "clusters of " + std::to_string(clusters[k - 1].ref) + " and " +
                                             std::to_string(clusters[k].ref) + " overlap or are out of order");
        if (index)
            for (const auto& c : clusters) {
                const auto want = block_at_stage(*index, hist, c.ref).size();
                const auto have = labels.at(c.label).members.size();
                if (want != have)
                    fail("size-agreement", "cluster of " + std::to_string(c.ref) + " has " + std::to_string(have) +
                                               " elements, block has " + std::to_string(want));
            }

        if (truth && (stage & (stage - 1)) == 0)
            condensation.emplace_back(stage, oracle_block_finite(index->view(), *truth).size());
    }

    RunReport finish() {
        end_stage();
        RunReport r;
        r.seed = seed;
        r.stages = stage;
        if (!any_event) return r;

        std::unordered_map<MId, std::size_t> mpos;
        {
            std::size_t k = 0;
            for (MId x = mlist.first(); x; x = mlist.next(x)) mpos[x] = k++;
        }

        // Final f: injective and order-preserving on its whole domain.
        if (index) {
            std::vector<std::pair<std::uint32_t, MId>> pairs;
            for (const auto& [a, m] : f) pairs.emplace_back(index->pos(a), m);
            std::sort(pairs.begin(), pairs.end());
            for (std::size_t k = 1; k < pairs.size(); ++k)
                if (!mlist.less(pairs[k - 1].second, pairs[k].second)) fail("partial-iso", "final map not order-preserving");
        } else {
            std::set<MId> images;
            for (const auto& [a, m] : f)
                if (!images.insert(m).second) fail("partial-iso", "final map not injective");
        }

        StabilizationTable tab;
        tab.bound = opt.prefix;
        tab.stages = stage;
        const Stage settled = stage - stage / 2;
        for (ElementId a = 1; a <= opt.prefix && a <= stage; ++a) {
            const auto it = l_change.find(a);
            tab.l_last_change[a] = it == l_change.end() ? 0 : it->second;
            if (!f.count(a) || tab.l_last_change[a] > settled) tab.unstable_l.push_back(a);
        }
        for (MId m = 1; m <= opt.prefix && m <= m_count; ++m) {
            const auto it = m_change.find(m);
            tab.m_last_change[m] = it == m_change.end() ? 0 : it->second;
            if (tab.m_last_change[m] > settled) tab.unstable_m.push_back(m);
        }

        std::string referent_detail;
        std::uint64_t referent_bad = 0;
        std::string semantic_detail;
        std::uint64_t semantic_bad = 0;
        if (truth) {
            std::map<MId, ElementId> owner;
            for (ElementId n = 1; n < path.size() && n <= stage; ++n)
                for (const auto& slot : path[n]) {
                    if (!slot.ref) continue;
                    const auto it = node_label.find(slot.node);
                    if (it == node_label.end()) continue;
                    for (MId x : labels.at(it->second).members) owner[x] = slot.ref;
                }
            std::set<MId> prefix;
            for (ElementId a = 1; a <= opt.prefix && a <= stage; ++a) {
                if (std::find(tab.unstable_l.begin(), tab.unstable_l.end(), a) != tab.unstable_l.end()) continue;
                const MId m = f.at(a);
                prefix.insert(m);
                const auto o = owner.find(m);
                if (o == owner.end() || truth->block_key(o->second) != truth->block_key(a)) {
                    if (!referent_bad++)
                        referent_detail = "f(" + std::to_string(a) + ") = " + std::to_string(m) +
                                          (o == owner.end() ? " lies in no on-path cluster"
                                                            : " lies in the cluster of " + std::to_string(o->second) +
                                                                  ", another block");
                }
            }
            for (const auto& [m, s] : tab.m_last_change)
                if (finv.count(m) && std::find(tab.unstable_m.begin(), tab.unstable_m.end(), m) == tab.unstable_m.end())
                    prefix.insert(m);
            std::vector<MId> pre(prefix.begin(), prefix.end());
            std::sort(pre.begin(), pre.end(), [&](MId a, MId b) { return mpos[a] < mpos[b]; });
            for (std::size_t i = 0; i < pre.size(); ++i)
                for (std::size_t j = i + 1; j < pre.size(); ++j) {
                    const auto pu = mpos[pre[i]], pv = mpos[pre[j]];
                    const bool logged = std::any_of(cuts.begin(), cuts.end(), [&](const NonBlockLog::Cut& c) {
                        return pu <= mpos[c.left] && mpos[c.right] <= pv;
                    });
                    if (!logged) continue;
                    const ElementId a = finv.at(pre[i]), b = finv.at(pre[j]);
                    if (truth->block_key(a) == truth->block_key(b) && !semantic_bad++)
                        semantic_detail = "logged pair " + std::to_string(pre[i]) + "," + std::to_string(pre[j]) +
                                          " pulls back to one block (" + std::to_string(a) + "," + std::to_string(b) + ")";
                }
        }

        for (const auto& id : check_ids()) {
            if (!opt.checks.empty() && !opt.checks.count(id)) continue;
            CheckResult c;
            c.id = id;
            c.cls = is_measure(id) ? CheckClass::measure : CheckClass::exact;
            c.seed = seed;
            c.stage = stage;
            if (needs_truth(id) && !truth) {
                c.status = CheckStatus::skip;
                c.detail = "no presentation";
            } else if (id == "stabilization" && truth->condensation() == Condensation::other) {
                c.status = CheckStatus::skip;
                c.detail = "unsupported input: condensation is not eta-like";
            } else if (id == "stabilization") {
                c.status = tab.stable() ? CheckStatus::pass : CheckStatus::fail;
                c.violations = tab.unstable_l.size() + tab.unstable_m.size();
                for (ElementId a : tab.unstable_l) {
                    c.detail += "L" + std::to_string(a) + "@" + std::to_string(tab.l_last_change[a]) + " ";
                    c.stage = std::max(c.stage, tab.l_last_change[a]);
                }
                for (MId m : tab.unstable_m) c.detail += "M" + std::to_string(m) + "@" + std::to_string(tab.m_last_change[m]) + " ";
                if (!c.detail.empty()) c.detail.pop_back();
            } else if (id == "stabilized-referent") {
                c.status = referent_bad ? CheckStatus::fail : CheckStatus::pass;
                c.violations = referent_bad;
                c.detail = referent_detail;
            } else if (id == "nonblock-semantic") {
                c.status = semantic_bad ? CheckStatus::fail : CheckStatus::pass;
                c.violations = semantic_bad;
                c.detail = semantic_detail;
            } else if (id == "jockusch") {
                for (ElementId n = 1; n <= opt.jockusch_n; ++n) jockusch.try_emplace(n, 0);
            } else if (const auto t = tallies.find(id); t != tallies.end()) {
                c.status = CheckStatus::fail;
                c.stage = t->second.first;
                c.violations = t->second.count;
                c.detail = t->second.detail;
            }
            r.checks.push_back(std::move(c));
        }
        r.stabilization = std::move(tab);
        r.jockusch = jockusch;
        r.condensation = condensation;
        return r;
    }
};

TraceChecker::TraceChecker(std::optional<OrderPresentation> p, std::uint64_t seed, VerifyOptions opt)
    : st_(std::make_unique<State>()) {
    st_->seed = seed;
    st_->opt = std::move(opt);
    if (p) st_->attach(std::move(*p));
}

TraceChecker::~TraceChecker() = default;

void TraceChecker::emit(const Json& e) {
    State& s = *st_;
    s.any_event = true;
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "header") {
        s.on_header(e);
        return;
    }
    const Stage stage = e.at("stage").get<Stage>();
    if (kind == "stage-begin") {
        s.end_stage();
        if (stage != s.stage + 1) throw std::runtime_error("stage " + std::to_string(stage) + " out of sequence");
        s.stage = stage;
        return;
    }
    if (stage != s.stage) throw std::runtime_error(kind + " record outside its stage");
    if (kind == "on-set") s.on_set(e.at("on").get<std::vector<ElementId>>());
    else if (kind == "m-insert") s.m_insert(e.at("m").get<MId>(), e.at("after").get<MId>());
    else if (kind == "label-add") s.label_add(e.at("node").get<NodeId>(), e.at("label").get<LabelId>(), e.at("m").get<std::vector<MId>>());
    else if (kind == "label-remove") s.label_remove(e.at("label").get<LabelId>(), e.at("m").get<std::vector<MId>>(), e.at("cause").get<std::string>());
    else if (kind == "prune") s.prune(e.at("node").get<NodeId>());
    else if (kind == "nonblock-pair") s.nonblock(e.at("left").get<MId>(), e.at("right").get<MId>());
    else if (kind == "path-node") s.path_node(e.at("n").get<ElementId>(), e.at("sub").get<std::uint32_t>(), e.at("node").get<NodeId>(), e.at("ref").get<ElementId>());
    else if (kind == "f-snapshot") s.f_snapshot(e);
    else if (kind == "fault") s.fail("no-fault", e.at("message").get<std::string>());
    else throw std::runtime_error("unknown record kind '" + kind + "'");
}

RunReport TraceChecker::finish() { return st_->finish(); }

RunReport verify_trace_file(const std::string& path, const VerifyOptions& opt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
    TraceChecker checker(std::nullopt, 0, opt);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            checker.emit(Json::parse(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return checker.finish();
}

// ---------------------------------------------------------------- oracles

std::vector<std::vector<ElementId>> oracle_block_finite(const StageView& view, const GroundTruth& truth) {
    std::vector<std::vector<ElementId>> out;
    std::optional<Dyadic> last;
    for (ElementId e : view.ordered) {
        const Dyadic k = truth.block_key(e);
        if (!last || k != *last) out.emplace_back();
        out.back().push_back(e);
        last = k;
    }
    return out;
}

bool check_partial_iso(const PartialIso& f, const StageIndex& view, const MState& m) {
    std::vector<std::pair<std::uint32_t, MId>> pairs;
    for (ElementId a = 1; a < f.map.size() && a <= view.stage(); ++a)
        if (f.map[a]) pairs.emplace_back(view.pos(a), f.map[a]);
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t k = 1; k < pairs.size(); ++k)
        if (!m.less(pairs[k - 1].second, pairs[k].second)) return false;
    return true;
}

std::map<std::uint32_t, std::uint32_t> check_jockusch(OnProvider& provider, const OrderPresentation& p,
                                                     std::uint32_t n_max, Stage s_max) {
    StageIndex index(p);
    const GroundTruth truth(p);
    std::map<std::uint32_t, std::uint32_t> counts;
    for (std::uint32_t n = 1; n <= n_max; ++n) counts[n] = 0;
    for (Stage s = 1; s <= s_max; ++s) {
        index.advance();
        std::vector<char> is_on(n_max + 1, 0);
        for (ElementId e : provider.on_set(index))
            if (e <= n_max) is_on[e] = 1;
        for (ElementId n = 1; n <= n_max; ++n) {
            if (static_cast<bool>(is_on[n]) != truth.is_lbe(n)) break;
            ++counts[n];
        }
    }
    return counts;
}

}  // namespace blockrel
