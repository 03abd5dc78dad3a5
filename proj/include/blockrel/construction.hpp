#pragma once

// The copy M of L, built stage by stage along the on-path of a dynamic
// three-sublevel guessing tree.

#include "blockrel/block.hpp"
#include "blockrel/on_provider.hpp"
#include "blockrel/order_list.hpp"
#include "blockrel/stage_index.hpp"
#include "blockrel/trace.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

namespace blockrel {

using MId = std::uint32_t;     // M-element; also its OrderList handle
using NodeId = std::uint32_t;  // 0 is the root
using LabelId = std::uint32_t; // 0 means none

struct Label {
    NodeId node = 0;
    std::vector<MId> cluster;          // M order
    std::vector<ElementId> lblock;     // L order; lblock[k] corresponds to cluster[k]
    bool alive = false;
};

/// Append-only non-block relation, stored as the adjacent pairs (x, y) of M that
/// were found unlabeled-together; (u, v) is logged iff some cut lies in [u, v].
class NonBlockLog {
public:
    struct Cut {
        MId left = 0;
        MId right = 0;
        Stage stage = 0;
    };

    const std::vector<Cut>& cuts() const { return cuts_; }
    bool has_cut(MId x, MId y) const { return index_.count(key(x, y)) != 0; }
    void add(MId x, MId y, Stage s) {
        index_.emplace(key(x, y), cuts_.size());
        cuts_.push_back({x, y, s});
    }

private:
    static std::uint64_t key(MId x, MId y) { return (std::uint64_t{x} << 32) | y; }
    std::vector<Cut> cuts_;
    std::map<std::uint64_t, std::size_t> index_;
};

template <class T>
std::vector<std::unique_ptr<T>> one_null() {
    std::vector<std::unique_ptr<T>> v;
    v.emplace_back();
    return v;
}

class MState {
public:
    MId size() const { return static_cast<MId>(created_.size() - 1); }
    bool exists(MId m) const { return m >= 1 && m < created_.size(); }
    bool less(MId a, MId b) const { return order_.less(a, b); }
    MId first() const { return order_.first(); }
    MId next(MId m) const { return order_.next(m); }  // 0 past the end
    MId prev(MId m) const { return order_.prev(m); }  // 0 before the front
    Stage created(MId m) const { return created_[m]; }
    std::vector<MId> ordered() const;

    const std::vector<LabelId>& labels_on(MId m) const { return on_[m]; }
    const Label& label(LabelId l) const { return *labels_[l]; }
    bool label_alive(LabelId l) const { return l < labels_.size() && labels_[l]; }
    LabelId label_count() const { return static_cast<LabelId>(labels_.size() - 1); }
    bool share_label(MId a, MId b) const;
    /// Largest live label carried by m (labels on one element are nested), or 0.
    LabelId largest_label(MId m) const;

    const NonBlockLog& nonblock() const { return log_; }
    /// Is (u, v) in the non-block relation (either order)?
    bool logged(MId u, MId v) const;
    /// First stage at which (u, v) was logged.
    std::optional<Stage> logged_at(MId u, MId v) const;
    /// Indices into nonblock().cuts() of the cuts whose left element is m.
    const std::vector<std::size_t>& cuts_from(MId m) const;

private:
    friend class Engine;

    MId insert_after(MId after, Stage s);  // after == 0 inserts at the front
    LabelId new_label(NodeId node);
    Label& label_mut(LabelId l) { return *labels_[l]; }
    void attach(LabelId l, MId m);
    void detach(LabelId l, MId m);
    void kill(LabelId l);
    void record_cut(MId x, MId y, Stage s);

    OrderList order_;
    std::vector<Stage> created_{0};
    std::vector<std::vector<LabelId>> on_{{}};
    std::vector<std::unique_ptr<Label>> labels_ = one_null<Label>();
    NonBlockLog log_;
    std::vector<MId> dirty_;  // elements inserted or unlabeled since the last scan
    std::map<MId, std::vector<std::size_t>> by_left_;  // cut indices by left element
};

/// f^s: L-element -> M-element, 0 where undefined.
struct PartialIso {
    Stage stage = 0;
    std::vector<MId> map{0};

    MId at(ElementId a) const { return a < map.size() ? map[a] : 0; }
    std::size_t defined() const;
};

using NodeKey = std::array<std::uint32_t, 3>;

inline constexpr std::uint32_t kKeyMax = 0xffffffffu;

struct TreeNode {
    NodeId parent = 0;
    ElementId level = 0;  // n
    std::uint8_t sub = 0; // 1, 2, 3
    NodeKey key{};
    Stage created = 0;
    ElementId referent = 0;
    LabelId label = 0;
    bool alive = false;
    Stage path_stage = 0;
    OrderList::Handle enter = 0;
    OrderList::Handle exit = 0;
    std::map<NodeKey, NodeId> children;

    // sublevel-two bookkeeping
    std::uint32_t fallow_size = 0;
    Stage list_start = 0;
    std::vector<ElementId> preimage;  // cached selection, L order
    std::optional<std::pair<MId, MId>> seen_fallow;
    std::vector<ElementId> seen_preimage;
};

struct EngineOptions {
    bool emit_fsnapshot = true;
};

/// Stage-by-stage construction driver. Events go to the sink (if any).
class Engine {
public:
    Engine(OrderPresentation p, std::unique_ptr<OnProvider> provider, TraceSink* sink = nullptr,
           EngineOptions opts = {});

    /// Run stage stage()+1; throws ConstructionFault on an invariant breach.
    void run_stage();
    void run_to(Stage s) {
        while (stage_ < s) run_stage();
    }

    Stage stage() const { return stage_; }
    const MState& m() const { return m_; }
    const PartialIso& f() const { return f_; }
    const StageIndex& index() const { return index_; }
    const OnHistory& history() const { return hist_; }
    const TreeNode& node(NodeId id) const { return nodes_[id]; }
    bool node_alive(NodeId id) const { return nodes_.alive(id); }
    std::size_t node_count() const { return nodes_.size(); }
    /// On-path node ids of the last stage, root excluded (3 per level).
    const std::vector<NodeId>& path() const { return path_; }

private:
    // tree
    NodeId child(NodeId parent, ElementId n, std::uint8_t sub, const NodeKey& key);
    void prune_right(NodeId node);
    void delete_nodes(std::vector<NodeId> ids);
    void collect_subtree(NodeId root, std::vector<NodeId>& out) const;
    bool descends(NodeId a, NodeId ancestor) const;
    void visit(NodeId id);

    // labels
    void remove_label_elements(LabelId l, const std::vector<MId>& ms, const char* cause);
    void drop_label(NodeId id, const char* cause);
    bool carries_path_label(MId m) const;

    // steps
    void sublevel_one(ElementId n);
    void sync_image(NodeId sigma, ElementId n);
    void sublevels_two_three(ElementId n);
    void absorb(NodeId iota, MId nm, const BlockRange& b, std::uint32_t plo, std::uint32_t phi, MId f_lo,
                MId f_hi);
    void finalize();
    void add_path_cluster(LabelId l);
    void emit_path_node(ElementId n, std::uint8_t sub, NodeId id);

    // helpers
    bool is_on(ElementId e) const { return e < on_now_.size() && on_now_[e]; }
    bool referenced(ElementId e) const { return e < ref_stamp_.size() && ref_stamp_[e] == stage_; }
    BlockRange block(ElementId n) const { return block_at_stage(index_, hist_, n); }
    MId fresh_after(MId after);
    [[noreturn]] void fault(const std::string& what);
    [[noreturn]] void split_fault(ElementId n, MId x, MId y);
    void emit(const Json& ev);

    OrderPresentation p_;
    std::unique_ptr<OnProvider> provider_;
    TraceSink* sink_;
    EngineOptions opts_;
    StageIndex index_;
    OnHistory hist_;
    MState m_;
    PartialIso f_;
    Stage stage_ = 0;
    NodeId tip_ = 0;

    /// Live nodes by id; dead ids hold null.
    struct NodeStore {
        std::vector<std::unique_ptr<TreeNode>> v;
        TreeNode& operator[](NodeId id) { return *v[id]; }
        const TreeNode& operator[](NodeId id) const { return *v[id]; }
        std::size_t size() const { return v.size(); }
        void push_back(TreeNode node) { v.push_back(std::make_unique<TreeNode>(std::move(node))); }
        bool alive(NodeId id) const { return id < v.size() && v[id]; }
        void release(NodeId id) { v[id].reset(); }
    };
    NodeStore nodes_;
    OrderList euler_;
    std::vector<NodeId> path_;
    std::vector<char> on_now_;
    std::vector<Stage> ref_stamp_;
    std::vector<std::array<std::array<std::uint32_t, 3>, 3>> last_path_;  // [n][sub-1] = node, ref, label
    std::vector<LabelId> path_labels_;  // on-path labels in path order

    struct Probe {
        MId m;
    };
    struct ClusterLess {
        using is_transparent = void;
        const MState* m;
        MId front(LabelId l) const { return m->label(l).cluster.front(); }
        bool operator()(LabelId a, LabelId b) const { return m->less(front(a), front(b)); }
        bool operator()(Probe a, LabelId b) const { return m->less(a.m, front(b)); }
        bool operator()(LabelId a, Probe b) const { return m->less(front(a), b.m); }
    };
    std::set<LabelId, ClusterLess> path_clusters_{ClusterLess{&m_}};
};

}  // namespace blockrel
