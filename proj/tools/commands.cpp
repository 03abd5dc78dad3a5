#include "commands.hpp"

#include "blockrel/construction.hpp"
#include "blockrel/errors.hpp"
#include "blockrel/surgery.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <unordered_map>

namespace blockrel::cli {

namespace {

void write_snapshot(const std::string& path, const Engine& eng, const ConstructionFault& e) {
    Json path_nodes = Json::array();
    for (NodeId id : eng.path()) {
        const auto& n = eng.node(id);
        path_nodes.push_back({{"node", id}, {"ref", n.referent}, {"label", n.label}});
    }
    Json f = Json::array();
    for (ElementId a = 1; a < eng.f().map.size(); ++a)
        if (eng.f().map[a]) f.push_back({a, eng.f().map[a]});
    const Json snap{{"stage", e.stage()}, {"message", e.what()},           {"m_order", eng.m().ordered()},
                    {"f", f},            {"path", path_nodes},             {"cuts", eng.m().nonblock().cuts().size()}};
    std::ofstream out(path);
    out << snap.dump(1) << '\n';
}

}  // namespace

std::string default_out_dir() {
    const char* env = std::getenv(kOutDirEnv);
    return env && *env ? env : ".";
}

int cmd_run(const RunConfig& cfg, std::ostream& log) {
    OrderPresentation p;
    try {
        p = resolve_order(cfg.order, cfg.seed);
    } catch (const UsageError& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    }
    std::optional<NdjsonWriter> opened;
    try {
        opened.emplace(cfg.trace);
    } catch (const std::runtime_error& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    }
    NdjsonWriter& trace = *opened;
    trace.emit(header_event(cfg));
    Engine eng(p, make_provider(p, cfg.provider), &trace);
    try {
        eng.run_to(cfg.stages);
    } catch (const ConstructionFault& e) {
        trace.flush();
        const std::string snap = cfg.trace + ".fault.json";
        write_snapshot(snap, eng, e);
        log << "construction fault: " << e.what() << "\nsnapshot: " << snap << '\n';
        return kFault;
    } catch (const std::out_of_range& e) {
        trace.flush();
        log << "error: the order ran out of elements (" << e.what() << ")\n";
        return kUsage;
    }
    trace.flush();
    if (!cfg.metrics.empty()) {
        std::size_t labels = 0;
        for (LabelId l = 1; l <= eng.m().label_count(); ++l) labels += eng.m().label_alive(l);
        const Json metrics{{"config_hash", config_hash(cfg)},
                           {"stages", eng.stage()},
                           {"m_size", eng.m().size()},
                           {"f_defined", eng.f().defined()},
                           {"cuts", eng.m().nonblock().cuts().size()},
                           {"live_labels", labels},
                           {"on_last", eng.history().current().size()}};
        std::ofstream out(cfg.metrics);
        out << metrics.dump(1) << '\n';
    }
    log << "ran " << eng.stage() << " stages, |M| = " << eng.m().size() << ", trace " << cfg.trace << '\n';
    return kOk;
}

int cmd_verify(const std::string& trace_path, const VerifyOptions& opt, const std::string& report_path,
               std::ostream& log) {
    RunReport report;
    try {
        report = verify_trace_file(trace_path, opt);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    }
    if (report_path.empty()) {
        report.write_ndjson(std::cout);
    } else {
        std::ofstream out(report_path);
        report.write_ndjson(out);
    }
    for (const auto& c : report.checks)
        if (c.status == CheckStatus::fail)
            log << (c.cls == CheckClass::exact ? "FAIL " : "note ") << c.id << " (seed " << c.seed << ", stage "
                << c.stage << "): " << c.detail << '\n';
    return report.exact_pass() ? kOk : kCheckFailed;
}

int cmd_embed(const RunConfig& cfg, std::uint32_t k, const std::string& out_path, std::ostream& log) {
    try {
        const OrderPresentation p = resolve_order(cfg.order, cfg.seed);
        const Classification c = classify_case(p);
        EmbeddingPrefix e;
        std::string kind = to_string(c.kind);
        std::function<bool(std::uint32_t, std::uint32_t)> less = [&](std::uint32_t a, std::uint32_t b) {
            return p.key(a) < p.key(b);
        };
        std::unordered_map<MId, std::size_t> pos;
        if (c.kind == CaseKind::adjacent_blocks) {
            kind += ":" + to_string(c.interval);
            e = embed_adjacent_blocks(p, c, k);
        } else if (c.kind == CaseKind::strongly_eta_like_interval) {
            const auto domain = eta_like_domain(p, c, cfg.stages);
            e = embed_via_nonblock(
                domain, [&](std::uint32_t x) { return eta_like_partners(p, c, x, cfg.stages); }, less, k, cfg.stages);
        } else {
            const auto out = embed_general(p, cfg.provider, cfg.stages, k);
            e = out.embedding;
            for (std::size_t i = 0; i < out.copy.order.size(); ++i) pos[out.copy.order[i]] = i;
            less = [&](std::uint32_t a, std::uint32_t b) { return pos.at(a) < pos.at(b); };
        }
        std::ofstream file(out_path);
        write_embedding(file, e, kind);
        log << kind << ": " << e.map.size() << " of " << k << " assigned, complete=" << e.complete
            << ", injective=" << e.injective() << ", order-preserving=" << e.order_preserving(less)
            << ", non-trivial=" << e.nontrivial() << " -> " << out_path << '\n';
        return kOk;
    } catch (const UsageError& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Unsupported& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConstructionFault& e) {
        log << "construction fault: " << e.what() << '\n';
        return kFault;
    }
}

}  // namespace blockrel::cli
