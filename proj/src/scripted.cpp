#include "blockrel/detail/presentation_impl.hpp"
#include "blockrel/errors.hpp"
#include "blockrel/order.hpp"

#include <fstream>
#include <list>
#include <sstream>

namespace blockrel {

namespace {

constexpr ElementId kMin = 0;
constexpr ElementId kMax = static_cast<ElementId>(-1);

ElementId parse_anchor(const std::string& tok, std::size_t line) {
    if (tok == "MIN") return kMin;
    if (tok == "MAX") return kMax;
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(tok, &used);
        if (used == tok.size() && v > 0) return static_cast<ElementId>(v);
    } catch (const std::exception&) {
    }
    throw ValidationError("line " + std::to_string(line) + ": bad anchor '" + tok + "'");
}

}  // namespace

OrderPresentation load_scripted(std::istream& in) {
    std::list<ElementId> order;
    std::vector<std::list<ElementId>::iterator> where(1);  // index by id
    std::map<std::string, std::vector<ElementId>> labels;
    std::vector<std::string> label_of(1);
    std::vector<ElementId> lbes;

    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::istringstream ls(raw);
        std::string cmd;
        if (!(ls >> cmd) || cmd[0] == '#') continue;
        auto err = [&](const std::string& what) {
            return ValidationError("line " + std::to_string(line) + ": " + what);
        };
        if (cmd == "insert") {
            std::string id_tok, l_tok, r_tok;
            if (!(ls >> id_tok >> l_tok >> r_tok)) throw err("insert needs <id> <left> <right>");
            const ElementId id = parse_anchor(id_tok, line);
            if (id != where.size()) throw err("ids must appear in order 1,2,3,...");
            const ElementId l = parse_anchor(l_tok, line);
            const ElementId r = parse_anchor(r_tok, line);
            if (l == kMax || r == kMin) throw err("MIN/MAX on the wrong side");
            if ((l != kMin && l >= id) || (r != kMax && r >= id)) throw err("anchor not yet inserted");
            auto pos = r == kMax ? order.end() : where[r];
            const bool left_ok = l == kMin ? pos == order.begin()
                                           : (pos != order.begin() && *std::prev(pos) == l);
            if (!left_ok) throw err("anchors are not adjacent");
            where.push_back(order.insert(pos, id));
            label_of.emplace_back();
        } else if (cmd == "truth-block") {
            std::string id_tok, label;
            if (!(ls >> id_tok >> label)) throw err("truth-block needs <id> <label>");
            const ElementId id = parse_anchor(id_tok, line);
            if (id >= label_of.size()) throw err("truth-block for unknown id");
            if (!label_of[id].empty()) throw err("duplicate truth-block");
            label_of[id] = label;
            labels[label].push_back(id);
        } else if (cmd == "truth-lbe") {
            std::string id_tok;
            if (!(ls >> id_tok)) throw err("truth-lbe needs <id>");
            lbes.push_back(parse_anchor(id_tok, line));
        } else {
            throw err("unknown command '" + cmd + "'");
        }
    }
    if (order.empty()) throw ValidationError("scripted order is empty");

    auto impl = std::make_shared<detail::PresentationImpl>();
    impl->scripted = true;
    impl->truth = !labels.empty();
    impl->capacity = static_cast<Stage>(order.size());
    impl->elements.resize(order.size());

    std::int64_t rank = 0;
    for (ElementId e : order) impl->elements[e - 1].key = PositionKey{Dyadic(0, 0), rank++};

    if (impl->truth) {
        std::int64_t ordinal = 0;
        for (const auto& [label, members] : labels) {
            detail::CanonicalBlock c;
            c.key = Dyadic(ordinal++, 0);
            c.first = members.front();
            detail::BlockRec b;
            b.key = c.key;
            b.final_cap = members.size();
            b.count = members.size();
            b.completed_at = members.back();
            b.canonical = static_cast<std::uint32_t>(impl->canonicals.size());
            c.blocks.push_back(static_cast<std::uint32_t>(impl->blocks.size()));
            for (ElementId e : members) impl->elements[e - 1].block = b.canonical;
            impl->canonical_by_key[c.key] = b.canonical;
            impl->canonicals.push_back(c);
            impl->blocks.push_back(b);
        }
        for (ElementId e = 1; e < label_of.size(); ++e)
            if (label_of[e].empty())
                throw ValidationError("truth records must label every element; missing " + std::to_string(e));
        for (ElementId e : lbes) {
            if (e >= label_of.size() || impl->canonicals[impl->elements[e - 1].block].first != e)
                throw ValidationError("truth-lbe " + std::to_string(e) + " is not the least id of its block");
        }
    } else if (!lbes.empty()) {
        throw ValidationError("truth-lbe without truth-block records");
    }
    return OrderPresentation(std::move(impl));
}

OrderPresentation load_scripted_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scripted order '" + path + "'");
    return load_scripted(in);
}

}  // namespace blockrel
