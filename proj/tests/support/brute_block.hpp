#pragma once

// Straight-line evaluation of the block rules over an explicit on-history.

#include "blockrel/order.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace testsupport {

using blockrel::ElementId;
using blockrel::Stage;

/// on[s] = set of elements on at stage s (index 0 unused).
using OnSets = std::vector<std::set<ElementId>>;

inline std::vector<ElementId> brute_block(const blockrel::OrderPresentation& p, const OnSets& on,
                                          ElementId n, Stage s) {
    const auto ls = blockrel::enumerate_to(p, s).ordered;
    Stage last_on = 1;
    for (Stage t = 1; t < s; ++t)
        if (on[t].count(n)) last_on = t;
    auto ok = [&](ElementId m) {
        if (m == n) return true;
        if (m < n || m >= last_on) return false;
        for (Stage t = last_on; t <= s; ++t)
            if (on[t].count(m)) return false;
        return true;
    };
    const auto it = std::find(ls.begin(), ls.end(), n);
    auto lo = it, hi = it;
    while (lo != ls.begin() && ok(*(lo - 1))) --lo;
    while (hi + 1 != ls.end() && ok(*(hi + 1))) ++hi;
    return {lo, hi + 1};
}

inline OnSets load_on_sets(const std::string& path) {
    std::ifstream in(path);
    OnSets out(1);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        std::istringstream ids(line.substr(colon + 1));
        std::set<ElementId> set;
        for (ElementId e; ids >> e;) set.insert(e);
        out.push_back(std::move(set));
    }
    return out;
}

/// Random scripted order text with `size` inserts.
inline std::string random_order_text(std::mt19937_64& rng, std::size_t size) {
    std::vector<ElementId> order;
    std::ostringstream out;
    for (ElementId e = 1; e <= size; ++e) {
        const auto at = std::uniform_int_distribution<std::size_t>(0, order.size())(rng);
        out << "insert " << e << ' ' << (at ? std::to_string(order[at - 1]) : "MIN") << ' '
            << (at < order.size() ? std::to_string(order[at]) : "MAX") << '\n';
        order.insert(order.begin() + static_cast<std::ptrdiff_t>(at), e);
    }
    return out.str();
}

inline OnSets random_on_sets(std::mt19937_64& rng, Stage stages, double rate) {
    OnSets on(1);
    std::bernoulli_distribution coin(rate);
    for (Stage s = 1; s <= stages; ++s) {
        std::set<ElementId> set;
        for (ElementId n = 1; n <= s; ++n)
            if (coin(rng)) set.insert(n);
        on.push_back(std::move(set));
    }
    return on;
}

}  // namespace testsupport
