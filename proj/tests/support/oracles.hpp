#pragma once

// Independent oracles for property tests: deliberately naive
// re-implementations that never share code with the library paths they
// check.

#include "kvet/kconfig.hpp"
#include "kvet/release_index.hpp"

#include "support/generators.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace kvet::testing {

// ---------------------------------------------------------------------------
// Graph oracles
// ---------------------------------------------------------------------------

// Recursive DFS closure over the raw edge list; virtual vertices are
// walked through but never reported, seeds never reported.
inline std::set<std::string> oracle_reachable(const KconfigGraph& graph,
                                              const std::set<std::string>& seeds) {
    std::map<VertexId, std::vector<VertexId>> adj;
    for (const auto& e : graph.edges())
        adj[e.from].push_back(e.to);

    std::set<VertexId> visited;
    std::vector<VertexId> stack;
    for (const auto& name : seeds)
        if (auto id = graph.find_symbol(name))
            if (visited.insert(*id).second)
                stack.push_back(*id);

    std::set<std::string> out;
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (VertexId next : adj[v]) {
            if (!visited.insert(next).second)
                continue;
            stack.push_back(next);
            const auto& vx = graph.vertices()[next];
            if (vx.kind != VertexKind::MenuVirtual && !seeds.count(vx.name))
                out.insert(vx.name);
        }
    }
    return out;
}

// Exhaustive forward path search from every real vertex: a path
// u -> (virtual)* -> t qualifies when its final edge kind matches.
inline std::set<std::string> oracle_inbound_one_hop(const KconfigGraph& graph,
                                                    const std::set<std::string>& targets,
                                                    EdgeKind kind) {
    auto kind_ok = [kind](EdgeKind k) {
        if (kind == EdgeKind::Select)
            return k == EdgeKind::Select;
        return k == EdgeKind::Depend || k == EdgeKind::OpaqueDepend;
    };
    std::set<VertexId> target_ids;
    for (const auto& name : targets)
        if (auto id = graph.find_symbol(name))
            target_ids.insert(*id);

    std::set<std::string> out;
    for (VertexId u = 0; u < graph.vertex_count(); ++u) {
        const auto& ux = graph.vertices()[u];
        if (ux.kind == VertexKind::MenuVirtual || targets.count(ux.name))
            continue;
        // walk forward from u through virtual vertices only
        std::set<VertexId> seen{u};
        std::vector<VertexId> frontier{u};
        bool hit = false;
        while (!frontier.empty() && !hit) {
            VertexId v = frontier.back();
            frontier.pop_back();
            for (auto [next, k] : graph.out(v)) {
                if (target_ids.count(next) && kind_ok(k)) {
                    hit = true;
                    break;
                }
                if (graph.is_virtual(next) && seen.insert(next).second)
                    frontier.push_back(next);
            }
        }
        if (hit)
            out.insert(ux.name);
    }
    return out;
}

// Random mixed-kind graph with planted virtual chains, as a KconfigGraph
// built through the public mutation API.
inline KconfigGraph random_graph(Rng& rng) {
    KconfigGraph g;
    int reals = rng.range(4, 38);
    int virtuals = rng.range(1, 10);
    std::vector<VertexId> real_ids, virtual_ids;
    for (int i = 0; i < reals; ++i)
        real_ids.push_back(g.add_config("C" + std::to_string(i), VertexKind::Config, "Kconfig"));
    for (int i = 0; i < virtuals; ++i)
        virtual_ids.push_back(g.add_menu("menu " + std::to_string(i), "Kconfig"));

    auto any_vertex = [&]() -> VertexId {
        int total = reals + virtuals;
        int pick = rng.range(0, total - 1);
        return pick < reals ? real_ids[pick] : virtual_ids[pick - reals];
    };
    auto random_kind = [&]() {
        switch (rng.range(0, 3)) {
        case 0: return EdgeKind::Depend;
        case 1: return EdgeKind::OpaqueDepend;
        case 2: return EdgeKind::Select;
        default: return EdgeKind::Imply;
        }
    };

    int edges = rng.range(reals, reals * 3);
    for (int i = 0; i < edges; ++i)
        g.add_edge(any_vertex(), any_vertex(), random_kind());

    // planted virtual chains: real -> virtual -> (virtual ->) real
    int chains = rng.range(1, 4);
    for (int i = 0; i < chains; ++i) {
        VertexId from = real_ids[rng.range(0, reals - 1)];
        VertexId to = real_ids[rng.range(0, reals - 1)];
        VertexId mid = virtual_ids[rng.range(0, virtuals - 1)];
        g.add_edge(from, mid, EdgeKind::OpaqueDepend);
        if (rng.chance(0.4) && virtuals > 1) {
            VertexId mid2 = virtual_ids[rng.range(0, virtuals - 1)];
            g.add_edge(mid, mid2, EdgeKind::OpaqueDepend);
            g.add_edge(mid2, to, random_kind());
        } else {
            g.add_edge(mid, to, random_kind());
        }
    }
    return g;
}

inline std::set<std::string> random_symbol_set(Rng& rng, const KconfigGraph& g, int max_size) {
    std::set<std::string> out;
    std::vector<std::string> reals;
    for (const auto& v : g.vertices())
        if (v.kind != VertexKind::MenuVirtual)
            reals.push_back(v.name);
    int n = rng.range(1, std::min<int>(max_size, static_cast<int>(reals.size())));
    for (int i = 0; i < n; ++i)
        out.insert(reals[rng.range(0, static_cast<int>(reals.size()) - 1)]);
    return out;
}

// ---------------------------------------------------------------------------
// Release range oracle
// ---------------------------------------------------------------------------

// Brute-force membership filter written against the raw component lists.
inline std::vector<KernelVersion> oracle_range_filter(const ReleaseIndex& index,
                                                      const VersionRange& range) {
    auto cmp = [](const KernelVersion& a, const KernelVersion& b) {
        for (size_t i = 0; i < 4; ++i) {
            int x = i < a.components.size() ? a.components[i] : 0;
            int y = i < b.components.size() ? b.components[i] : 0;
            if (x != y)
                return x < y ? -1 : 1;
        }
        return 0;
    };
    std::vector<KernelVersion> out;
    for (const auto& v : index.versions()) {
        bool ok = true;
        if (range.lower) {
            int c = cmp(v, *range.lower);
            if (c < 0 || (c == 0 && !range.lower_inclusive))
                ok = false;
        }
        if (range.upper) {
            int c = cmp(v, *range.upper);
            if (c > 0 || (c == 0 && !range.upper_inclusive))
                ok = false;
        }
        if (ok)
            out.push_back(v);
    }
    return out;
}

} // namespace kvet::testing
