#pragma once

#include "kvet/source_tree.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace kvet {

enum class VertexKind { Config, Menuconfig, InnerConfig, MenuVirtual };
enum class EdgeKind { Depend, OpaqueDepend, Select, Imply };

const char* to_string(VertexKind k);
const char* to_string(EdgeKind k);

using VertexId = uint32_t;

struct KconfigVertex {
    std::string name; // symbol (no CONFIG_ prefix) or menu title
    VertexKind kind = VertexKind::Config;
    std::string defining_file;
    bool placeholder = false; // referenced but never defined
};

struct KconfigEdge {
    VertexId from;
    VertexId to;
    EdgeKind kind;

    bool operator==(const KconfigEdge&) const = default;
};

/// Typed directed graph over Kconfig symbols and menu vertices. Real
/// config names are unique (duplicate definitions merge); every `menu`
/// block is its own virtual vertex. Immutable once built; queries are
/// safe to run concurrently.
class KconfigGraph {
public:
    // real config symbol; merges with an existing vertex of the same name
    VertexId add_config(const std::string& name, VertexKind kind, const std::string& file);
    // fresh virtual vertex for a menu block (titles may repeat)
    VertexId add_menu(const std::string& title, const std::string& file);
    // resolves a referenced symbol, creating a flagged placeholder if needed
    VertexId ensure_symbol(const std::string& name);

    // deduplicates; drops self-loops with a warning
    void add_edge(VertexId from, VertexId to, EdgeKind kind);

    const std::vector<KconfigVertex>& vertices() const { return vertices_; }
    const std::vector<KconfigEdge>& edges() const { return edges_; }
    size_t vertex_count() const { return vertices_.size(); }
    size_t edge_count() const { return edges_.size(); }

    const std::vector<std::pair<VertexId, EdgeKind>>& out(VertexId v) const { return out_[v]; }
    const std::vector<std::pair<VertexId, EdgeKind>>& in(VertexId v) const { return in_[v]; }

    std::optional<VertexId> find_symbol(const std::string& name) const;
    bool is_virtual(VertexId v) const { return vertices_[v].kind == VertexKind::MenuVirtual; }

    std::vector<std::string> warnings;

private:
    std::vector<KconfigVertex> vertices_;
    std::vector<KconfigEdge> edges_;
    std::vector<std::vector<std::pair<VertexId, EdgeKind>>> out_;
    std::vector<std::vector<std::pair<VertexId, EdgeKind>>> in_;
    std::map<std::string, VertexId> symbol_index_; // real configs only
    std::set<std::tuple<VertexId, VertexId, EdgeKind>> edge_keys_;
};

// All symbols referenced by a Kconfig expression, in order of first
// appearance. &&/||/!/comparisons are flattened away; y/m/n literals,
// numbers and quoted strings are not symbols.
std::vector<std::string> expr_symbols(std::string_view expr);

/// Recursively parses the Kconfig language from the root file, stacking
/// `if`/`menu` conditions across `source` boundaries. `vars` substitutes
/// $(NAME)/$NAME occurrences in source paths (SRCARCH defaults to x86).
/// Throws MissingRoot / SourceCycle.
KconfigGraph build_graph(const SourceTree& tree, const std::string& root,
                         std::map<std::string, std::string> vars = {});

// Transitive closure over outgoing edges of every kind. Virtual vertices
// are traversed but filtered from the result; seeds are excluded; unknown
// seeds are skipped with a warning.
std::set<std::string> reachable_from(const KconfigGraph& graph, const std::set<std::string>& seeds,
                                     std::vector<std::string>* warnings = nullptr);

// Real configs with a one-hop relation of the given kind into any target,
// where menu vertices are transparent (they do not count as a hop).
// Depend-kind accepts both depend and opaque_depend edges for the final
// hop. Targets themselves are excluded.
std::set<std::string> inbound_one_hop(const KconfigGraph& graph,
                                      const std::set<std::string>& targets, EdgeKind kind,
                                      std::vector<std::string>* warnings = nullptr);

// DOT rendering; vertex shape encodes the kind, edge label the relation.
// With `focus`, only the named real vertices plus menu vertices that
// connect two of them are emitted.
std::string to_dot(const KconfigGraph& graph, const std::set<std::string>* focus = nullptr);

} // namespace kvet
