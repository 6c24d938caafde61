#include "kvet/kconfig.hpp"

#include "kvet/errors.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace kvet {

const char* to_string(VertexKind k) {
    switch (k) {
    case VertexKind::Config: return "config";
    case VertexKind::Menuconfig: return "menuconfig";
    case VertexKind::InnerConfig: return "inner_config";
    case VertexKind::MenuVirtual: return "menu";
    }
    return "?";
}

const char* to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::Depend: return "depend";
    case EdgeKind::OpaqueDepend: return "opaque_depend";
    case EdgeKind::Select: return "select";
    case EdgeKind::Imply: return "imply";
    }
    return "?";
}

VertexId KconfigGraph::add_config(const std::string& name, VertexKind kind,
                                  const std::string& file) {
    if (auto it = symbol_index_.find(name); it != symbol_index_.end()) {
        auto& v = vertices_[it->second];
        if (v.placeholder) {
            v.placeholder = false;
            v.kind = kind;
            v.defining_file = file;
        }
        return it->second; // duplicate definition merges into one vertex
    }
    VertexId id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back({name, kind, file, false});
    out_.emplace_back();
    in_.emplace_back();
    symbol_index_[name] = id;
    return id;
}

VertexId KconfigGraph::add_menu(const std::string& title, const std::string& file) {
    VertexId id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back({title, VertexKind::MenuVirtual, file, false});
    out_.emplace_back();
    in_.emplace_back();
    return id;
}

VertexId KconfigGraph::ensure_symbol(const std::string& name) {
    if (auto it = symbol_index_.find(name); it != symbol_index_.end())
        return it->second;
    VertexId id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back({name, VertexKind::Config, "", true});
    out_.emplace_back();
    in_.emplace_back();
    symbol_index_[name] = id;
    return id;
}

void KconfigGraph::add_edge(VertexId from, VertexId to, EdgeKind kind) {
    if (from == to) {
        warnings.push_back("dropped self-loop on " + vertices_[from].name);
        return;
    }
    if (!edge_keys_.emplace(from, to, kind).second)
        return;
    edges_.push_back({from, to, kind});
    out_[from].emplace_back(to, kind);
    in_[to].emplace_back(from, kind);
}

std::optional<VertexId> KconfigGraph::find_symbol(const std::string& name) const {
    if (auto it = symbol_index_.find(name); it != symbol_index_.end())
        return it->second;
    return std::nullopt;
}

std::vector<std::string> expr_symbols(std::string_view expr) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    size_t i = 0;
    while (i < expr.size()) {
        char c = expr[i];
        if (c == '"' || c == '\'') {
            size_t close = expr.find(c, i + 1);
            i = close == std::string_view::npos ? expr.size() : close + 1;
            continue;
        }
        if (c == '$') { // $(macro) or $VAR, never a config symbol
            ++i;
            if (i < expr.size() && expr[i] == '(') {
                size_t close = expr.find(')', i);
                i = close == std::string_view::npos ? expr.size() : close + 1;
            } else {
                while (i < expr.size() && (std::isalnum(static_cast<unsigned char>(expr[i])) || expr[i] == '_'))
                    ++i;
            }
            continue;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            size_t begin = i;
            while (i < expr.size() &&
                   (std::isalnum(static_cast<unsigned char>(expr[i])) || expr[i] == '_'))
                ++i;
            std::string tok(expr.substr(begin, i - begin));
            if (tok == "y" || tok == "m" || tok == "n")
                continue;
            if (std::all_of(tok.begin(), tok.end(),
                            [](unsigned char ch) { return std::isdigit(ch); }))
                continue;
            if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X'))
                continue;
            if (seen.insert(tok).second)
                out.push_back(std::move(tok));
            continue;
        }
        ++i;
    }
    return out;
}

namespace {

struct ScopeFrame {
    enum class Kind { If, Menu, Choice } kind;
    std::vector<std::string> condition_symbols; // If / Choice
    VertexId menu_vertex = 0;                   // Menu
};

int indent_width(std::string_view line) {
    int w = 0;
    for (char c : line) {
        if (c == ' ')
            ++w;
        else if (c == '\t')
            w += 8 - (w % 8);
        else
            break;
    }
    return w;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::string strip_comment(std::string_view line) {
    std::string out;
    bool in_quote = false;
    char quote = 0;
    for (char c : line) {
        if (in_quote) {
            if (c == quote)
                in_quote = false;
        } else if (c == '"' || c == '\'') {
            in_quote = true;
            quote = c;
        } else if (c == '#') {
            break;
        }
        out += c;
    }
    return out;
}

std::string first_word(std::string_view s) {
    size_t end = 0;
    while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end])))
        ++end;
    return std::string(s.substr(0, end));
}

std::string_view after_word(std::string_view s) {
    size_t end = 0;
    while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end])))
        ++end;
    while (end < s.size() && std::isspace(static_cast<unsigned char>(s[end])))
        ++end;
    return s.substr(end);
}

std::string unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return std::string(s.substr(1, s.size() - 2));
    return std::string(s);
}

class GraphBuilder {
public:
    GraphBuilder(const SourceTree& tree, std::map<std::string, std::string> vars)
        : tree_(tree), vars_(std::move(vars)) {
        if (!vars_.count("SRCARCH"))
            vars_["SRCARCH"] = "x86";
    }

    KconfigGraph build(const std::string& root) {
        if (!tree_.exists(root))
            throw Error(Errc::MissingRoot, root);
        parse_file(root);
        return std::move(graph_);
    }

private:
    const SourceTree& tree_;
    std::map<std::string, std::string> vars_;
    KconfigGraph graph_;
    std::vector<ScopeFrame> scope_;
    std::vector<std::string> source_chain_;

    // item currently accepting attribute lines; Comment swallows them
    enum class Attach { None, Config, Menu, Choice, Comment } attach_ = Attach::None;
    VertexId attach_vertex_ = 0;

    std::string substitute_vars(const std::string& path) {
        std::string out;
        size_t i = 0;
        while (i < path.size()) {
            if (path[i] == '$') {
                size_t begin, end;
                std::string name;
                if (i + 1 < path.size() && path[i + 1] == '(') {
                    begin = i + 2;
                    end = path.find(')', begin);
                    if (end == std::string::npos) {
                        out += path[i++];
                        continue;
                    }
                    name = path.substr(begin, end - begin);
                    i = end + 1;
                } else {
                    begin = i + 1;
                    end = begin;
                    while (end < path.size() &&
                           (std::isalnum(static_cast<unsigned char>(path[end])) || path[end] == '_'))
                        ++end;
                    name = path.substr(begin, end - begin);
                    i = end;
                }
                if (auto it = vars_.find(name); it != vars_.end())
                    out += it->second;
                else
                    graph_.warnings.push_back("unknown source path variable: " + name);
            } else {
                out += path[i++];
            }
        }
        return out;
    }

    // opaque_depend targets implied by the current scope stack
    std::vector<VertexId> scope_targets() {
        std::vector<VertexId> targets;
        for (const auto& frame : scope_) {
            if (frame.kind == ScopeFrame::Kind::Menu) {
                targets.push_back(frame.menu_vertex);
            } else {
                for (const auto& sym : frame.condition_symbols)
                    targets.push_back(graph_.ensure_symbol(sym));
            }
        }
        return targets;
    }

    bool inside_choice() const {
        return std::any_of(scope_.begin(), scope_.end(), [](const ScopeFrame& f) {
            return f.kind == ScopeFrame::Kind::Choice;
        });
    }

    void parse_file(const std::string& path) {
        if (std::find(source_chain_.begin(), source_chain_.end(), path) != source_chain_.end()) {
            std::string chain;
            for (const auto& p : source_chain_)
                chain += p + " -> ";
            throw Error(Errc::SourceCycle, chain + path);
        }
        auto content = tree_.read(path);
        if (!content) {
            graph_.warnings.push_back("sourced Kconfig file missing: " + path);
            return;
        }
        source_chain_.push_back(path);
        size_t depth_at_entry = scope_.size();

        auto raw_lines = split_lines(*content);
        size_t i = 0;
        while (i < raw_lines.size()) {
            std::string line = raw_lines[i++];
            while (!line.empty() && line.back() == '\\' && i < raw_lines.size()) {
                line.pop_back();
                line += raw_lines[i++];
            }
            std::string cooked = strip_comment(line);
            std::string_view body = trim(cooked);
            if (body.empty())
                continue;

            std::string keyword = first_word(body);
            std::string_view rest = after_word(body);

            if (keyword == "help" || keyword == "---help---") {
                skip_help_block(raw_lines, i, indent_width(line));
                continue;
            }
            if (keyword == "config" || keyword == "menuconfig") {
                VertexKind kind = inside_choice() ? VertexKind::InnerConfig
                                  : keyword == "menuconfig" ? VertexKind::Menuconfig
                                                            : VertexKind::Config;
                VertexId id = graph_.add_config(std::string(trim(rest)), kind, path);
                for (VertexId t : scope_targets())
                    graph_.add_edge(id, t, EdgeKind::OpaqueDepend);
                attach_ = Attach::Config;
                attach_vertex_ = id;
                continue;
            }
            if (keyword == "menu") {
                VertexId id = graph_.add_menu(unquote(rest), path);
                for (VertexId t : scope_targets())
                    graph_.add_edge(id, t, EdgeKind::OpaqueDepend);
                scope_.push_back({ScopeFrame::Kind::Menu, {}, id});
                attach_ = Attach::Menu;
                attach_vertex_ = id;
                continue;
            }
            if (keyword == "endmenu") {
                pop_scope(ScopeFrame::Kind::Menu, path);
                attach_ = Attach::None;
                continue;
            }
            if (keyword == "if") {
                scope_.push_back({ScopeFrame::Kind::If, expr_symbols(rest), 0});
                attach_ = Attach::None;
                continue;
            }
            if (keyword == "endif") {
                pop_scope(ScopeFrame::Kind::If, path);
                continue;
            }
            if (keyword == "choice") {
                scope_.push_back({ScopeFrame::Kind::Choice, {}, 0});
                attach_ = Attach::Choice;
                continue;
            }
            if (keyword == "endchoice") {
                pop_scope(ScopeFrame::Kind::Choice, path);
                attach_ = Attach::None;
                continue;
            }
            if (keyword == "source" || keyword == "rsource" || keyword == "orsource") {
                std::string target = substitute_vars(unquote(rest));
                if (keyword != "source") {
                    // relative to the sourcing file's directory
                    size_t slash = path.rfind('/');
                    if (slash != std::string::npos)
                        target = path.substr(0, slash + 1) + target;
                }
                attach_ = Attach::None;
                parse_file(target);
                continue;
            }
            if (keyword == "comment") {
                attach_ = Attach::Comment;
                continue;
            }
            if (keyword == "mainmenu") {
                attach_ = Attach::None;
                continue;
            }
            if (keyword == "depends") {
                std::string_view expr = rest;
                if (first_word(expr) == "on")
                    expr = after_word(expr);
                handle_depends(expr, path);
                continue;
            }
            if (keyword == "select" || keyword == "imply") {
                handle_select_imply(keyword == "select" ? EdgeKind::Select : EdgeKind::Imply, rest);
                continue;
            }
            // type declarations, defaults, prompts, ranges, visibility:
            // parsed but contributing no edges
            if (keyword == "bool" || keyword == "tristate" || keyword == "string" ||
                keyword == "hex" || keyword == "int" || keyword == "prompt" ||
                keyword == "default" || keyword == "def_bool" || keyword == "def_tristate" ||
                keyword == "range" || keyword == "visible" || keyword == "optional" ||
                keyword == "modules") {
                continue;
            }
            // macro assignments (name = expr / name := expr), used by the
            // kernel's Kconfig.include helpers
            if (size_t eq = body.find('='); eq != std::string_view::npos) {
                std::string_view lhs = trim(body.substr(0, eq));
                if (!lhs.empty() && lhs.back() == ':')
                    lhs.remove_suffix(1);
                lhs = trim(lhs);
                bool macro = !lhs.empty() &&
                             std::all_of(lhs.begin(), lhs.end(), [](unsigned char c) {
                                 return std::isalnum(c) || c == '_' || c == '-';
                             });
                if (macro)
                    continue;
            }
            graph_.warnings.push_back("unrecognized line in " + path + ": " + std::string(body));
        }

        while (scope_.size() > depth_at_entry) {
            graph_.warnings.push_back("unclosed block at end of " + path);
            scope_.pop_back();
        }
        source_chain_.pop_back();
    }

    void skip_help_block(const std::vector<std::string>& lines, size_t& i, int keyword_indent) {
        int text_indent = -1;
        while (i < lines.size()) {
            std::string_view line = lines[i];
            if (trim(line).empty()) {
                ++i;
                continue;
            }
            int ind = indent_width(line);
            if (text_indent < 0) {
                if (ind <= keyword_indent)
                    return; // empty help block
                text_indent = ind;
            }
            if (ind < text_indent)
                return;
            ++i;
        }
    }

    void handle_depends(std::string_view expr, const std::string& path) {
        auto symbols = expr_symbols(expr);
        if (attach_ == Attach::Config || attach_ == Attach::Menu) {
            for (const auto& sym : symbols) {
                VertexId to = graph_.ensure_symbol(sym);
                graph_.add_edge(attach_vertex_, to, EdgeKind::Depend);
            }
        } else if (attach_ == Attach::Choice && !scope_.empty() &&
                   scope_.back().kind == ScopeFrame::Kind::Choice) {
            auto& conds = scope_.back().condition_symbols;
            conds.insert(conds.end(), symbols.begin(), symbols.end());
        } else if (attach_ != Attach::Comment) {
            graph_.warnings.push_back("dangling depends line in " + path);
        }
    }

    void handle_select_imply(EdgeKind kind, std::string_view rest) {
        if (attach_ != Attach::Config)
            return; // select/imply only make sense inside a config entry
        std::string target = first_word(rest); // trailing "if <expr>" ignored
        if (target.empty())
            return;
        graph_.add_edge(attach_vertex_, graph_.ensure_symbol(target), kind);
    }

    void pop_scope(ScopeFrame::Kind expected, const std::string& path) {
        if (scope_.empty() || scope_.back().kind != expected) {
            graph_.warnings.push_back("mismatched block terminator in " + path);
            return;
        }
        scope_.pop_back();
    }
};

} // namespace

KconfigGraph build_graph(const SourceTree& tree, const std::string& root,
                         std::map<std::string, std::string> vars) {
    GraphBuilder builder(tree, std::move(vars));
    return builder.build(root);
}

std::set<std::string> reachable_from(const KconfigGraph& graph, const std::set<std::string>& seeds,
                                     std::vector<std::string>* warnings) {
    std::vector<VertexId> frontier;
    std::vector<bool> visited(graph.vertex_count(), false);
    for (const auto& name : seeds) {
        auto id = graph.find_symbol(name);
        if (!id) {
            if (warnings)
                warnings->push_back("seed not in graph: " + name);
            continue;
        }
        if (!visited[*id]) {
            visited[*id] = true;
            frontier.push_back(*id);
        }
    }
    std::set<std::string> result;
    while (!frontier.empty()) {
        VertexId v = frontier.back();
        frontier.pop_back();
        for (auto [next, kind] : graph.out(v)) {
            (void)kind; // closure runs over every edge kind
            if (visited[next])
                continue;
            visited[next] = true;
            frontier.push_back(next);
            const auto& vx = graph.vertices()[next];
            if (vx.kind != VertexKind::MenuVirtual && !seeds.count(vx.name))
                result.insert(vx.name);
        }
    }
    return result;
}

std::set<std::string> inbound_one_hop(const KconfigGraph& graph,
                                      const std::set<std::string>& targets, EdgeKind kind,
                                      std::vector<std::string>* warnings) {
    auto kind_matches = [kind](EdgeKind k) {
        if (kind == EdgeKind::Select)
            return k == EdgeKind::Select;
        return k == EdgeKind::Depend || k == EdgeKind::OpaqueDepend;
    };

    // memoized real-config ancestors of a virtual vertex through
    // virtual-only interiors (any edge kind; menus are transparent)
    std::map<VertexId, std::vector<VertexId>> virtual_sources;
    auto sources_of_virtual = [&](VertexId start) -> const std::vector<VertexId>& {
        if (auto it = virtual_sources.find(start); it != virtual_sources.end())
            return it->second;
        std::vector<VertexId> reals;
        std::set<VertexId> seen{start};
        std::vector<VertexId> stack{start};
        while (!stack.empty()) {
            VertexId v = stack.back();
            stack.pop_back();
            for (auto [src, k] : graph.in(v)) {
                (void)k;
                if (!seen.insert(src).second)
                    continue;
                if (graph.is_virtual(src))
                    stack.push_back(src);
                else
                    reals.push_back(src);
            }
        }
        return virtual_sources.emplace(start, std::move(reals)).first->second;
    };

    std::set<std::string> result;
    for (const auto& name : targets) {
        auto id = graph.find_symbol(name);
        if (!id) {
            if (warnings)
                warnings->push_back("target not in graph: " + name);
            continue;
        }
        for (auto [src, k] : graph.in(*id)) {
            if (!kind_matches(k))
                continue;
            if (graph.is_virtual(src)) {
                for (VertexId real : sources_of_virtual(src)) {
                    const auto& vx = graph.vertices()[real];
                    if (!targets.count(vx.name))
                        result.insert(vx.name);
                }
            } else {
                const auto& vx = graph.vertices()[src];
                if (!targets.count(vx.name))
                    result.insert(vx.name);
            }
        }
    }
    return result;
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out;
}

const char* dot_shape(VertexKind k) {
    switch (k) {
    case VertexKind::Config: return "ellipse";
    case VertexKind::Menuconfig: return "octagon";
    case VertexKind::InnerConfig: return "diamond";
    case VertexKind::MenuVirtual: return "box";
    }
    return "ellipse";
}

} // namespace

std::string to_dot(const KconfigGraph& graph, const std::set<std::string>* focus) {
    std::vector<bool> keep(graph.vertex_count(), focus == nullptr);
    if (focus) {
        for (VertexId v = 0; v < graph.vertex_count(); ++v)
            if (!graph.is_virtual(v) && focus->count(graph.vertices()[v].name))
                keep[v] = true;
        // menu vertices that connect two focused vertices stay as connectors
        for (VertexId v = 0; v < graph.vertex_count(); ++v) {
            if (!graph.is_virtual(v))
                continue;
            bool has_in = false, has_out = false;
            for (auto [src, k] : graph.in(v)) {
                (void)k;
                if (keep[src])
                    has_in = true;
            }
            for (auto [dst, k] : graph.out(v)) {
                (void)k;
                if (keep[dst])
                    has_out = true;
            }
            keep[v] = has_in && has_out;
        }
    }

    std::ostringstream os;
    os << "digraph kconfig {\n";
    for (VertexId v = 0; v < graph.vertex_count(); ++v) {
        if (!keep[v])
            continue;
        const auto& vx = graph.vertices()[v];
        os << "  v" << v << " [label=\"" << dot_escape(vx.name) << "\" shape="
           << dot_shape(vx.kind) << "];\n";
    }
    for (const auto& e : graph.edges()) {
        if (!keep[e.from] || !keep[e.to])
            continue;
        os << "  v" << e.from << " -> v" << e.to << " [label=\"" << to_string(e.kind) << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace kvet
