#include "kvet/source_analysis.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace kvet {

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool ddc_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

} // namespace

std::set<std::string> extract_ddc(std::string_view text) {
    std::set<std::string> out;
    static const std::string_view marker = "CONFIG_";
    size_t pos = 0;
    while ((pos = text.find(marker, pos)) != std::string_view::npos) {
        if (pos > 0 && ident_char(text[pos - 1])) { // part of a larger identifier
            pos += marker.size();
            continue;
        }
        size_t end = pos + marker.size();
        while (end < text.size() && ddc_char(text[end]))
            ++end;
        if (end > pos + marker.size())
            out.insert(std::string(text.substr(pos + marker.size(), end - pos - marker.size())));
        pos = end;
    }
    return out;
}

std::vector<std::string> extract_paths(std::string_view text) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto path_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
               c == '/';
    };
    size_t i = 0;
    while (i < text.size()) {
        if (!path_char(text[i])) {
            ++i;
            continue;
        }
        size_t begin = i;
        while (i < text.size() && path_char(text[i]))
            ++i;
        std::string_view tok = text.substr(begin, i - begin);
        while (!tok.empty() && (tok.back() == '.' || tok.back() == '/'))
            tok.remove_suffix(1);
        if (tok.find('/') == std::string_view::npos)
            continue;
        if (!(tok.ends_with(".c") || tok.ends_with(".S") || tok.ends_with(".h")))
            continue;
        std::string s(tok);
        if (seen.insert(s).second)
            out.push_back(std::move(s));
    }
    return out;
}

namespace {

struct MakefileRules {
    // CONFIG symbol -> targets of its obj-/lib- rules
    std::vector<std::pair<std::string, std::vector<std::string>>> gated;
    // composite object name ("foo") -> parts listed via foo-y / foo-objs
    std::map<std::string, std::vector<std::string>> composites;
};

std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        size_t begin = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        if (i > begin)
            out.emplace_back(s.substr(begin, i - begin));
    }
    return out;
}

MakefileRules parse_makefile(const std::string& content) {
    MakefileRules rules;
    auto raw = split_lines(content);
    for (size_t i = 0; i < raw.size(); ++i) {
        std::string line = raw[i];
        while (!line.empty() && line.back() == '\\' && i + 1 < raw.size()) {
            line.pop_back();
            line += " " + raw[++i];
        }
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#')
            continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        size_t lhs_end = eq;
        while (lhs_end > start && (line[lhs_end - 1] == ':' || line[lhs_end - 1] == '+' ||
                                   line[lhs_end - 1] == '?' || line[lhs_end - 1] == ' ' ||
                                   line[lhs_end - 1] == '\t'))
            --lhs_end;
        std::string lhs = line.substr(start, lhs_end - start);
        std::string rhs = line.substr(eq + 1);

        static const std::string obj_gate = "obj-$(CONFIG_";
        static const std::string lib_gate = "lib-$(CONFIG_";
        if (lhs.rfind(obj_gate, 0) == 0 || lhs.rfind(lib_gate, 0) == 0) {
            size_t close = lhs.find(')');
            if (close == std::string::npos)
                continue;
            std::string sym = lhs.substr(obj_gate.size(), close - obj_gate.size());
            rules.gated.emplace_back(sym, split_tokens(rhs));
            continue;
        }
        if (lhs == "obj-y" || lhs == "obj-m" || lhs == "lib-y")
            continue; // unconditional inclusion carries no config gate
        if (lhs.ends_with("-y") || lhs.ends_with("-objs")) {
            std::string name = lhs.substr(0, lhs.rfind('-'));
            auto& parts = rules.composites[name];
            for (auto& t : split_tokens(rhs))
                parts.push_back(std::move(t));
        }
    }
    return rules;
}

bool targets_contain(const std::vector<std::string>& targets, const std::string& needle) {
    return std::find(targets.begin(), targets.end(), needle) != targets.end();
}

} // namespace

std::set<std::string> resolve_dpc(const SourceTree& tree, const std::string& file,
                                  std::vector<std::string>* warnings) {
    std::set<std::string> out;
    if (!(file.ends_with(".c") || file.ends_with(".S")))
        return out;

    std::vector<std::string> parts;
    size_t pos = 0;
    while (pos <= file.size()) {
        size_t slash = file.find('/', pos);
        if (slash == std::string::npos) {
            parts.push_back(file.substr(pos));
            break;
        }
        parts.push_back(file.substr(pos, slash - pos));
        pos = slash + 1;
    }
    std::string object = parts.back().substr(0, parts.back().rfind('.')) + ".o";

    // level k holds directories parts[0..k); the needle at the file's own
    // directory is the object, above that the subdirectory just left
    for (size_t level = parts.size() - 1; level + 1 > 0; --level) {
        std::string dir;
        for (size_t i = 0; i < level; ++i)
            dir += parts[i] + "/";
        auto content = tree.read(dir + "Kbuild");
        if (!content)
            content = tree.read(dir + "Makefile");
        if (!content) {
            if (warnings)
                warnings->push_back("no Makefile or Kbuild in '" + dir + "'");
            continue;
        }
        auto rules = parse_makefile(*content);
        if (level == parts.size() - 1) {
            for (const auto& [sym, targets] : rules.gated) {
                if (targets_contain(targets, object)) {
                    out.insert(sym);
                    continue;
                }
                // one level of composite-object indirection
                for (const auto& t : targets) {
                    if (!t.ends_with(".o"))
                        continue;
                    auto comp = rules.composites.find(t.substr(0, t.size() - 2));
                    if (comp != rules.composites.end() && targets_contain(comp->second, object))
                        out.insert(sym);
                }
            }
        } else {
            std::string subdir = parts[level] + "/";
            for (const auto& [sym, targets] : rules.gated)
                if (targets_contain(targets, subdir) || targets_contain(targets, parts[level]))
                    out.insert(sym);
        }
    }
    return out;
}

namespace {

// positive-polarity CONFIG_* symbols referenced by a #if/#elif expression;
// negated references are reported, not returned
std::vector<std::string> positive_condition_symbols(std::string_view expr,
                                                    std::vector<std::string>* warnings,
                                                    const std::string& context) {
    std::vector<std::string> out;
    static const std::string_view marker = "CONFIG_";
    size_t pos = 0;
    while ((pos = expr.find(marker, pos)) != std::string_view::npos) {
        if (pos > 0 && ident_char(expr[pos - 1])) {
            pos += marker.size();
            continue;
        }
        size_t end = pos + marker.size();
        while (end < expr.size() && ident_char(expr[end]))
            ++end;
        std::string sym(expr.substr(pos + marker.size(), end - pos - marker.size()));

        // scan left for a negation: possibly through "defined(" or
        // "IS_ENABLED(" wrappers
        size_t probe = pos;
        bool negated = false;
        for (int hops = 0; hops < 2; ++hops) {
            while (probe > 0 && (std::isspace(static_cast<unsigned char>(expr[probe - 1])) ||
                                 expr[probe - 1] == '('))
                --probe;
            size_t word_end = probe;
            while (probe > 0 && ident_char(expr[probe - 1]))
                --probe;
            std::string_view word = expr.substr(probe, word_end - probe);
            if (word == "defined" || word == "IS_ENABLED" || word == "IS_BUILTIN" ||
                word == "IS_MODULE" || word == "IS_REACHABLE")
                continue;
            break;
        }
        while (probe > 0 && std::isspace(static_cast<unsigned char>(expr[probe - 1])))
            --probe;
        if (probe > 0 && expr[probe - 1] == '!')
            negated = true;

        if (negated) {
            if (warnings)
                warnings->push_back("negative condition on " + sym + " in " + context);
        } else if (!sym.empty()) {
            out.push_back(std::move(sym));
        }
        pos = end;
    }
    return out;
}

} // namespace

std::set<std::string> resolve_dcc(const SourceTree& tree, const std::string& file,
                                  const std::set<int>& lines,
                                  std::vector<std::string>* warnings) {
    std::set<std::string> out;
    auto content = tree.read(file);
    if (!content) {
        if (warnings)
            warnings->push_back("file not in tree: " + file);
        return out;
    }

    auto raw = split_lines(*content);
    std::vector<std::vector<std::string>> stack; // active branch positives per open group

    auto collect_at = [&](int lineno) {
        if (!lines.count(lineno))
            return;
        for (const auto& frame : stack)
            out.insert(frame.begin(), frame.end());
    };

    size_t i = 0;
    while (i < raw.size()) {
        int first_line = static_cast<int>(i) + 1;
        std::string line = raw[i++];
        size_t start = line.find_first_not_of(" \t");
        bool is_directive = start != std::string::npos && line[start] == '#';
        int last_line = first_line;
        if (is_directive) {
            while (!line.empty() && line.back() == '\\' && i < raw.size()) {
                line.pop_back();
                line += raw[i++];
                ++last_line;
            }
        }
        if (!is_directive) {
            collect_at(first_line);
            continue;
        }

        std::string_view body = std::string_view(line).substr(start + 1);
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.front())))
            body.remove_prefix(1);
        std::string keyword;
        for (char c : body) {
            if (!std::isalpha(static_cast<unsigned char>(c)))
                break;
            keyword += c;
        }
        std::string_view rest = body.substr(keyword.size());
        std::string context = file + ":" + std::to_string(first_line);

        // the directive line itself sits outside the region it opens or
        // closes: attribute it the surrounding state only
        auto collect_directive_lines = [&](size_t depth) {
            for (int ln = first_line; ln <= last_line; ++ln) {
                if (!lines.count(ln))
                    continue;
                for (size_t f = 0; f < depth && f < stack.size(); ++f)
                    out.insert(stack[f].begin(), stack[f].end());
            }
        };

        if (keyword == "ifdef") {
            collect_directive_lines(stack.size());
            auto syms = positive_condition_symbols(rest, warnings, context);
            stack.push_back(std::move(syms));
        } else if (keyword == "ifndef") {
            collect_directive_lines(stack.size());
            if (rest.find("CONFIG_") != std::string_view::npos && warnings)
                warnings->push_back("negative condition (#ifndef) in " + context);
            stack.push_back({});
        } else if (keyword == "if") {
            collect_directive_lines(stack.size());
            stack.push_back(positive_condition_symbols(rest, warnings, context));
        } else if (keyword == "elif") {
            if (stack.empty()) {
                if (warnings)
                    warnings->push_back("unbalanced #elif in " + context);
                collect_directive_lines(0);
            } else {
                collect_directive_lines(stack.size() - 1);
                stack.back() = positive_condition_symbols(rest, warnings, context);
            }
        } else if (keyword == "else") {
            if (stack.empty()) {
                if (warnings)
                    warnings->push_back("unbalanced #else in " + context);
                collect_directive_lines(0);
            } else {
                collect_directive_lines(stack.size() - 1);
                stack.back().clear(); // else branches contribute nothing
            }
        } else if (keyword == "endif") {
            if (stack.empty()) {
                if (warnings)
                    warnings->push_back("unbalanced #endif in " + context);
                collect_directive_lines(0);
            } else {
                stack.pop_back();
                collect_directive_lines(stack.size());
            }
        } else {
            // #include, #define, ...: ordinary code for our purposes
            for (int ln = first_line; ln <= last_line; ++ln)
                collect_at(ln);
        }
    }
    if (!stack.empty() && warnings)
        warnings->push_back("unterminated conditional block in " + file);
    return out;
}

} // namespace kvet
