#include "kvet/config_identify.hpp"

#include <json.hpp>

#include <algorithm>

namespace kvet {

std::set<std::string> ConfigReport::direct() const {
    std::set<std::string> d = ddc;
    d.insert(dpc.begin(), dpc.end());
    d.insert(dcc.begin(), dcc.end());
    return d;
}

namespace {

// 1-based line numbers of the hunk's deleted lines inside the actual
// file, anchored by context search so line shift does not matter. Hunks
// without deletions contribute their whole matched region.
std::set<int> modified_lines_in_file(const std::vector<std::string>& file_lines,
                                     const Hunk& hunk) {
    std::set<int> out;
    auto pre = hunk.pre_image();
    int base = hunk.old_start;
    if (!pre.empty()) {
        auto found = locate(file_lines, pre, hunk.old_start);
        if (found.kind == LocateResult::Kind::Unique)
            base = found.line;
    }
    bool has_del = false;
    int offset = 0;
    for (const auto& [tag, text] : hunk.lines) {
        (void)text;
        if (tag == LineTag::Add)
            continue;
        if (tag == LineTag::Del) {
            has_del = true;
            out.insert(base + offset);
        }
        ++offset;
    }
    if (!has_del) {
        out.clear();
        for (int i = 0; i < std::max(hunk.old_count, 1); ++i)
            out.insert(base + i);
    }
    return out;
}

} // namespace

ConfigReport get_vul_configs(const VulnProfile& profile, const Patch& patch,
                             const SourceTree& tree, const KconfigGraph& graph,
                             const std::string& kernel_version) {
    ConfigReport report;
    report.cve_id = profile.cve_id;
    report.kernel_version = kernel_version;
    report.graph_stats = {graph.vertex_count(), graph.edge_count()};

    report.ddc = extract_ddc(profile.description);

    // affected files: everything the patch touches plus paths named in
    // the description text
    std::set<std::string> files;
    for (const auto& f : patch.affected_files())
        files.insert(f);
    for (const auto& f : extract_paths(profile.description))
        files.insert(f);
    report.affected_files.assign(files.begin(), files.end());

    for (const auto& f : report.affected_files) {
        if (!(f.ends_with(".c") || f.ends_with(".S")))
            continue; // headers are not gated by obj- rules
        auto syms = resolve_dpc(tree, f, &report.warnings);
        report.dpc.insert(syms.begin(), syms.end());
    }

    for (const auto& commit : patch.commits) {
        for (const auto& fd : commit.file_diffs) {
            const std::string& path = fd.effective_path();
            auto content = tree.read(path);
            if (!content) {
                report.warnings.push_back("patched file not in tree: " + path);
                continue;
            }
            auto file_lines = split_lines(*content);
            std::set<int> lines;
            for (const auto& hunk : fd.hunks) {
                auto l = modified_lines_in_file(file_lines, hunk);
                lines.insert(l.begin(), l.end());
            }
            if (lines.empty())
                continue;
            auto syms = resolve_dcc(tree, path, lines, &report.warnings);
            report.dcc.insert(syms.begin(), syms.end());
        }
    }

    auto direct = report.direct();
    if (direct.empty()) {
        report.empty_direct_set = true;
        report.warnings.push_back(
            "no direct configs found; the vulnerability may need no configs");
        return report;
    }

    report.hrc = reachable_from(graph, direct, &report.warnings);

    auto minus_known = [&](std::set<std::string> s) {
        for (const auto& sym : report.hrc)
            s.erase(sym);
        for (const auto& sym : direct)
            s.erase(sym);
        return s;
    };
    report.hsc = minus_known(inbound_one_hop(graph, direct, EdgeKind::Select, &report.warnings));
    report.hdc = minus_known(inbound_one_hop(graph, direct, EdgeKind::Depend, &report.warnings));

    report.union_s = direct;
    report.union_s.insert(report.hrc.begin(), report.hrc.end());
    report.union_s.insert(report.hsc.begin(), report.hsc.end());
    report.union_s.insert(report.hdc.begin(), report.hdc.end());
    return report;
}

const HintTable& builtin_hint_table() {
    static const HintTable table = {
        {"CVE-2021-22555", {"NETFILTER_XT_TARGET_NFQUEUE"}},
        {"CVE-2022-1015", {"NF_TABLES", "NF_TABLES_IPV4"}},
        {"CVE-2022-25636", {"NF_TABLES", "NF_TABLES_NETDEV"}},
        {"CVE-2022-32250", {"NF_TABLES", "NF_TABLES_IPV4"}},
        {"CVE-2022-34918", {"NF_TABLES", "NF_TABLES_INET"}},
        {"CVE-2023-32233", {"NF_TABLES", "NF_TABLES_INET", "NFT_LOG", "NFT_QUOTA"}},
    };
    return table;
}

HintTable parse_hint_table(std::string_view text) {
    HintTable table;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        std::string token;
        std::vector<std::string> tokens;
        for (char c : line) {
            if (c == '#')
                break;
            if (c == ' ' || c == '\t' || c == '\r') {
                if (!token.empty())
                    tokens.push_back(std::move(token));
                token.clear();
            } else {
                token += c;
            }
        }
        if (!token.empty())
            tokens.push_back(std::move(token));
        if (tokens.size() < 2)
            continue;
        auto& row = table[tokens[0]];
        for (size_t i = 1; i < tokens.size(); ++i)
            row.insert(tokens[i]);
    }
    return table;
}

ConfigReport minimal_hint(ConfigReport report, const HintTable& table) {
    report.essential_hints.clear();
    auto it = table.find(report.cve_id);
    if (it == table.end())
        return report;
    for (const auto& sym : it->second)
        if (report.union_s.count(sym))
            report.essential_hints.push_back(sym);
    return report;
}

std::string report_to_json(const ConfigReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["cve_id"] = report.cve_id;
    j["kernel_version"] = report.kernel_version;
    j["graph"] = {{"vertices", report.graph_stats.first}, {"edges", report.graph_stats.second}};
    auto set_array = [](const std::set<std::string>& s) {
        return std::vector<std::string>(s.begin(), s.end());
    };
    j["ddc"] = set_array(report.ddc);
    j["dpc"] = set_array(report.dpc);
    j["dcc"] = set_array(report.dcc);
    j["hrc"] = set_array(report.hrc);
    j["hsc"] = set_array(report.hsc);
    j["hdc"] = set_array(report.hdc);
    j["union"] = set_array(report.union_s);
    j["affected_files"] = report.affected_files;
    if (!report.essential_hints.empty())
        j["essential_hints"] = report.essential_hints;
    j["empty_direct_set"] = report.empty_direct_set;
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

} // namespace kvet
