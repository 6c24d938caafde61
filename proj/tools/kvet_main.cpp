#include "kvet/build_plan.hpp"
#include "kvet/config_identify.hpp"
#include "kvet/errors.hpp"
#include "kvet/kconfig.hpp"
#include "kvet/patch.hpp"
#include "kvet/profile.hpp"
#include "kvet/release_index.hpp"
#include "kvet/source_tree.hpp"
#include "kvet/version_scan.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::ordered_json;

namespace {

struct GlobalOptions {
    std::string store_dir = "kvet-store";
    std::string cache_dir;
    std::string releases_path;
    std::string srcarch = "x86";
    std::string format = "table";
    bool offline = true;
    unsigned jobs = 0;
    bool verbose = false;

    std::string cache() const { return cache_dir.empty() ? store_dir + "/cache" : cache_dir; }
    std::string releases() const {
        return releases_path.empty() ? store_dir + "/releases.txt" : releases_path;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw kvet::Error(kvet::Errc::IoFailure, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw kvet::Error(kvet::Errc::IoFailure, "cannot write " + path);
    out << content;
}

kvet::ReleaseIndex load_releases(const GlobalOptions& opts) {
    return kvet::ReleaseIndex::from_file(opts.releases());
}

// Patch text resolution: an explicit file wins; otherwise each profile
// commit is read from <cache>/patches/<sha>.patch.
kvet::Patch patch_for_profile(const GlobalOptions& opts, const kvet::VulnProfile& profile,
                              const std::string& explicit_path) {
    std::string text;
    if (!explicit_path.empty()) {
        text = read_file(explicit_path);
    } else {
        if (profile.patch_commits.empty())
            throw kvet::Error(kvet::Errc::NoPatch, profile.cve_id + " has no patch commits");
        for (const auto& sha : profile.patch_commits) {
            std::string path = opts.cache() + "/patches/" + sha + ".patch";
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw kvet::Error(kvet::Errc::NoPatch,
                                  profile.cve_id + ": no cached patch for commit " + sha +
                                      " (expected at " + path + ")");
            std::ostringstream buf;
            buf << in.rdbuf();
            text += buf.str();
            if (!text.empty() && text.back() != '\n')
                text += '\n';
        }
    }
    kvet::Patch patch = kvet::parse_patch(text);
    if (patch.empty())
        throw kvet::Error(kvet::Errc::NoPatch, profile.cve_id + ": patch text parsed empty");
    return patch;
}

// NVD feeds carry either {"vulnerabilities": [...]} or a single record.
std::vector<std::string> feed_records(const std::string& text) {
    auto doc = nlohmann::json::parse(text);
    std::vector<std::string> records;
    if (doc.contains("vulnerabilities")) {
        for (const auto& v : doc["vulnerabilities"])
            records.push_back(v.dump());
    } else if (doc.is_array()) {
        for (const auto& v : doc)
            records.push_back(v.dump());
    } else {
        records.push_back(doc.dump());
    }
    return records;
}

// a directory input stands for a fixture dir: every *.json inside, sorted
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& input : inputs) {
        std::error_code ec;
        if (std::filesystem::is_directory(input, ec)) {
            std::vector<std::string> found;
            for (const auto& entry : std::filesystem::directory_iterator(input, ec))
                if (entry.is_regular_file() && entry.path().extension() == ".json")
                    found.push_back(entry.path().string());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(input);
        }
    }
    return out;
}

int cmd_import(const GlobalOptions& opts, const std::vector<std::string>& raw_inputs,
               const std::string& vendor_file) {
    kvet::ProfileStore store(opts.store_dir);
    auto inputs = expand_inputs(raw_inputs);

    std::vector<kvet::VendorPatchRecord> vendor;
    if (!vendor_file.empty())
        vendor = kvet::parse_vendor_patch_file(read_file(vendor_file));

    size_t imported = 0, unchanged = 0;
    ordered_json errors = ordered_json::array();
    ordered_json warnings = ordered_json::array();

    for (const auto& input : inputs) {
        std::vector<std::string> records;
        try {
            records = feed_records(read_file(input));
        } catch (const std::exception& e) {
            errors.push_back({{"input", input}, {"error", e.what()}});
            continue;
        }
        for (const auto& record : records) {
            try {
                auto result = kvet::import_nvd_record(record);
                for (const auto& w : result.warnings)
                    warnings.push_back({{"cve_id", result.profile.cve_id}, {"warning", w}});
                std::vector<kvet::VendorPatchRecord> matching;
                for (const auto& rec : vendor)
                    if (rec.cve_id == result.profile.cve_id)
                        matching.push_back(rec);
                auto profile = kvet::merge_vendor_patches(std::move(result.profile), matching);
                if (store.contains(profile.cve_id) && store.load(profile.cve_id) == profile) {
                    ++unchanged;
                } else {
                    store.save(profile);
                    ++imported;
                }
            } catch (const std::exception& e) {
                errors.push_back({{"input", input}, {"error", e.what()}});
            }
        }
    }

    if (opts.format == "json") {
        ordered_json j;
        j["schema"] = 1;
        j["imported"] = imported;
        j["unchanged"] = unchanged;
        j["errors"] = errors;
        j["warnings"] = warnings;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "imported " << imported << " profile(s), " << unchanged << " unchanged, "
                  << errors.size() << " error(s)\n";
        for (const auto& e : errors)
            std::cerr << "error: " << e["error"].get<std::string>() << "\n";
    }
    return errors.empty() ? 0 : 1;
}

int cmd_check_version(const GlobalOptions& opts, const std::string& cve_id,
                      const std::string& patch_path, const std::string& out_path) {
    kvet::ProfileStore store(opts.store_dir);
    auto profile = store.load(cve_id);
    auto index = load_releases(opts);
    auto patch = patch_for_profile(opts, profile, patch_path);
    auto provider = kvet::make_cache_provider(opts.cache());

    auto report = kvet::scan(profile, index, patch, provider);
    std::string rendered = kvet::scan_report_to_json(report);
    if (!out_path.empty())
        write_file(out_path, rendered);

    if (opts.format == "json") {
        std::cout << rendered;
    } else {
        std::cout << cve_id << ": vulnerable version "
                  << (report.vulnerable_version ? "v" + report.vulnerable_version->str() : "(none)")
                  << ", " << report.fp_count() << " false-positive claim(s)\n";
        for (const auto& [lo, hi] : kvet::fp_ranges(report, index))
            std::cout << "  fp range: v" << lo.str() << " -- v" << hi.str() << "\n";
        if (report.all_patched_in_range)
            std::cout << "  note: every version in the claimed range is already patched\n";
        for (const auto& w : report.warnings)
            std::cout << "  warning: " << w << "\n";
    }
    return 0;
}

kvet::ConfigReport build_report(const GlobalOptions& opts, const std::string& cve_id,
                                const std::string& tree_dir, const std::string& patch_path,
                                const std::string& kernel_version, const std::string& hints_path) {
    kvet::ProfileStore store(opts.store_dir);
    auto profile = store.load(cve_id);
    auto patch = patch_for_profile(opts, profile, patch_path);
    kvet::DirectoryTree tree(tree_dir);
    auto graph = kvet::build_graph(tree, "Kconfig", {{"SRCARCH", opts.srcarch}});
    auto report = kvet::get_vul_configs(profile, patch, tree, graph, kernel_version);
    kvet::HintTable table = kvet::builtin_hint_table();
    if (!hints_path.empty()) {
        for (auto& [cve, syms] : kvet::parse_hint_table(read_file(hints_path)))
            table[cve].insert(syms.begin(), syms.end());
    }
    return kvet::minimal_hint(std::move(report), table);
}

void print_report_table(const kvet::ConfigReport& report) {
    auto row = [](const char* name, const std::set<std::string>& s) {
        std::cout << "  " << name << " (" << s.size() << ")";
        if (!s.empty()) {
            std::cout << ":";
            for (const auto& sym : s)
                std::cout << " " << sym;
        }
        std::cout << "\n";
    };
    std::cout << report.cve_id;
    if (!report.kernel_version.empty())
        std::cout << " @ v" << report.kernel_version;
    std::cout << " (graph: " << report.graph_stats.first << " vertices, "
              << report.graph_stats.second << " edges)\n";
    row("DDC", report.ddc);
    row("DPC", report.dpc);
    row("DCC", report.dcc);
    row("HRC", report.hrc);
    row("HSC", report.hsc);
    row("HDC", report.hdc);
    row("union", report.union_s);
    if (!report.essential_hints.empty()) {
        std::cout << "  known-essential:";
        for (const auto& sym : report.essential_hints)
            std::cout << " " << sym;
        std::cout << "\n";
    }
    if (report.empty_direct_set)
        std::cout << "  note: no direct configs found; the vulnerability may need no configs\n";
}

int cmd_configs(const GlobalOptions& opts, const std::string& cve_id, const std::string& tree_dir,
                const std::string& kernel_version, const std::string& patch_path,
                const std::string& hints_path, const std::string& fragment_out,
                const std::string& base_path, const std::string& out_path) {
    auto report = build_report(opts, cve_id, tree_dir, patch_path, kernel_version, hints_path);

    if (!fragment_out.empty()) {
        kvet::ConfigFragment base;
        if (!base_path.empty())
            base = kvet::ConfigFragment::parse(read_file(base_path));
        auto merged = kvet::merge_fragment(base, report);
        write_file(fragment_out, merged.fragment.render());
        for (const auto& c : merged.conflicts)
            std::cerr << "warning: " << c << "\n";
    }

    std::string rendered = kvet::report_to_json(report);
    if (!out_path.empty())
        write_file(out_path, rendered);
    if (opts.format == "json") {
        std::cout << rendered;
    } else {
        print_report_table(report);
        if (opts.verbose)
            for (const auto& w : report.warnings)
                std::cerr << "warning: " << w << "\n";
    }
    return 0;
}

int cmd_scan_fp(const GlobalOptions& opts, const std::string& out_path) {
    kvet::ProfileStore store(opts.store_dir);
    auto index = load_releases(opts);
    auto provider = kvet::make_cache_provider(opts.cache());
    kvet::PatchSource patch_source = [&](const kvet::VulnProfile& profile) {
        return patch_for_profile(opts, profile, "");
    };

    auto audit = kvet::scan_all(store, index, patch_source, provider, opts.jobs);
    std::string rendered = opts.format == "csv" ? kvet::fp_audit_to_csv(audit, store, index)
                                                : kvet::fp_audit_to_json(audit);
    if (!out_path.empty())
        write_file(out_path, rendered);

    if (opts.format == "json" || opts.format == "csv") {
        std::cout << rendered;
    } else {
        std::cout << audit.flagged_cves << " CVE(s) with false-positive version claims, "
                  << audit.total_fp_versions << " false-positive version(s) total";
        if (audit.flagged_cves)
            std::cout << ", mean " << audit.mean_fp_per_flagged << " per flagged CVE";
        std::cout << "\n";
        for (const auto& r : audit.reports) {
            if (r.fp_count() == 0)
                continue;
            std::cout << "  " << r.cve_id << ": " << r.fp_count() << " fp, vulnerable "
                      << (r.vulnerable_version ? "v" + r.vulnerable_version->str() : "(none)")
                      << "\n";
        }
        for (const auto& [cve, msg] : audit.errors)
            std::cerr << "error: " << cve << ": " << msg << "\n";
    }
    return audit.errors.empty() ? 0 : 1;
}

int cmd_graph(const GlobalOptions& opts, const std::string& tree_dir, const std::string& dot_path,
              const std::string& focus_cve, const std::string& patch_path,
              const std::string& kernel_version) {
    kvet::DirectoryTree tree(tree_dir);
    auto graph = kvet::build_graph(tree, "Kconfig", {{"SRCARCH", opts.srcarch}});
    if (opts.verbose)
        for (const auto& w : graph.warnings)
            std::cerr << "warning: " << w << "\n";

    std::string dot;
    if (!focus_cve.empty()) {
        auto report = build_report(opts, focus_cve, tree_dir, patch_path, kernel_version, "");
        auto focus = report.union_s;
        auto direct = report.direct();
        focus.insert(direct.begin(), direct.end());
        dot = kvet::to_dot(graph, &focus);
    } else {
        dot = kvet::to_dot(graph);
    }
    write_file(dot_path, dot);

    if (opts.format == "json") {
        ordered_json j;
        j["schema"] = 1;
        j["vertices"] = graph.vertex_count();
        j["edges"] = graph.edge_count();
        j["dot_path"] = dot_path;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "graph: " << graph.vertex_count() << " vertices, " << graph.edge_count()
                  << " edges -> " << dot_path << "\n";
    }
    return 0;
}

int cmd_plan(const GlobalOptions& opts, const std::string& cve_id, const std::string& tree_dir,
             const std::string& kernel_version, const std::string& patch_path,
             const std::string& base_path, const std::string& out_dir) {
    kvet::ProfileStore store(opts.store_dir);
    auto profile = store.load(cve_id);
    auto index = load_releases(opts);
    auto patch = patch_for_profile(opts, profile, patch_path);
    auto provider = kvet::make_cache_provider(opts.cache());
    auto scan_report = kvet::scan(profile, index, patch, provider);

    auto report = build_report(opts, cve_id, tree_dir, patch_path, kernel_version, "");
    kvet::ConfigFragment base;
    if (!base_path.empty())
        base = kvet::ConfigFragment::parse(read_file(base_path));
    auto merged = kvet::merge_fragment(base, report);

    std::filesystem::create_directories(out_dir);
    std::string fragment_path = out_dir + "/" + cve_id + ".config";
    write_file(fragment_path, merged.fragment.render());
    // the manifest's merge step runs from inside the source tree, so the
    // fragment must be addressed absolutely
    std::string manifest = kvet::emit_plan(merged.fragment, profile, scan_report,
                                           std::filesystem::absolute(fragment_path).string());
    write_file(out_dir + "/" + cve_id + ".plan.json", manifest);
    write_file(out_dir + "/" + cve_id + ".plan.sh", kvet::plan_shell_script(manifest));

    if (opts.format == "json")
        std::cout << manifest;
    else
        std::cout << "plan written to " << out_dir << "/" << cve_id << ".plan.json\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel CVE triage: patch-presence version checks and Kconfig analysis"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags are accepted after the subcommand too

    GlobalOptions opts;
    if (const char* env = std::getenv("KVET_STORE"))
        opts.store_dir = env;
    if (const char* env = std::getenv("KVET_CACHE"))
        opts.cache_dir = env;

    app.add_option("--store", opts.store_dir, "profile store root");
    app.add_option("--cache", opts.cache_dir, "cache directory (patches, per-version files)");
    app.add_option("--releases", opts.releases_path, "release list file (one version per line)");
    app.add_option("--srcarch", opts.srcarch, "SRCARCH value for Kconfig source paths");
    app.add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"json", "table", "csv"}));
    app.add_flag("--offline,!--online", opts.offline, "forbid network access (default: offline)");
    app.add_option("--jobs", opts.jobs, "parallel scan workers (0 = logical cores)");
    app.add_flag("-v,--verbose", opts.verbose, "verbose diagnostics");

    std::vector<std::string> import_inputs;
    std::string vendor_file;
    auto* import = app.add_subcommand("import", "import NVD-style feed files into the store");
    import->add_option("inputs", import_inputs, "feed files")->required();
    import->add_option("--vendor-patches", vendor_file, "vendor patch map: <cve_id> <sha> lines");

    std::string cv_cve, cv_patch, cv_out;
    auto* check = app.add_subcommand("check-version", "find the real vulnerable version");
    check->add_option("cve_id", cv_cve)->required();
    check->add_option("--patch", cv_patch, "patch file (overrides the cache)");
    check->add_option("--out", cv_out, "write the JSON report here");

    std::string cf_cve, cf_tree, cf_kernel, cf_patch, cf_hints, cf_fragment, cf_base, cf_out;
    auto* configs = app.add_subcommand("configs", "identify configs required by a CVE");
    configs->add_option("cve_id", cf_cve)->required();
    configs->add_option("--tree", cf_tree, "kernel source tree root")->required();
    configs->add_option("--kernel", cf_kernel, "kernel version label for the report");
    configs->add_option("--patch", cf_patch, "patch file (overrides the cache)");
    configs->add_option("--hints", cf_hints, "extra curated hint table");
    configs->add_option("--emit-fragment", cf_fragment, "write the merged config fragment here");
    configs->add_option("--base", cf_base, "baseline fragment to merge over");
    configs->add_option("--out", cf_out, "write the JSON report here");

    bool scan_all_flag = false;
    std::string sf_out;
    auto* scan_fp = app.add_subcommand("scan-fp", "audit every stored CVE for spurious claims");
    scan_fp->add_flag("--all", scan_all_flag, "scan the whole store");
    scan_fp->add_option("--out", sf_out, "write the report here");

    std::string g_tree, g_dot, g_focus, g_patch, g_kernel;
    auto* graph = app.add_subcommand("graph", "export the Kconfig graph as DOT");
    graph->add_option("--tree", g_tree, "kernel source tree root")->required();
    graph->add_option("--dot", g_dot, "output DOT path")->required();
    graph->add_option("--focus", g_focus, "restrict to one CVE's identified configs");
    graph->add_option("--patch", g_patch, "patch file for --focus");
    graph->add_option("--kernel", g_kernel, "kernel version label");

    std::string p_cve, p_tree, p_kernel, p_patch, p_base, p_out_dir = "plan";
    auto* plan = app.add_subcommand("plan", "emit a build plan for reproducing a CVE");
    plan->add_option("cve_id", p_cve)->required();
    plan->add_option("--tree", p_tree, "kernel source tree root")->required();
    plan->add_option("--kernel", p_kernel, "kernel version label");
    plan->add_option("--patch", p_patch, "patch file (overrides the cache)");
    plan->add_option("--base", p_base, "baseline fragment (defconfig-style)");
    plan->add_option("--out-dir", p_out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (import->parsed())
            return cmd_import(opts, import_inputs, vendor_file);
        if (check->parsed())
            return cmd_check_version(opts, cv_cve, cv_patch, cv_out);
        if (configs->parsed())
            return cmd_configs(opts, cf_cve, cf_tree, cf_kernel, cf_patch, cf_hints, cf_fragment,
                               cf_base, cf_out);
        if (scan_fp->parsed())
            return cmd_scan_fp(opts, sf_out);
        if (graph->parsed())
            return cmd_graph(opts, g_tree, g_dot, g_focus, g_patch, g_kernel);
        if (plan->parsed())
            return cmd_plan(opts, p_cve, p_tree, p_kernel, p_patch, p_base, p_out_dir);
    } catch (const kvet::Error& e) {
        if (opts.format == "json") {
            ordered_json j;
            j["schema"] = 1;
            j["error"] = e.what();
            std::cout << j.dump(2) << "\n";
        } else {
            std::cerr << "error: " << e.what() << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
