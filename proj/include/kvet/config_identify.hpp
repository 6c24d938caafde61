#pragma once

#include "kvet/kconfig.hpp"
#include "kvet/patch.hpp"
#include "kvet/profile.hpp"
#include "kvet/source_analysis.hpp"
#include "kvet/source_tree.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace kvet {

/// The six identified config categories and their union. Hidden sets are
/// disjoint from the direct seeds by construction; union_s is the
/// authoritative result.
struct ConfigReport {
    std::string cve_id;
    std::string kernel_version;
    std::set<std::string> ddc;
    std::set<std::string> dpc;
    std::set<std::string> dcc;
    std::set<std::string> hrc;
    std::set<std::string> hsc;
    std::set<std::string> hdc;
    std::set<std::string> union_s;
    std::pair<size_t, size_t> graph_stats{0, 0}; // (vertices, edges)
    std::vector<std::string> affected_files;
    std::vector<std::string> warnings;
    std::vector<std::string> essential_hints; // filled by minimal_hint
    bool empty_direct_set = false;

    std::set<std::string> direct() const;
};

// Runs the full identification pipeline over a vulnerable tree and its
// Kconfig graph: direct configs from description/Makefiles/#ifdef
// regions, then hidden configs from graph reachability and the one-hop
// inverse select/depend queries. An empty direct set yields an empty
// report with a diagnostic, not an error.
ConfigReport get_vul_configs(const VulnProfile& profile, const Patch& patch,
                             const SourceTree& tree, const KconfigGraph& graph,
                             const std::string& kernel_version = "");

/// Curated table of configs known to be essential for specific CVEs.
using HintTable = std::map<std::string, std::set<std::string>>;

// Built-in annotations for netfilter-subsystem CVEs whose minimal config
// needs are documented.
const HintTable& builtin_hint_table();

// Lines of "<cve_id> <SYMBOL> [SYMBOL...]"; '#' comments skipped.
HintTable parse_hint_table(std::string_view text);

// Flags report symbols that the table lists as essential for the CVE.
// Pure annotation: the config sets are unchanged.
ConfigReport minimal_hint(ConfigReport report, const HintTable& table);

// Stable JSON rendering: categories in fixed order, symbols sorted.
std::string report_to_json(const ConfigReport& report);

} // namespace kvet
