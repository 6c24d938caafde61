#pragma once

#include "kvet/config_identify.hpp"
#include "kvet/profile.hpp"
#include "kvet/version_scan.hpp"

#include <string>
#include <vector>

namespace kvet {

/// Ordered kernel config fragment. Entries keep the original line form
/// ("CONFIG_X=v" vs "# CONFIG_X is not set") and an annotation recording
/// where the value came from.
struct ConfigFragment {
    struct Entry {
        std::string symbol;
        std::string value; // "y", "m", "n", quoted string or number
        bool not_set_form = false;
        std::string source; // "base", "report", "report-override"

        bool operator==(const Entry& other) const {
            return symbol == other.symbol && value == other.value &&
                   not_set_form == other.not_set_form;
        }
    };

    std::vector<Entry> entries; // unique symbols, stable order

    static ConfigFragment parse(std::string_view text);
    std::string render() const; // exact CONFIG_X=v line format
    const Entry* find(const std::string& symbol) const;

    bool operator==(const ConfigFragment& other) const { return entries == other.entries; }
};

struct MergeOutcome {
    ConfigFragment fragment;
    std::vector<std::string> conflicts; // base held a string/int value
};

// Sets every report symbol to =y, overriding base n/unset values; other
// base lines are preserved in order and new symbols appended sorted.
// Type conflicts are recorded and the report value wins.
MergeOutcome merge_fragment(const ConfigFragment& base, const ConfigReport& report);

// Manifest of the steps a human would run to build the identified
// kernel: fetch, configure with the fragment, compile. Nothing is
// executed. A scan without a vulnerable version yields a non-actionable
// manifest.
std::string emit_plan(const ConfigFragment& fragment, const VulnProfile& profile,
                      const VersionScanReport& scan_report, const std::string& fragment_path);

// POSIX shell rendering of a manifest produced by emit_plan.
std::string plan_shell_script(const std::string& manifest_json);

} // namespace kvet
