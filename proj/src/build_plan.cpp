#include "kvet/build_plan.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace kvet {

namespace {

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

ConfigFragment ConfigFragment::parse(std::string_view text) {
    ConfigFragment frag;
    std::map<std::string, size_t> index;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        line = trim_view(line);
        if (line.empty())
            continue;

        Entry entry;
        if (line.front() == '#') {
            // "# CONFIG_X is not set"
            std::string_view body = trim_view(line.substr(1));
            if (!body.starts_with("CONFIG_") || !body.ends_with(" is not set"))
                continue;
            entry.symbol = std::string(body.substr(7, body.size() - 7 - 11));
            entry.value = "n";
            entry.not_set_form = true;
        } else if (line.starts_with("CONFIG_")) {
            size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                continue;
            entry.symbol = std::string(line.substr(7, eq - 7));
            entry.value = std::string(line.substr(eq + 1));
        } else {
            continue;
        }
        entry.source = "base";
        if (auto it = index.find(entry.symbol); it != index.end()) {
            frag.entries[it->second] = std::move(entry); // later line overrides
        } else {
            index[entry.symbol] = frag.entries.size();
            frag.entries.push_back(std::move(entry));
        }
    }
    return frag;
}

std::string ConfigFragment::render() const {
    std::string out;
    for (const auto& e : entries) {
        if (e.not_set_form && e.value == "n")
            out += "# CONFIG_" + e.symbol + " is not set\n";
        else
            out += "CONFIG_" + e.symbol + "=" + e.value + "\n";
    }
    return out;
}

const ConfigFragment::Entry* ConfigFragment::find(const std::string& symbol) const {
    for (const auto& e : entries)
        if (e.symbol == symbol)
            return &e;
    return nullptr;
}

namespace {

bool is_typed_value(const std::string& value) {
    return value != "y" && value != "m" && value != "n";
}

} // namespace

MergeOutcome merge_fragment(const ConfigFragment& base, const ConfigReport& report) {
    MergeOutcome out;
    out.fragment = base;

    std::map<std::string, size_t> index;
    for (size_t i = 0; i < out.fragment.entries.size(); ++i)
        index[out.fragment.entries[i].symbol] = i;

    std::vector<std::string> appended;
    for (const auto& symbol : report.union_s) {
        auto it = index.find(symbol);
        if (it == index.end()) {
            appended.push_back(symbol);
            continue;
        }
        auto& entry = out.fragment.entries[it->second];
        if (entry.value == "y")
            continue;
        if (is_typed_value(entry.value))
            out.conflicts.push_back(symbol + " had value " + entry.value + ", forced to y");
        entry.value = "y";
        entry.not_set_form = false;
        entry.source = "report-override";
    }
    std::sort(appended.begin(), appended.end());
    for (auto& symbol : appended)
        out.fragment.entries.push_back({symbol, "y", false, "report"});
    return out;
}

std::string emit_plan(const ConfigFragment& fragment, const VulnProfile& profile,
                      const VersionScanReport& scan_report, const std::string& fragment_path) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["cve_id"] = profile.cve_id;
    bool actionable = scan_report.vulnerable_version.has_value();
    j["actionable"] = actionable;
    j["kernel_version"] =
        actionable ? nlohmann::json(scan_report.vulnerable_version->str()) : nlohmann::json(nullptr);
    j["fragment_path"] = fragment_path;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& e : fragment.entries)
        entries.push_back({{"symbol", e.symbol}, {"value", e.value}, {"source", e.source}});
    j["fragment"] = entries;

    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    if (actionable) {
        const std::string version = scan_report.vulnerable_version->str();
        const std::string major = std::to_string(scan_report.vulnerable_version->component(0));
        steps.push_back(
            {{"name", "fetch"},
             {"cmd", "curl -LO https://cdn.kernel.org/pub/linux/kernel/v" + major +
                         ".x/linux-" + version + ".tar.xz"}});
        steps.push_back({{"name", "extract"}, {"cmd", "tar -xf linux-" + version + ".tar.xz"}});
        steps.push_back({{"name", "defconfig"},
                         {"cmd", "make -C linux-" + version + " defconfig"}});
        // subshell so the working directory survives for the next steps
        steps.push_back({{"name", "merge-fragment"},
                         {"cmd", "(cd linux-" + version +
                                     " && scripts/kconfig/merge_config.sh -m .config " +
                                     fragment_path + ")"}});
        steps.push_back({{"name", "olddefconfig"},
                         {"cmd", "make -C linux-" + version + " olddefconfig"}});
        steps.push_back({{"name", "build"},
                         {"cmd", "make -C linux-" + version + " -j\"$(nproc)\""}});
    } else {
        j["note"] = "no vulnerable version identified; plan is not actionable";
    }
    j["steps"] = steps;
    return j.dump(2) + "\n";
}

std::string plan_shell_script(const std::string& manifest_json) {
    auto j = nlohmann::json::parse(manifest_json);
    std::ostringstream os;
    os << "#!/bin/sh\n";
    os << "# build plan for " << j.value("cve_id", "") << "\n";
    os << "set -eu\n";
    if (!j.value("actionable", false)) {
        os << "echo 'plan is not actionable: no vulnerable version identified' >&2\n";
        os << "exit 1\n";
        return os.str();
    }
    for (const auto& step : j["steps"])
        os << step.value("cmd", "") << "\n";
    return os.str();
}

} // namespace kvet
