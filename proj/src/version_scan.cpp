#include "kvet/version_scan.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace kvet {

FileProvider make_cache_provider(std::filesystem::path cache_dir) {
    return [dir = std::move(cache_dir)](const KernelVersion& version,
                                        const std::string& path) -> std::optional<std::string> {
        std::filesystem::path full = dir / version.str() / path;
        std::ifstream in(full, std::ios::binary);
        if (!in)
            return std::nullopt;
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
}

namespace {

// SourceTree facade over a FileProvider pinned to one version.
class ProviderTree : public SourceTree {
public:
    ProviderTree(const FileProvider& provider, const KernelVersion& version)
        : provider_(provider), version_(version) {}

    std::optional<std::string> read(const std::string& path) const override {
        try {
            return provider_(version_, path);
        } catch (const std::exception& e) {
            throw Error(Errc::ProviderFailure, version_.str() + ":" + path + ": " + e.what());
        }
    }

private:
    const FileProvider& provider_;
    const KernelVersion& version_;
};

} // namespace

VersionScanReport scan(const VulnProfile& profile, const ReleaseIndex& index, const Patch& patch,
                       const FileProvider& provider) {
    VersionScanReport report;
    report.cve_id = profile.cve_id;

    std::set<KernelVersion> in_range;
    for (const auto& range : profile.claimed_ranges) {
        auto vs = resolve_range(index, range);
        in_range.insert(vs.begin(), vs.end());
    }
    if (in_range.empty())
        throw Error(Errc::NoVersionsInRange, profile.cve_id);

    std::vector<KernelVersion> ascending(in_range.begin(), in_range.end());
    auto branches = partition_by_branch(ascending);

    std::optional<KernelVersion> best_vulnerable;
    for (auto& [branch, descending] : branches) {
        (void)branch;
        bool found_vulnerable = false;
        for (const auto& version : descending) {
            ProviderTree tree(provider, version);
            auto presence = patch_presence(tree, patch);
            report.per_version_verdicts.push_back({version, presence.state});
            if (presence.state == PresenceResult::State::Patched) {
                report.fp_versions.push_back(version);
            } else if (presence.state == PresenceResult::State::Vulnerable) {
                if (!best_vulnerable || version > *best_vulnerable)
                    best_vulnerable = version;
                found_vulnerable = true;
                break; // first vulnerable version ends this branch's descent
            } else {
                report.indeterminate_versions.push_back(version);
                report.warnings.push_back("indeterminate patch presence at " + version.str());
            }
        }
        if (!found_vulnerable && !descending.empty())
            report.warnings.push_back("branch " + branch_str(descending.front().branch()) +
                                      " exhausted without a vulnerable version");
    }
    report.vulnerable_version = best_vulnerable;
    report.all_patched_in_range = !best_vulnerable.has_value();
    std::sort(report.fp_versions.begin(), report.fp_versions.end());
    std::sort(report.indeterminate_versions.begin(), report.indeterminate_versions.end());
    return report;
}

FpAudit scan_all(const ProfileStore& store, const ReleaseIndex& index,
                 const PatchSource& patch_source, const FileProvider& provider, unsigned jobs) {
    FpAudit audit;
    auto ids = store.list();
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, std::max<size_t>(ids.size(), 1));

    struct Slot {
        std::optional<VersionScanReport> report;
        std::optional<std::string> error;
    };
    std::vector<Slot> slots(ids.size());
    std::atomic<size_t> next{0};

    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= ids.size())
                return;
            try {
                VulnProfile profile = store.load(ids[i]);
                Patch patch = patch_source(profile);
                slots[i].report = scan(profile, index, patch, provider);
            } catch (const std::exception& e) {
                slots[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();

    for (size_t i = 0; i < ids.size(); ++i) {
        if (slots[i].report) {
            audit.reports.push_back(std::move(*slots[i].report));
        } else {
            audit.errors.emplace_back(ids[i], slots[i].error.value_or("unknown failure"));
        }
    }
    for (const auto& r : audit.reports) {
        if (r.fp_count() > 0) {
            ++audit.flagged_cves;
            audit.total_fp_versions += r.fp_count();
        }
    }
    audit.mean_fp_per_flagged =
        audit.flagged_cves ? static_cast<double>(audit.total_fp_versions) / audit.flagged_cves : 0.0;
    return audit;
}

std::vector<std::pair<KernelVersion, KernelVersion>> fp_ranges(const VersionScanReport& report,
                                                               const ReleaseIndex& index) {
    std::vector<std::pair<KernelVersion, KernelVersion>> out;
    const auto& all = index.versions();
    for (const auto& v : report.fp_versions) {
        bool adjacent = false;
        if (!out.empty()) {
            auto prev = std::lower_bound(all.begin(), all.end(), out.back().second);
            adjacent = prev != all.end() && (prev + 1) != all.end() && *(prev + 1) == v &&
                       v.branch() == out.back().second.branch();
        }
        if (adjacent)
            out.back().second = v;
        else
            out.emplace_back(v, v);
    }
    return out;
}

namespace {

nlohmann::ordered_json report_json(const VersionScanReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["cve_id"] = report.cve_id;
    j["vulnerable_version"] =
        report.vulnerable_version ? nlohmann::json(report.vulnerable_version->str())
                                  : nlohmann::json(nullptr);
    j["fp_count"] = report.fp_count();
    std::vector<std::string> fps;
    for (const auto& v : report.fp_versions)
        fps.push_back(v.str());
    j["fp_versions"] = fps;
    std::vector<std::string> ind;
    for (const auto& v : report.indeterminate_versions)
        ind.push_back(v.str());
    j["indeterminate_versions"] = ind;
    nlohmann::ordered_json log = nlohmann::ordered_json::array();
    for (const auto& entry : report.per_version_verdicts)
        log.push_back({{"version", entry.version.str()}, {"verdict", to_string(entry.state)}});
    j["per_version_verdicts"] = log;
    j["all_patched_in_range"] = report.all_patched_in_range;
    j["warnings"] = report.warnings;
    return j;
}

} // namespace

std::string scan_report_to_json(const VersionScanReport& report) {
    return report_json(report).dump(2) + "\n";
}

std::string fp_audit_to_json(const FpAudit& audit) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["flagged_cves"] = audit.flagged_cves;
    j["total_fp_versions"] = audit.total_fp_versions;
    j["mean_fp_per_flagged"] = audit.mean_fp_per_flagged;
    nlohmann::ordered_json reports = nlohmann::ordered_json::array();
    for (const auto& r : audit.reports)
        reports.push_back(report_json(r));
    j["reports"] = reports;
    nlohmann::ordered_json errors = nlohmann::ordered_json::array();
    for (const auto& [cve, msg] : audit.errors)
        errors.push_back({{"cve_id", cve}, {"error", msg}});
    j["errors"] = errors;
    return j.dump(2) + "\n";
}

std::string fp_audit_to_csv(const FpAudit& audit, const ProfileStore& store,
                            const ReleaseIndex& index) {
    std::ostringstream os;
    os << "cve,cvss,fp_range,vulnerable_version,fp_count\n";
    for (const auto& r : audit.reports) {
        std::string cvss;
        try {
            auto profile = store.load(r.cve_id);
            if (profile.cvss) {
                std::ostringstream tmp;
                tmp << *profile.cvss;
                cvss = tmp.str();
            }
        } catch (const Error&) {
        }
        std::string ranges;
        for (const auto& [lo, hi] : fp_ranges(r, index)) {
            if (!ranges.empty())
                ranges += "; ";
            ranges += "v" + lo.str() + " -- v" + hi.str();
        }
        os << r.cve_id << ',' << cvss << ',' << '"' << ranges << '"' << ','
           << (r.vulnerable_version ? "v" + r.vulnerable_version->str() : "") << ','
           << r.fp_count() << '\n';
    }
    return os.str();
}

} // namespace kvet
