#pragma once

#include "kvet/patch.hpp"
#include "kvet/profile.hpp"
#include "kvet/release_index.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kvet {

/// Supplies file contents per (version, relative path). Must be
/// deterministic for a fixed pair; only patch-affected files are ever
/// requested.
using FileProvider =
    std::function<std::optional<std::string>(const KernelVersion&, const std::string&)>;

// Reads <cache_dir>/trees/<version>/<path>.
FileProvider make_cache_provider(std::filesystem::path cache_dir);

struct VersionScanReport {
    std::string cve_id;
    std::optional<KernelVersion> vulnerable_version;
    std::vector<KernelVersion> fp_versions; // ascending; claimed but already patched
    std::vector<KernelVersion> indeterminate_versions;

    struct VerdictEntry {
        KernelVersion version;
        PresenceResult::State state;
    };
    std::vector<VerdictEntry> per_version_verdicts; // scan order
    std::vector<std::string> warnings;
    // lower boundary reached with every version patched: the claim may be
    // entirely spurious
    bool all_patched_in_range = false;

    size_t fp_count() const { return fp_versions.size(); }
};

// Walks each claimed range per stable branch from the upper boundary
// downwards, classifying patch presence per version. Patched versions
// are false positives; the first Vulnerable version stops that branch,
// and the highest one across branches is the real vulnerable version.
// Indeterminate versions are logged and skipped. Throws
// NoVersionsInRange / ProviderFailure.
VersionScanReport scan(const VulnProfile& profile, const ReleaseIndex& index, const Patch& patch,
                       const FileProvider& provider);

using PatchSource = std::function<Patch(const VulnProfile&)>; // throws NoPatch

struct FpAudit {
    std::vector<VersionScanReport> reports;                  // ordered by cve_id
    std::vector<std::pair<std::string, std::string>> errors; // (cve_id, message)
    size_t flagged_cves = 0;                                 // fp_count > 0
    size_t total_fp_versions = 0;
    double mean_fp_per_flagged = 0.0;
};

// Scans every stored profile; individual failures are recorded, not
// fatal. jobs == 0 uses the hardware concurrency.
FpAudit scan_all(const ProfileStore& store, const ReleaseIndex& index,
                 const PatchSource& patch_source, const FileProvider& provider,
                 unsigned jobs = 0);

// Contiguous runs of fp versions relative to the release index, per
// branch, ascending.
std::vector<std::pair<KernelVersion, KernelVersion>> fp_ranges(const VersionScanReport& report,
                                                               const ReleaseIndex& index);

std::string scan_report_to_json(const VersionScanReport& report);
std::string fp_audit_to_json(const FpAudit& audit);
// CSV columns: cve, cvss, fp_range, vulnerable_version, fp_count
std::string fp_audit_to_csv(const FpAudit& audit, const ProfileStore& store,
                            const ReleaseIndex& index);

} // namespace kvet
