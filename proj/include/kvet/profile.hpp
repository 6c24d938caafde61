#pragma once

#include "kvet/errors.hpp"
#include "kvet/version.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kvet {

/// One CVE's assembled profile: description, claimed vulnerable ranges,
/// patch commits and references. Immutable value once built.
struct VulnProfile {
    std::string cve_id;
    std::string description;
    std::vector<VersionRange> claimed_ranges; // non-overlapping, sorted
    std::optional<double> cvss;
    std::vector<std::string> cwe_ids;
    std::vector<std::string> patch_commits; // 40-char lowercase hex, sorted
    std::vector<std::string> references;
    std::string fetched_at; // ISO-8601 UTC, taken from the feed record

    bool operator==(const VulnProfile&) const;
};

struct ImportResult {
    VulnProfile profile;
    std::vector<std::string> warnings; // dropped CPE ranges etc.
};

// Normalizes one NVD-style JSON record (an API 2.0 `cve` object or a
// {"cve": {...}} wrapper). Only the upstream linux_kernel product's CPE
// entries contribute version ranges; unparsable version tokens drop the
// offending range with a warning. Throws MalformedFeed when no id.
ImportResult import_nvd_record(const std::string& raw_json);

struct VendorPatchRecord {
    std::string cve_id;
    std::string commit_id;
};

// Parses lines of "<cve_id> <commit_sha>"; '#' comments and blanks skipped.
std::vector<VendorPatchRecord> parse_vendor_patch_file(std::string_view text);

// Deduplicated union of the profile's commits and the vendor-supplied
// ones, sorted. Throws CveMismatch when a record names another CVE.
VulnProfile merge_vendor_patches(VulnProfile profile,
                                 const std::vector<VendorPatchRecord>& vendor_docs);

std::string to_json(const VulnProfile& profile); // canonical, key-sorted
VulnProfile profile_from_json(const std::string& text);

/// One JSON document per CVE under <root>/profiles/. Readers are safe
/// against concurrent writers; writers take a per-CVE advisory lock and
/// publish atomically (write temp + rename).
class ProfileStore {
public:
    explicit ProfileStore(std::filesystem::path root);

    void save(const VulnProfile& profile) const;
    VulnProfile load(const std::string& cve_id) const; // throws NotFound
    bool contains(const std::string& cve_id) const;
    std::vector<std::string> list() const; // sorted cve ids

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path profile_path(const std::string& cve_id) const;

private:
    std::filesystem::path root_;
};

bool valid_cve_id(std::string_view id);

} // namespace kvet
