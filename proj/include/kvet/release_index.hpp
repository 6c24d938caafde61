#pragma once

#include "kvet/version.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace kvet {

using Branch = std::pair<int, int>; // (major, minor)

std::string branch_str(Branch b);

/// Ordered catalogue of upstream release versions, grouped into stable
/// branches by (major, minor). Immutable after construction.
class ReleaseIndex {
public:
    ReleaseIndex() = default;

    // One version per line; blank lines and '#' comments skipped,
    // release-candidate tags and unparsable lines dropped with a warning.
    static ReleaseIndex from_text(std::string_view text);
    static ReleaseIndex from_file(const std::string& path);
    static ReleaseIndex from_versions(std::vector<KernelVersion> versions);

    const std::vector<KernelVersion>& versions() const { return versions_; }
    const std::map<Branch, std::vector<KernelVersion>>& branches() const { return branches_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    bool empty() const { return versions_.empty(); }
    size_t size() const { return versions_.size(); }
    bool contains(const KernelVersion& v) const;

    // Immediate predecessor of v within v's stable branch, if any.
    std::optional<KernelVersion> branch_predecessor(const KernelVersion& v) const;

private:
    std::vector<KernelVersion> versions_;               // strictly increasing
    std::map<Branch, std::vector<KernelVersion>> branches_; // each sorted ascending
    std::vector<std::string> warnings_;
};

// Every indexed version inside the range, sorted ascending. Always a
// contiguous slice of the index.
std::vector<KernelVersion> resolve_range(const ReleaseIndex& index, const VersionRange& range);

// Groups an ascending version list per stable branch; each group is
// returned descending (upper boundary first) and branches are ordered
// newest first. Throws BadArgument if the input is not sorted ascending.
std::vector<std::pair<Branch, std::vector<KernelVersion>>>
partition_by_branch(std::span<const KernelVersion> versions);

} // namespace kvet
