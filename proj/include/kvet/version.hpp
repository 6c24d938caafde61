#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kvet {

/// An upstream kernel release version: 2 to 4 dot-separated numeric
/// components. Ordering pads missing trailing components with zeros, so
/// 5.12 < 5.12.1 and 5.12 == 5.12.0.
struct KernelVersion {
    std::vector<int> components;
    std::string raw;

    // Accepts "5.11.14" or "v5.11.14"; rejects anything that is not a
    // plain dotted-numeric version (rc tags, distro suffixes, ...).
    static std::optional<KernelVersion> parse(std::string_view text);

    std::string str() const { return raw; }

    int component(size_t i) const {
        return i < components.size() ? components[i] : 0;
    }

    // (major, minor) stable-series key. 2.6.x.y branches as (2,6).
    std::pair<int, int> branch() const { return {component(0), component(1)}; }

    friend std::strong_ordering operator<=>(const KernelVersion& a, const KernelVersion& b);
    friend bool operator==(const KernelVersion& a, const KernelVersion& b) {
        return (a <=> b) == std::strong_ordering::equal;
    }
};

/// A half-open-or-closed interval of kernel versions. Absent bounds mean
/// unbounded on that side.
struct VersionRange {
    std::optional<KernelVersion> lower;
    bool lower_inclusive = true;
    std::optional<KernelVersion> upper;
    bool upper_inclusive = true;

    bool contains(const KernelVersion& v) const;
    std::string str() const;
};

// Sorts ranges and merges overlapping/duplicate ones so that the result
// is non-overlapping and deterministic.
std::vector<VersionRange> normalize_ranges(std::vector<VersionRange> ranges);

} // namespace kvet
