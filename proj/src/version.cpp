#include "kvet/version.hpp"

#include <algorithm>
#include <charconv>

namespace kvet {

std::optional<KernelVersion> KernelVersion::parse(std::string_view text) {
    std::string_view body = text;
    if (!body.empty() && (body.front() == 'v' || body.front() == 'V'))
        body.remove_prefix(1);
    if (body.empty())
        return std::nullopt;

    KernelVersion v;
    v.raw.assign(body);
    size_t pos = 0;
    while (pos <= body.size()) {
        size_t dot = body.find('.', pos);
        std::string_view part = body.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
        if (part.empty())
            return std::nullopt;
        int value = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc() || ptr != part.data() + part.size() || value < 0)
            return std::nullopt;
        v.components.push_back(value);
        if (dot == std::string_view::npos)
            break;
        pos = dot + 1;
    }
    if (v.components.size() < 2 || v.components.size() > 4)
        return std::nullopt;
    return v;
}

std::strong_ordering operator<=>(const KernelVersion& a, const KernelVersion& b) {
    size_t n = std::max(a.components.size(), b.components.size());
    for (size_t i = 0; i < n; ++i) {
        if (auto c = a.component(i) <=> b.component(i); c != 0)
            return c;
    }
    return std::strong_ordering::equal;
}

bool VersionRange::contains(const KernelVersion& v) const {
    if (lower) {
        if (lower_inclusive ? v < *lower : v <= *lower)
            return false;
    }
    if (upper) {
        if (upper_inclusive ? v > *upper : v >= *upper)
            return false;
    }
    return true;
}

std::string VersionRange::str() const {
    std::string s;
    s += lower ? (lower_inclusive ? "[" : "(") + lower->str() : "(";
    s += ", ";
    s += upper ? upper->str() + (upper_inclusive ? "]" : ")") : ")";
    return s;
}

namespace {

// Key used to order range bounds; unbounded lower sorts first.
bool lower_before(const VersionRange& a, const VersionRange& b) {
    if (!a.lower || !b.lower)
        return !a.lower && b.lower;
    if (*a.lower != *b.lower)
        return *a.lower < *b.lower;
    return a.lower_inclusive && !b.lower_inclusive;
}

// True when b's lower bound starts at or before a's upper bound, i.e. the
// ranges touch or overlap (assuming lower(a) <= lower(b)).
bool overlaps(const VersionRange& a, const VersionRange& b) {
    if (!a.upper || !b.lower)
        return true;
    if (*b.lower < *a.upper)
        return true;
    if (*b.lower == *a.upper)
        return a.upper_inclusive || b.lower_inclusive;
    return false;
}

// True when b's upper bound extends past a's.
bool upper_extends(const VersionRange& a, const VersionRange& b) {
    if (!a.upper)
        return false;
    if (!b.upper)
        return true;
    if (*b.upper != *a.upper)
        return *b.upper > *a.upper;
    return b.upper_inclusive && !a.upper_inclusive;
}

} // namespace

std::vector<VersionRange> normalize_ranges(std::vector<VersionRange> ranges) {
    std::stable_sort(ranges.begin(), ranges.end(), lower_before);
    std::vector<VersionRange> out;
    for (auto& r : ranges) {
        if (r.lower && r.upper) {
            if (*r.upper < *r.lower)
                continue; // inverted bounds, drop
            if (*r.upper == *r.lower && !(r.lower_inclusive && r.upper_inclusive))
                continue; // empty interval
        }
        if (!out.empty() && overlaps(out.back(), r)) {
            if (upper_extends(out.back(), r)) {
                out.back().upper = r.upper;
                out.back().upper_inclusive = r.upper_inclusive;
            }
            continue;
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace kvet
