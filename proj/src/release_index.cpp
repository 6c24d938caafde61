#include "kvet/release_index.hpp"

#include "kvet/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kvet {

std::string branch_str(Branch b) {
    return std::to_string(b.first) + "." + std::to_string(b.second);
}

ReleaseIndex ReleaseIndex::from_text(std::string_view text) {
    std::vector<KernelVersion> versions;
    std::vector<std::string> warnings;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.remove_suffix(1);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
            line.remove_prefix(1);
        if (line.empty() || line.front() == '#')
            continue;
        if (line.find("-rc") != std::string_view::npos)
            continue; // rc tags are not indexed
        auto v = KernelVersion::parse(line);
        if (!v) {
            warnings.push_back("unparsable release line: " + std::string(line));
            continue;
        }
        versions.push_back(std::move(*v));
    }
    auto idx = from_versions(std::move(versions));
    idx.warnings_.insert(idx.warnings_.begin(), warnings.begin(), warnings.end());
    return idx;
}

ReleaseIndex ReleaseIndex::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoFailure, "cannot read release list: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

ReleaseIndex ReleaseIndex::from_versions(std::vector<KernelVersion> versions) {
    std::sort(versions.begin(), versions.end());
    versions.erase(std::unique(versions.begin(), versions.end()), versions.end());
    ReleaseIndex idx;
    for (auto& v : versions)
        idx.branches_[v.branch()].push_back(v);
    idx.versions_ = std::move(versions);
    return idx;
}

bool ReleaseIndex::contains(const KernelVersion& v) const {
    return std::binary_search(versions_.begin(), versions_.end(), v);
}

std::optional<KernelVersion> ReleaseIndex::branch_predecessor(const KernelVersion& v) const {
    auto it = branches_.find(v.branch());
    if (it == branches_.end())
        return std::nullopt;
    const auto& seq = it->second;
    auto lo = std::lower_bound(seq.begin(), seq.end(), v);
    if (lo == seq.begin())
        return std::nullopt;
    return *(lo - 1);
}

std::vector<KernelVersion> resolve_range(const ReleaseIndex& index, const VersionRange& range) {
    const auto& all = index.versions();
    auto first = all.begin();
    auto last = all.end();
    if (range.lower) {
        first = range.lower_inclusive ? std::lower_bound(all.begin(), all.end(), *range.lower)
                                      : std::upper_bound(all.begin(), all.end(), *range.lower);
    }
    if (range.upper) {
        last = range.upper_inclusive ? std::upper_bound(all.begin(), all.end(), *range.upper)
                                     : std::lower_bound(all.begin(), all.end(), *range.upper);
    }
    if (first >= last)
        return {};
    return {first, last};
}

std::vector<std::pair<Branch, std::vector<KernelVersion>>>
partition_by_branch(std::span<const KernelVersion> versions) {
    for (size_t i = 1; i < versions.size(); ++i) {
        if (versions[i] < versions[i - 1])
            throw Error(Errc::BadArgument, "partition_by_branch requires ascending input");
    }
    std::map<Branch, std::vector<KernelVersion>> groups;
    for (const auto& v : versions)
        groups[v.branch()].push_back(v);
    std::vector<std::pair<Branch, std::vector<KernelVersion>>> out;
    for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
        std::reverse(it->second.begin(), it->second.end());
        out.emplace_back(it->first, std::move(it->second));
    }
    return out;
}

} // namespace kvet
