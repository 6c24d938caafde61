#include "kvet/profile.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fcntl.h>
#include <fstream>
#include <set>
#include <sys/file.h>
#include <unistd.h>

using nlohmann::json;

namespace kvet {

bool valid_cve_id(std::string_view id) {
    // CVE-<4 digits>-<4+ digits>
    if (id.size() < 13 || id.substr(0, 4) != "CVE-" || id[8] != '-')
        return false;
    for (size_t i = 4; i < 8; ++i)
        if (!std::isdigit(static_cast<unsigned char>(id[i])))
            return false;
    for (size_t i = 9; i < id.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(id[i])))
            return false;
    return true;
}

namespace {

// Commit ids referenced from git web UIs (…/commit/?id=<sha>,
// …/stable/c/<sha>, …): any 40-hex run bounded by non-hex characters.
std::optional<std::string> commit_from_url(const std::string& url) {
    auto hex = [](unsigned char c) {
        return std::isdigit(c) || (c >= 'a' && c <= 'f');
    };
    size_t i = 0;
    while (i < url.size()) {
        if (!hex(url[i])) {
            ++i;
            continue;
        }
        size_t begin = i;
        while (i < url.size() && hex(url[i]))
            ++i;
        if (i - begin == 40)
            return url.substr(begin, 40);
    }
    return std::nullopt;
}

bool cpe_is_linux_kernel(const std::string& criteria) {
    // cpe:2.3:part:vendor:product:version:...
    size_t pos = 0;
    int field = 0;
    std::string product;
    while (field < 5 && pos != std::string::npos) {
        size_t next = criteria.find(':', pos);
        if (field == 4)
            product = criteria.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        pos = next == std::string::npos ? std::string::npos : next + 1;
        ++field;
    }
    return product == "linux_kernel";
}

std::string cpe_version_field(const std::string& criteria) {
    size_t pos = 0;
    int field = 0;
    while (pos != std::string::npos) {
        size_t next = criteria.find(':', pos);
        if (field == 5)
            return criteria.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        pos = next == std::string::npos ? std::string::npos : next + 1;
        ++field;
    }
    return "*";
}

void collect_cpe_ranges(const json& node, std::vector<VersionRange>& ranges,
                        std::vector<std::string>& warnings) {
    if (node.contains("cpeMatch")) {
        for (const auto& m : node["cpeMatch"]) {
            if (!m.value("vulnerable", true))
                continue;
            std::string criteria = m.value("criteria", m.value("cpe23Uri", ""));
            if (!cpe_is_linux_kernel(criteria))
                continue;

            VersionRange r;
            bool bad = false, any_bound = false;
            auto take = [&](const char* key, std::optional<KernelVersion>& slot, bool& inclusive,
                            bool inc) {
                if (!m.contains(key))
                    return;
                any_bound = true;
                std::string tok = m[key].get<std::string>();
                auto v = KernelVersion::parse(tok);
                if (!v) {
                    warnings.push_back(std::string("dropped range, unparsable ") + key + ": " + tok);
                    bad = true;
                    return;
                }
                slot = *v;
                inclusive = inc;
            };
            take("versionStartIncluding", r.lower, r.lower_inclusive, true);
            take("versionStartExcluding", r.lower, r.lower_inclusive, false);
            take("versionEndIncluding", r.upper, r.upper_inclusive, true);
            take("versionEndExcluding", r.upper, r.upper_inclusive, false);
            if (bad)
                continue;
            if (!any_bound) {
                std::string vfield = cpe_version_field(criteria);
                if (vfield == "*" || vfield == "-")
                    continue; // wildcard CPE without bounds claims nothing useful
                auto v = KernelVersion::parse(vfield);
                if (!v) {
                    warnings.push_back("dropped range, unparsable CPE version: " + vfield);
                    continue;
                }
                r.lower = *v;
                r.upper = *v;
                r.lower_inclusive = r.upper_inclusive = true;
            }
            ranges.push_back(std::move(r));
        }
    }
    if (node.contains("nodes"))
        for (const auto& child : node["nodes"])
            collect_cpe_ranges(child, ranges, warnings);
    if (node.contains("children"))
        for (const auto& child : node["children"])
            collect_cpe_ranges(child, ranges, warnings);
}

} // namespace

bool VulnProfile::operator==(const VulnProfile& other) const {
    auto key = [](const VulnProfile& p) {
        return std::tuple(p.cve_id, p.description, p.cvss, p.cwe_ids, p.patch_commits,
                          p.references, p.fetched_at);
    };
    if (key(*this) != key(other))
        return false;
    if (claimed_ranges.size() != other.claimed_ranges.size())
        return false;
    for (size_t i = 0; i < claimed_ranges.size(); ++i)
        if (claimed_ranges[i].str() != other.claimed_ranges[i].str())
            return false;
    return true;
}

ImportResult import_nvd_record(const std::string& raw_json) {
    json doc;
    try {
        doc = json::parse(raw_json);
    } catch (const json::exception& e) {
        throw Error(Errc::MalformedFeed, e.what());
    }
    if (doc.contains("cve"))
        doc = doc["cve"];

    ImportResult out;
    VulnProfile& p = out.profile;
    p.cve_id = doc.value("id", doc.value("ID", ""));
    if (!valid_cve_id(p.cve_id))
        throw Error(Errc::MalformedFeed, "record has no valid CVE id");

    if (doc.contains("descriptions")) {
        for (const auto& d : doc["descriptions"]) {
            if (d.value("lang", "") != "en")
                continue;
            if (!p.description.empty())
                p.description += "\n";
            p.description += d.value("value", "");
        }
    }
    if (doc.contains("metrics") && doc["metrics"].contains("cvssMetricV31")) {
        const auto& arr = doc["metrics"]["cvssMetricV31"];
        if (arr.is_array() && !arr.empty()) {
            const auto& data = arr[0].contains("cvssData") ? arr[0]["cvssData"] : arr[0];
            if (data.contains("baseScore"))
                p.cvss = data["baseScore"].get<double>();
        }
    }
    if (doc.contains("weaknesses")) {
        std::set<std::string> cwes;
        for (const auto& w : doc["weaknesses"])
            for (const auto& d : w.value("description", json::array()))
                if (std::string v = d.value("value", ""); v.rfind("CWE-", 0) == 0)
                    cwes.insert(v);
        p.cwe_ids.assign(cwes.begin(), cwes.end());
    }
    std::set<std::string> commits;
    if (doc.contains("references")) {
        for (const auto& r : doc["references"]) {
            std::string url = r.is_string() ? r.get<std::string>() : r.value("url", "");
            if (url.empty())
                continue;
            p.references.push_back(url);
            if (auto sha = commit_from_url(url))
                commits.insert(*sha);
        }
    }
    p.patch_commits.assign(commits.begin(), commits.end());

    std::vector<VersionRange> ranges;
    if (doc.contains("configurations")) {
        const auto& conf = doc["configurations"];
        if (conf.is_array()) {
            for (const auto& c : conf)
                collect_cpe_ranges(c, ranges, out.warnings);
        } else {
            collect_cpe_ranges(conf, ranges, out.warnings);
        }
    }
    p.claimed_ranges = normalize_ranges(std::move(ranges));
    p.fetched_at = doc.value("lastModified", doc.value("published", ""));
    return out;
}

std::vector<VendorPatchRecord> parse_vendor_patch_file(std::string_view text) {
    std::vector<VendorPatchRecord> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;
        size_t sp = line.find(' ');
        if (sp == std::string_view::npos)
            continue;
        out.push_back({std::string(line.substr(0, sp)), std::string(line.substr(sp + 1))});
    }
    return out;
}

VulnProfile merge_vendor_patches(VulnProfile profile,
                                 const std::vector<VendorPatchRecord>& vendor_docs) {
    std::set<std::string> commits(profile.patch_commits.begin(), profile.patch_commits.end());
    for (const auto& rec : vendor_docs) {
        if (rec.cve_id != profile.cve_id)
            throw Error(Errc::CveMismatch,
                        "vendor record for " + rec.cve_id + " applied to " + profile.cve_id);
        commits.insert(rec.commit_id);
    }
    profile.patch_commits.assign(commits.begin(), commits.end());
    return profile;
}

namespace {

json range_to_json(const VersionRange& r) {
    json j = json::object();
    if (r.lower) {
        j["lower"] = r.lower->str();
        j["lower_inclusive"] = r.lower_inclusive;
    }
    if (r.upper) {
        j["upper"] = r.upper->str();
        j["upper_inclusive"] = r.upper_inclusive;
    }
    return j;
}

VersionRange range_from_json(const json& j) {
    VersionRange r;
    if (j.contains("lower")) {
        r.lower = KernelVersion::parse(j["lower"].get<std::string>());
        r.lower_inclusive = j.value("lower_inclusive", true);
    }
    if (j.contains("upper")) {
        r.upper = KernelVersion::parse(j["upper"].get<std::string>());
        r.upper_inclusive = j.value("upper_inclusive", true);
    }
    return r;
}

} // namespace

std::string to_json(const VulnProfile& p) {
    json j;
    j["schema"] = 1;
    j["cve_id"] = p.cve_id;
    j["description"] = p.description;
    j["claimed_ranges"] = json::array();
    for (const auto& r : p.claimed_ranges)
        j["claimed_ranges"].push_back(range_to_json(r));
    if (p.cvss)
        j["cvss"] = *p.cvss;
    j["cwe_ids"] = p.cwe_ids;
    j["patch_commits"] = p.patch_commits;
    j["references"] = p.references;
    j["fetched_at"] = p.fetched_at;
    return j.dump(2) + "\n";
}

VulnProfile profile_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::IoFailure, std::string("bad profile document: ") + e.what());
    }
    VulnProfile p;
    p.cve_id = j.value("cve_id", "");
    p.description = j.value("description", "");
    for (const auto& r : j.value("claimed_ranges", json::array()))
        p.claimed_ranges.push_back(range_from_json(r));
    if (j.contains("cvss"))
        p.cvss = j["cvss"].get<double>();
    p.cwe_ids = j.value("cwe_ids", std::vector<std::string>{});
    p.patch_commits = j.value("patch_commits", std::vector<std::string>{});
    p.references = j.value("references", std::vector<std::string>{});
    p.fetched_at = j.value("fetched_at", "");
    return p;
}

ProfileStore::ProfileStore(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_ / "profiles", ec);
    if (ec)
        throw Error(Errc::IoFailure, "cannot create store at " + root_.string());
}

std::filesystem::path ProfileStore::profile_path(const std::string& cve_id) const {
    return root_ / "profiles" / (cve_id + ".json");
}

namespace {

// RAII advisory flock on <path>; serializes writers per CVE across
// processes, readers never block (they see either old or new document
// thanks to the rename).
class FileLock {
public:
    explicit FileLock(const std::filesystem::path& path) {
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ >= 0)
            ::flock(fd_, LOCK_EX);
    }
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

private:
    int fd_ = -1;
};

} // namespace

void ProfileStore::save(const VulnProfile& profile) const {
    if (!valid_cve_id(profile.cve_id))
        throw Error(Errc::BadArgument, "refusing to save profile with bad id: " + profile.cve_id);
    auto path = profile_path(profile.cve_id);
    FileLock lock(path.string() + ".lock");
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(Errc::IoFailure, "cannot write " + tmp.string());
        out << to_json(profile);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error(Errc::IoFailure, "cannot publish " + path.string());
}

VulnProfile ProfileStore::load(const std::string& cve_id) const {
    auto path = profile_path(cve_id);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::NotFound, cve_id);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return profile_from_json(text);
}

bool ProfileStore::contains(const std::string& cve_id) const {
    std::error_code ec;
    return std::filesystem::is_regular_file(profile_path(cve_id), ec);
}

std::vector<std::string> ProfileStore::list() const {
    std::vector<std::string> ids;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(root_ / "profiles", ec)) {
        if (!entry.is_regular_file())
            continue;
        auto name = entry.path().filename().string();
        if (name.size() > 5 && name.ends_with(".json"))
            ids.push_back(name.substr(0, name.size() - 5));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace kvet
