#include "kvet/patch.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace kvet {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

bool is_hex40(std::string_view s) {
    if (s.size() != 40)
        return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) || (c >= 'a' && c <= 'f');
    });
}

std::string strip_diff_prefix(std::string_view path) {
    if (starts_with(path, "a/") || starts_with(path, "b/"))
        path.remove_prefix(2);
    return std::string(path);
}

// "--- a/net/netfilter/x_tables.c" -> "net/netfilter/x_tables.c",
// "/dev/null" kept verbatim. A trailing tab-separated timestamp is cut.
std::string parse_marker_path(std::string_view line) {
    std::string_view rest = line.substr(4);
    if (size_t tab = rest.find('\t'); tab != std::string_view::npos)
        rest = rest.substr(0, tab);
    while (!rest.empty() && rest.back() == '\r')
        rest.remove_suffix(1);
    if (rest == "/dev/null")
        return std::string(rest);
    return strip_diff_prefix(rest);
}

struct HunkHeader {
    int old_start, old_count, new_start, new_count;
};

std::optional<HunkHeader> parse_hunk_header(std::string_view line) {
    // @@ -old_start[,old_count] +new_start[,new_count] @@ [section]
    if (!starts_with(line, "@@ -"))
        return std::nullopt;
    size_t pos = 4;
    auto read_int = [&](int& out) -> bool {
        size_t begin = pos;
        while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos])))
            ++pos;
        if (pos == begin)
            return false;
        auto [p, ec] = std::from_chars(line.data() + begin, line.data() + pos, out);
        return ec == std::errc() && p == line.data() + pos;
    };
    HunkHeader h{0, 1, 0, 1};
    if (!read_int(h.old_start))
        return std::nullopt;
    if (pos < line.size() && line[pos] == ',') {
        ++pos;
        if (!read_int(h.old_count))
            return std::nullopt;
    }
    if (pos + 1 >= line.size() || line[pos] != ' ' || line[pos + 1] != '+')
        return std::nullopt;
    pos += 2;
    if (!read_int(h.new_start))
        return std::nullopt;
    if (pos < line.size() && line[pos] == ',') {
        ++pos;
        if (!read_int(h.new_count))
            return std::nullopt;
    }
    if (!starts_with(line.substr(pos), " @@"))
        return std::nullopt;
    return h;
}

} // namespace

std::vector<std::string> Hunk::pre_image() const {
    std::vector<std::string> out;
    for (const auto& [tag, text] : lines)
        if (tag != LineTag::Add)
            out.push_back(text);
    return out;
}

std::vector<std::string> Hunk::post_image() const {
    std::vector<std::string> out;
    for (const auto& [tag, text] : lines)
        if (tag != LineTag::Del)
            out.push_back(text);
    return out;
}

std::vector<std::string> Patch::affected_files() const {
    std::set<std::string> paths;
    for (const auto& c : commits) {
        for (const auto& fd : c.file_diffs) {
            if (fd.old_path != "/dev/null" && !fd.old_path.empty())
                paths.insert(fd.old_path);
            if (fd.new_path != "/dev/null" && !fd.new_path.empty())
                paths.insert(fd.new_path);
        }
    }
    return {paths.begin(), paths.end()};
}

Patch parse_patch(std::string_view text) {
    Patch patch;
    Commit current;
    bool current_open = false;
    FileDiff* fd = nullptr;

    auto flush_commit = [&]() {
        if (!current.file_diffs.empty())
            patch.commits.push_back(std::move(current));
        current = Commit{};
        fd = nullptr;
    };

    auto lines = split_lines(text);
    size_t i = 0;
    while (i < lines.size()) {
        std::string_view line = lines[i];

        if (starts_with(line, "commit ") && is_hex40(line.substr(7, 40))) {
            flush_commit();
            current.commit_id = std::string(line.substr(7, 40));
            current_open = true;
            ++i;
            continue;
        }
        if (starts_with(line, "From ") && line.size() >= 45 && is_hex40(line.substr(5, 40))) {
            flush_commit();
            current.commit_id = std::string(line.substr(5, 40));
            current_open = true;
            ++i;
            continue;
        }
        if (starts_with(line, "diff --git ")) {
            current_open = true;
            current.file_diffs.emplace_back();
            fd = &current.file_diffs.back();
            // paths are re-read from ---/+++ markers; the header is kept
            // only as a fallback for diffs without body markers
            std::string_view rest = line.substr(11);
            size_t space = rest.find(" b/");
            if (space != std::string_view::npos) {
                fd->old_path = strip_diff_prefix(rest.substr(0, space));
                fd->new_path = strip_diff_prefix(rest.substr(space + 1));
            }
            ++i;
            continue;
        }
        if (fd != nullptr) {
            if (starts_with(line, "new file mode")) {
                fd->change_kind = ChangeKind::Create;
                ++i;
                continue;
            }
            if (starts_with(line, "deleted file mode")) {
                fd->change_kind = ChangeKind::Delete;
                ++i;
                continue;
            }
            if (starts_with(line, "rename from ")) {
                fd->change_kind = ChangeKind::Rename;
                fd->old_path = std::string(line.substr(12));
                ++i;
                continue;
            }
            if (starts_with(line, "rename to ")) {
                fd->change_kind = ChangeKind::Rename;
                fd->new_path = std::string(line.substr(10));
                ++i;
                continue;
            }
            if (starts_with(line, "--- ")) {
                std::string p = parse_marker_path(line);
                if (p == "/dev/null")
                    fd->change_kind = ChangeKind::Create;
                else
                    fd->old_path = p;
                ++i;
                continue;
            }
            if (starts_with(line, "+++ ")) {
                std::string p = parse_marker_path(line);
                if (p == "/dev/null")
                    fd->change_kind = ChangeKind::Delete;
                else
                    fd->new_path = p;
                ++i;
                continue;
            }
            if (starts_with(line, "@@")) {
                auto header = parse_hunk_header(line);
                if (!header)
                    throw Error(Errc::MalformedHunkHeader, std::string(line));
                Hunk hunk;
                hunk.old_start = header->old_start;
                hunk.old_count = header->old_count;
                hunk.new_start = header->new_start;
                hunk.new_count = header->new_count;
                int old_rem = header->old_count;
                int new_rem = header->new_count;
                ++i;
                while (old_rem > 0 || new_rem > 0) {
                    if (i >= lines.size())
                        throw Error(Errc::CountMismatch,
                                    fd->effective_path() + ": hunk truncated at end of input");
                    std::string_view body = lines[i];
                    if (body.empty()) {
                        // some tools strip the leading space of empty context lines
                        --old_rem;
                        --new_rem;
                        hunk.lines.emplace_back(LineTag::Context, "");
                    } else if (body[0] == ' ') {
                        --old_rem;
                        --new_rem;
                        hunk.lines.emplace_back(LineTag::Context, std::string(body.substr(1)));
                    } else if (body[0] == '-') {
                        --old_rem;
                        hunk.lines.emplace_back(LineTag::Del, std::string(body.substr(1)));
                    } else if (body[0] == '+') {
                        --new_rem;
                        hunk.lines.emplace_back(LineTag::Add, std::string(body.substr(1)));
                    } else if (body[0] == '\\') {
                        if (!hunk.lines.empty() && hunk.lines.back().first != LineTag::Del)
                            fd->new_no_trailing_newline = true;
                        ++i;
                        continue;
                    } else {
                        throw Error(Errc::CountMismatch,
                                    fd->effective_path() + ": declared counts exceed hunk body");
                    }
                    if (old_rem < 0 || new_rem < 0)
                        throw Error(Errc::CountMismatch,
                                    fd->effective_path() + ": hunk body exceeds declared counts");
                    ++i;
                }
                // trailing no-newline marker after the last hunk line
                if (i < lines.size() && !lines[i].empty() && lines[i][0] == '\\') {
                    if (!hunk.lines.empty() && hunk.lines.back().first != LineTag::Del)
                        fd->new_no_trailing_newline = true;
                    ++i;
                }
                // leftover +/- body lines mean the header undercounted;
                // marker lines, the "---" message separator and the "-- "
                // mail signature do not
                if (i < lines.size() && !lines[i].empty() &&
                    (lines[i][0] == '+' || lines[i][0] == '-') &&
                    !starts_with(lines[i], "+++ ") && !starts_with(lines[i], "--- ") &&
                    lines[i] != "---" && lines[i] != "--" && !starts_with(lines[i], "-- ")) {
                    throw Error(Errc::CountMismatch,
                                fd->effective_path() + ": hunk body exceeds declared counts");
                }
                fd->hunks.push_back(std::move(hunk));
                continue;
            }
        }
        (void)current_open;
        ++i; // commit message, index lines, mail headers, ...
    }
    flush_commit();
    return patch;
}

LocateResult locate(const std::vector<std::string>& file_lines,
                    const std::vector<std::string>& image, int hint) {
    LocateResult r;
    if (image.empty() || image.size() > file_lines.size())
        return r;

    std::vector<int> matches; // 1-based
    for (size_t i = 0; i + image.size() <= file_lines.size(); ++i) {
        if (std::equal(image.begin(), image.end(), file_lines.begin() + i))
            matches.push_back(static_cast<int>(i) + 1);
    }
    r.match_count = static_cast<int>(matches.size());
    if (matches.empty())
        return r;
    if (matches.size() == 1) {
        r.kind = LocateResult::Kind::Unique;
        r.line = matches[0];
        r.offset = matches[0] - hint;
        return r;
    }
    int best = matches[0];
    bool tie = false;
    for (size_t i = 1; i < matches.size(); ++i) {
        int d = std::abs(matches[i] - hint);
        int bd = std::abs(best - hint);
        if (d < bd) {
            best = matches[i];
            tie = false;
        } else if (d == bd) {
            tie = true;
        }
    }
    if (tie) {
        r.kind = LocateResult::Kind::Ambiguous;
        return r;
    }
    r.kind = LocateResult::Kind::Unique;
    r.line = best;
    r.offset = best - hint;
    return r;
}

const char* to_string(HunkVerdict::State s) {
    switch (s) {
    case HunkVerdict::State::Appliable: return "Appliable";
    case HunkVerdict::State::AlreadyApplied: return "AlreadyApplied";
    case HunkVerdict::State::Ambiguous: return "Ambiguous";
    case HunkVerdict::State::Absent: return "Absent";
    }
    return "?";
}

HunkVerdict classify_hunk(const std::vector<std::string>& file_lines, const Hunk& hunk) {
    HunkVerdict v;
    auto pre = hunk.pre_image();
    auto post = hunk.post_image();

    if (pre.empty()) {
        // pure insertion hunk: presence of the post image is the only signal
        auto p = locate(file_lines, post, hunk.new_start);
        if (p.kind == LocateResult::Kind::Unique) {
            v.state = HunkVerdict::State::AlreadyApplied;
            v.anchor_line = p.line;
            v.offset = p.offset;
        } else if (p.kind == LocateResult::Kind::Ambiguous) {
            v.state = HunkVerdict::State::Ambiguous;
        } else {
            v.state = HunkVerdict::State::Appliable;
            v.anchor_line = hunk.old_start;
        }
        return v;
    }

    auto found = locate(file_lines, pre, hunk.old_start);
    if (found.kind == LocateResult::Kind::Unique) {
        v.state = HunkVerdict::State::Appliable;
        v.anchor_line = found.line;
        v.offset = found.offset;
        return v;
    }
    if (found.kind == LocateResult::Kind::Ambiguous) {
        v.state = HunkVerdict::State::Ambiguous;
        return v;
    }
    auto applied = locate(file_lines, post, hunk.new_start);
    if (applied.kind == LocateResult::Kind::Unique) {
        v.state = HunkVerdict::State::AlreadyApplied;
        v.anchor_line = applied.line;
        v.offset = applied.offset;
        return v;
    }
    v.state = applied.kind == LocateResult::Kind::Ambiguous ? HunkVerdict::State::Ambiguous
                                                            : HunkVerdict::State::Absent;
    return v;
}

namespace {

std::string build_created_content(const FileDiff& fd) {
    std::vector<std::string> lines;
    for (const auto& hunk : fd.hunks)
        for (auto& l : hunk.post_image())
            lines.push_back(std::move(l));
    return join_lines(lines, !fd.new_no_trailing_newline);
}

void apply_file_diff(MemoryTree& tree, const FileDiff& fd) {
    const std::string& path = fd.old_path;

    if (fd.change_kind == ChangeKind::Create) {
        if (auto existing = tree.read(fd.new_path)) {
            auto lines = split_lines(*existing);
            HunkVerdict v = fd.hunks.empty() ? HunkVerdict{} : classify_hunk(lines, fd.hunks[0]);
            throw NotAppliableError(fd.new_path, 0, v);
        }
        tree.put(fd.new_path, build_created_content(fd));
        return;
    }

    auto content = tree.read(path);
    if (!content)
        throw NotAppliableError(path, 0, HunkVerdict{HunkVerdict::State::Absent, std::nullopt, 0});

    auto lines = split_lines(*content);
    bool trailing_nl = content->empty() || content->back() == '\n';
    int shift = 0;
    for (size_t hi = 0; hi < fd.hunks.size(); ++hi) {
        const Hunk& hunk = fd.hunks[hi];
        auto pre = hunk.pre_image();
        auto post = hunk.post_image();
        if (pre.empty()) {
            size_t at = static_cast<size_t>(std::clamp(hunk.old_start + shift, 0,
                                                       static_cast<int>(lines.size())));
            lines.insert(lines.begin() + at, post.begin(), post.end());
        } else {
            auto found = locate(lines, pre, hunk.old_start + shift);
            if (found.kind != LocateResult::Kind::Unique) {
                HunkVerdict v = classify_hunk(lines, hunk);
                if (v.state == HunkVerdict::State::Appliable)
                    v.state = HunkVerdict::State::Ambiguous; // only reachable via overlap
                throw NotAppliableError(path, hi, v);
            }
            auto first = lines.begin() + (found.line - 1);
            lines.erase(first, first + pre.size());
            lines.insert(lines.begin() + (found.line - 1), post.begin(), post.end());
        }
        shift += hunk.new_count - hunk.old_count;
    }

    if (fd.change_kind == ChangeKind::Delete) {
        tree.erase(path);
        return;
    }
    std::string rebuilt = join_lines(lines, fd.new_no_trailing_newline ? false : trailing_nl);
    if (fd.change_kind == ChangeKind::Rename) {
        tree.erase(path);
        tree.put(fd.new_path, std::move(rebuilt));
    } else {
        tree.put(path, std::move(rebuilt));
    }
}

} // namespace

MemoryTree apply_patch(MemoryTree tree, const Patch& patch) {
    // the tree is a private copy, so throwing leaves the caller's intact
    for (const auto& commit : patch.commits)
        for (const auto& fd : commit.file_diffs)
            apply_file_diff(tree, fd);
    return tree;
}

const char* to_string(PresenceResult::State s) {
    switch (s) {
    case PresenceResult::State::Vulnerable: return "Vulnerable";
    case PresenceResult::State::Patched: return "Patched";
    case PresenceResult::State::Indeterminate: return "Indeterminate";
    }
    return "?";
}

PresenceResult patch_presence(const SourceTree& tree, const Patch& patch) {
    PresenceResult result;
    bool all_appliable = true;
    bool all_applied = true;

    auto record = [&](const std::string& file, size_t hi, HunkVerdict v) {
        switch (v.state) {
        case HunkVerdict::State::Appliable: all_applied = false; break;
        case HunkVerdict::State::AlreadyApplied: all_appliable = false; break;
        default: all_applied = false; all_appliable = false; break;
        }
        result.details.push_back({file, hi, v});
    };

    for (const auto& commit : patch.commits) {
        for (const auto& fd : commit.file_diffs) {
            size_t hunk_count = std::max<size_t>(fd.hunks.size(), 1);

            if (fd.change_kind == ChangeKind::Create) {
                auto state = tree.exists(fd.new_path) ? HunkVerdict::State::AlreadyApplied
                                                      : HunkVerdict::State::Appliable;
                for (size_t hi = 0; hi < hunk_count; ++hi)
                    record(fd.new_path, hi, {state, std::nullopt, 0});
                continue;
            }
            if (fd.change_kind == ChangeKind::Delete && !tree.exists(fd.old_path)) {
                for (size_t hi = 0; hi < hunk_count; ++hi)
                    record(fd.old_path, hi, {HunkVerdict::State::AlreadyApplied, std::nullopt, 0});
                continue;
            }

            auto content = tree.read(fd.old_path);
            std::string shown_path = fd.old_path;
            if (!content && fd.change_kind == ChangeKind::Rename) {
                content = tree.read(fd.new_path); // already renamed counts as applied evidence
                shown_path = fd.new_path;
            }
            if (!content) {
                for (size_t hi = 0; hi < hunk_count; ++hi)
                    record(shown_path, hi, {HunkVerdict::State::Absent, std::nullopt, 0});
                continue;
            }
            auto lines = split_lines(*content);
            for (size_t hi = 0; hi < fd.hunks.size(); ++hi)
                record(shown_path, hi, classify_hunk(lines, fd.hunks[hi]));
        }
    }

    if (result.details.empty())
        result.state = PresenceResult::State::Indeterminate;
    else if (all_appliable)
        result.state = PresenceResult::State::Vulnerable;
    else if (all_applied)
        result.state = PresenceResult::State::Patched;
    else
        result.state = PresenceResult::State::Indeterminate;
    return result;
}

} // namespace kvet
