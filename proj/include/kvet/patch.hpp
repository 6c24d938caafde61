#pragma once

#include "kvet/errors.hpp"
#include "kvet/source_tree.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kvet {

enum class LineTag { Context, Del, Add };

enum class ChangeKind { Modify, Create, Delete, Rename };

/// One contiguous change block of a unified diff.
struct Hunk {
    int old_start = 0; // 1-based
    int old_count = 0;
    int new_start = 0;
    int new_count = 0;
    std::vector<std::pair<LineTag, std::string>> lines;

    // context + del lines, in order (what an unpatched file contains)
    std::vector<std::string> pre_image() const;
    // context + add lines, in order (what a patched file contains)
    std::vector<std::string> post_image() const;
};

struct FileDiff {
    std::string old_path; // '/'-relative, "a/" prefix stripped
    std::string new_path;
    ChangeKind change_kind = ChangeKind::Modify;
    std::vector<Hunk> hunks;
    bool new_no_trailing_newline = false;

    // new_path unless the file is being deleted
    const std::string& effective_path() const {
        return change_kind == ChangeKind::Delete ? old_path : new_path;
    }
};

struct Commit {
    std::string commit_id; // may be empty for bare diffs
    std::vector<FileDiff> file_diffs;
};

struct Patch {
    std::vector<Commit> commits;

    // union of old/new paths across all commits, sorted, deduplicated
    std::vector<std::string> affected_files() const;
    bool empty() const { return commits.empty(); }
};

// Parses one or more concatenated git-style unified diffs. Commit
// boundaries are recognized from "commit <sha>" and "From <sha>" lines;
// headerless input yields a single anonymous commit. Throws
// MalformedHunkHeader / CountMismatch.
Patch parse_patch(std::string_view text);

struct LocateResult {
    enum class Kind { Unique, Ambiguous, Absent };
    Kind kind = Kind::Absent;
    int line = 0;        // 1-based match position (Unique only)
    int offset = 0;      // line - hint (Unique only)
    int match_count = 0; // total exact matches found
};

// Exact subsequence search for image inside file_lines, preferring the
// match nearest to the 1-based hint; ties at minimal |offset| are
// ambiguous. Whitespace is significant.
LocateResult locate(const std::vector<std::string>& file_lines,
                    const std::vector<std::string>& image, int hint);

struct HunkVerdict {
    enum class State { Appliable, AlreadyApplied, Ambiguous, Absent };
    State state = State::Absent;
    std::optional<int> anchor_line; // matched 1-based position
    int offset = 0;                 // signed shift from the declared position

    bool operator==(const HunkVerdict&) const = default;
};

const char* to_string(HunkVerdict::State s);

HunkVerdict classify_hunk(const std::vector<std::string>& file_lines, const Hunk& hunk);

class NotAppliableError : public Error {
public:
    NotAppliableError(std::string file, size_t hunk_index, HunkVerdict verdict)
        : Error(Errc::NotAppliable,
                file + " hunk #" + std::to_string(hunk_index) + " is " + to_string(verdict.state)),
          file_(std::move(file)), hunk_index_(hunk_index), verdict_(verdict) {}

    const std::string& file() const { return file_; }
    size_t hunk_index() const { return hunk_index_; }
    const HunkVerdict& verdict() const { return verdict_; }

private:
    std::string file_;
    size_t hunk_index_;
    HunkVerdict verdict_;
};

// Applies every commit in order to a copy of the tree. All hunks must
// classify Appliable (create-kind diffs require the file to be absent);
// the first failure aborts the whole application.
MemoryTree apply_patch(MemoryTree tree, const Patch& patch);

struct PresenceResult {
    enum class State { Vulnerable, Patched, Indeterminate };

    struct HunkDetail {
        std::string file;
        size_t hunk_index = 0;
        HunkVerdict verdict;
    };

    State state = State::Indeterminate;
    std::vector<HunkDetail> details;

    bool vulnerable() const { return state == State::Vulnerable; }
    bool patched() const { return state == State::Patched; }
};

const char* to_string(PresenceResult::State s);

// Vulnerable when every hunk is Appliable; Patched when every hunk is
// AlreadyApplied (create-kind files present and delete-kind files absent
// count as AlreadyApplied); anything else is Indeterminate.
PresenceResult patch_presence(const SourceTree& tree, const Patch& patch);

} // namespace kvet
