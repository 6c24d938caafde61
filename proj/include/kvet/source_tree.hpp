#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kvet {

/// Read-only view of a source tree addressed by '/'-separated relative
/// paths. Backed either by a directory or an in-memory file map.
class SourceTree {
public:
    virtual ~SourceTree() = default;
    virtual std::optional<std::string> read(const std::string& path) const = 0;
    bool exists(const std::string& path) const { return read(path).has_value(); }
};

/// Value-type tree; the mutable backing used by tests, fixtures and
/// patch application.
class MemoryTree : public SourceTree {
public:
    MemoryTree() = default;
    explicit MemoryTree(std::map<std::string, std::string> files) : files_(std::move(files)) {}

    std::optional<std::string> read(const std::string& path) const override;

    void put(std::string path, std::string content) { files_[std::move(path)] = std::move(content); }
    void erase(const std::string& path) { files_.erase(path); }
    const std::map<std::string, std::string>& files() const { return files_; }

    bool operator==(const MemoryTree& other) const { return files_ == other.files_; }

private:
    std::map<std::string, std::string> files_;
};

class DirectoryTree : public SourceTree {
public:
    explicit DirectoryTree(std::filesystem::path root) : root_(std::move(root)) {}

    std::optional<std::string> read(const std::string& path) const override;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
};

// Splits on '\n'; a trailing newline does not produce an empty final line.
std::vector<std::string> split_lines(std::string_view text);

// Inverse of split_lines for files that end with a newline.
std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline = true);

} // namespace kvet
