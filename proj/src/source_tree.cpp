#include "kvet/source_tree.hpp"

#include <fstream>
#include <sstream>

namespace kvet {

std::optional<std::string> MemoryTree::read(const std::string& path) const {
    auto it = files_.find(path);
    if (it == files_.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::string> DirectoryTree::read(const std::string& path) const {
    // patch-supplied paths must stay inside the tree
    for (const auto& part : std::filesystem::path(path))
        if (part == "..")
            return std::nullopt;
    std::filesystem::path full = root_ / path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(full, ec))
        return std::nullopt;
    std::ifstream in(full, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(pos));
            break;
        }
        lines.emplace_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline) {
    std::string out;
    size_t total = 0;
    for (const auto& l : lines)
        total += l.size() + 1;
    out.reserve(total);
    for (size_t i = 0; i < lines.size(); ++i) {
        out += lines[i];
        if (i + 1 < lines.size() || trailing_newline)
            out += '\n';
    }
    return out;
}

} // namespace kvet
